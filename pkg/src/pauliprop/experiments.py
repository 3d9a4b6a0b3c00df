"""Seeded scenario orchestration and result persistence.

Scenarios map onto the study's figures: evaluating a truncated-propagation
energy along an exactly optimized path, optimizing the truncated energy
directly, head-to-head initialization comparisons (random / near-identity),
a parameter-resampling control, and a rugged-ansatz variant. Results land in
three CSV artifacts plus a JSON manifest; reruns with identical config and
master seed reproduce byte-identical CSV bodies.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from statistics import median
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, RunError
from .exact import exact_energy, exact_energy_and_gradient, ground_state_energy
from .lwpp import TruncationConfig, WeightTruncatedPropagator, lwpp_gradient
from .model import Circuit, Lattice, build_ansatz, build_hamiltonian, build_rugged_ansatz, build_singlet_pairing
from .optimize import (
    AdamConfig,
    InitMode,
    Trajectory,
    decile_accuracy,
    draw_initial_params,
    minimize_adam,
    relative_error,
    two_stage_optimize,
)
from .seeding import RNG_DESCRIPTION, ROLE_PHI, ROLE_RESAMPLE, ROLE_RUN, derive_seed, make_rng

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "RecordSet",
    "run_experiment",
    "resample_parameters",
    "emit_records",
    "summarize_trajectory_rows",
    "load_config_data",
    "env_seed_override",
    "TRAJECTORY_COLUMNS",
    "SUMMARY_COLUMNS",
    "PARAMS_COLUMNS",
]

SCENARIOS = (
    "eval_on_exact_path",
    "lwpp_opt_exact_eval",
    "random_init_compare",
    "near_identity_compare",
    "resampling_control",
    "rugged_landscape",
)

TRAJECTORY_COLUMNS = [
    "run_id", "seed", "scenario", "strategy", "lattice_rows", "lattice_cols",
    "depth", "k", "stage", "iteration", "cost_value", "exact_energy",
    "relative_error", "grad_norm", "wall_ms",
]
SUMMARY_COLUMNS = [
    "scenario", "lattice_rows", "lattice_cols", "depth", "k", "strategy",
    "init_mode", "runs", "decile_relative_error", "median_relative_error",
    "best_relative_error", "median_iterations_to_target",
]
PARAMS_COLUMNS = ["run_id", "strategy", "stage", "param_index", "value"]


class LatticeSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)


class CouplingsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    jx: float = 1.0
    jy: float = 0.8
    jz: float = 0.5


class AdamSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    learning_rate: float = Field(default=0.01, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps_hat: float = Field(default=1e-8, gt=0)


class LwppSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    coeff_epsilon: float = Field(default=1e-12, ge=0)
    path_coeff_cutoff: float = Field(default=0.0, ge=0)
    gradient_method: Literal["adjoint", "parameter_shift"] = "adjoint"


class StagesSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    pre_iterations: int = Field(default=1000, ge=0)
    main_iterations: int = Field(default=1500, ge=1)
    pre_grad_norm_stop: float = Field(default=1e-4, ge=0)
    exact_log_every: int = Field(default=10, ge=1)
    snapshot_every: int = Field(default=10, ge=1)


class ExperimentConfig(BaseModel):
    """Validated experiment description (JSON-compatible)."""

    model_config = ConfigDict(extra="forbid")

    scenario: Literal[SCENARIOS]
    lattice: LatticeSection
    couplings: CouplingsSection = CouplingsSection()
    depths: list[int] = Field(min_length=1)
    k_values: list[int] = Field(default=[3], min_length=1)
    init_mode: str | list[str] = Field(default="near_identity", validate_default=True)
    runs_per_setting: int = Field(default=24, ge=1)
    master_seed: int = 2024
    stages: StagesSection = StagesSection()
    adam: AdamSection = AdamSection()
    lwpp: LwppSection = LwppSection()
    record_timing: bool = False
    output_dir: str | None = None

    @field_validator("depths", "k_values")
    @classmethod
    def _positive_entries(cls, v, info):
        for entry in v:
            if entry < 1:
                raise ValueError(f"{info.field_name} entries must be >= 1, got {entry}")
        return v

    @field_validator("init_mode")
    @classmethod
    def _normalize_init_mode(cls, v):
        modes = [v] if isinstance(v, str) else list(v)
        if not modes:
            raise ValueError("init_mode must name at least one mode")
        for m in modes:
            if m not in (InitMode.RANDOM, InitMode.NEAR_IDENTITY):
                raise ValueError(f"init_mode entries must be 'random' or 'near_identity', got {m!r}")
        return modes

    @model_validator(mode="after")
    def _scenario_constraints(self):
        fixed = {
            "random_init_compare": InitMode.RANDOM,
            "near_identity_compare": InitMode.NEAR_IDENTITY,
            "resampling_control": InitMode.NEAR_IDENTITY,
            "rugged_landscape": InitMode.NEAR_IDENTITY,
        }
        want = fixed.get(self.scenario)
        if want is not None:
            if "init_mode" not in self.model_fields_set:
                self.init_mode = [want]
            elif self.init_mode != [want]:
                raise ValueError(
                    f"scenario {self.scenario} requires init_mode [{want!r}], got {self.init_mode}"
                )
        return self

    @property
    def init_modes(self) -> list[str]:
        return self.init_mode if isinstance(self.init_mode, list) else [self.init_mode]


def _unflatten(data: dict) -> dict:
    """Expand dotted keys (`lattice.rows`) into nested mappings."""
    out: dict = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = _unflatten(value)
        parts = key.split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"config key {key!r} conflicts with a scalar value")
        last = parts[-1]
        if isinstance(value, dict) and isinstance(node.get(last), dict):
            node[last].update(value)
        else:
            node[last] = value
    return out


def env_seed_override() -> int | None:
    """Parsed PAULIPROP_SEED, or None when unset."""
    raw = os.environ.get("PAULIPROP_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"PAULIPROP_SEED must be an integer, got {raw!r}") from exc


def load_config_data(path: str | Path, *, seed_key: str = "master_seed") -> dict:
    """Read a JSON config file; dotted keys are accepted and nested.

    The PAULIPROP_SEED environment variable, when set, overrides the file's
    seed entry (`master_seed` for experiments, `seed` for single runs).
    """
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    data = _unflatten(data)
    seed = env_seed_override()
    if seed is not None:
        data[seed_key] = seed
    return data


def parse_experiment_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def resample_parameters(optimized_params: np.ndarray, seed: int) -> np.ndarray:
    """Bootstrap draw: each entry sampled i.i.d. with replacement from the
    pooled multiset of optimized values; deterministic per seed."""
    arr = np.asarray(optimized_params, dtype=float)
    if arr.size == 0:
        raise ValueError("resample_parameters needs a non-empty vector")
    rng = make_rng(ROLE_RESAMPLE, seed)
    return rng.choice(arr, size=arr.size, replace=True)


# ---------------------------------------------------------------------------
# Row assembly


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


@dataclass
class RecordSet:
    """The three CSV-ready row sets (all cells already strings)."""

    trajectory: list[list[str]] = field(default_factory=list)
    summary: list[list[str]] = field(default_factory=list)
    params: list[list[str]] = field(default_factory=list)


@dataclass
class RunManifest:
    """Everything needed to reproduce and locate an experiment's outputs."""

    scenario: str
    config: dict
    out_dir: str
    toolkit_version: str
    created_at: str
    rng: dict
    ground_state: dict
    runs: list[dict] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    completed_at: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": 1,
                "scenario": self.scenario,
                "config": self.config,
                "out_dir": self.out_dir,
                "toolkit_version": self.toolkit_version,
                "created_at": self.created_at,
                "completed_at": self.completed_at,
                "rng": self.rng,
                "ground_state": self.ground_state,
                "runs": self.runs,
                "artifacts": self.artifacts,
            },
            indent=2,
        )


class _ScenarioContext:
    """Shared immutable inputs for all bundles of one experiment."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.lat = Lattice(cfg.lattice.rows, cfg.lattice.cols)
        c = cfg.couplings
        self.h = build_hamiltonian(self.lat, c.jx, c.jy, c.jz)
        self.init = build_singlet_pairing(self.lat)
        self.e_gs = ground_state_energy(self.h)
        self.adam_kwargs = dict(
            learning_rate=cfg.adam.learning_rate,
            beta1=cfg.adam.beta1,
            beta2=cfg.adam.beta2,
            eps_hat=cfg.adam.eps_hat,
        )
        self._circuits: dict[tuple, Circuit] = {}

    def circuit(self, depth: int, phi_seed: int | None = None) -> Circuit:
        key = (depth, phi_seed)
        circ = self._circuits.get(key)
        if circ is None:
            if phi_seed is None:
                circ = build_ansatz(self.lat, depth)
            else:
                circ = build_rugged_ansatz(self.lat, depth, phi_seed)
            self._circuits[key] = circ
        return circ

    def trunc_cfg(self, k: int) -> TruncationConfig:
        return TruncationConfig(
            k=k,
            coeff_epsilon=self.cfg.lwpp.coeff_epsilon,
            path_coeff_cutoff=self.cfg.lwpp.path_coeff_cutoff,
        )

    def pre_cfg(self) -> AdamConfig:
        return AdamConfig(iterations=self.cfg.stages.pre_iterations, **self.adam_kwargs)

    def main_cfg(self) -> AdamConfig:
        return AdamConfig(iterations=self.cfg.stages.main_iterations, **self.adam_kwargs)

    def traj_rows(self, run_id: str, seed: int, strategy: str, depth: int,
                  k: int | None, traj: Trajectory) -> list[list[str]]:
        cfg = self.cfg
        out = []
        for rec in traj.records:
            out.append([
                run_id, str(seed), cfg.scenario, strategy,
                str(cfg.lattice.rows), str(cfg.lattice.cols), str(depth),
                "" if k is None else str(k), traj.stage, str(rec.iteration),
                _fmt(rec.cost), _fmt(rec.exact_energy), _fmt(rec.relative_error),
                _fmt(rec.grad_norm), _fmt(rec.wall_ms) if cfg.record_timing else "",
            ])
        return out

    def param_rows(self, run_id: str, strategy: str, stage: str, values: np.ndarray) -> list[list[str]]:
        return [[run_id, strategy, stage, str(i), _fmt(v)] for i, v in enumerate(values)]


@dataclass
class _BundleResult:
    key: tuple
    seed: int
    run_ids: list[str]
    trajectory: list[list[str]] = field(default_factory=list)
    params: list[list[str]] = field(default_factory=list)


def _bundle_eval_on_exact_path(ctx: _ScenarioContext, key: tuple, mode: str, depth: int,
                               setting_index: int, run_index: int) -> _BundleResult:
    cfg = ctx.cfg
    seed = derive_seed(cfg.master_seed, ROLE_RUN, setting_index, run_index)
    res = _BundleResult(key=key, seed=seed, run_ids=[])
    circ = ctx.circuit(depth)
    theta0 = draw_initial_params(InitMode(mode), circ.param_count, seed)

    snapshots: list[tuple[int, np.ndarray]] = []
    every = cfg.stages.snapshot_every
    total = cfg.stages.main_iterations

    def annotate(t, cost, params):
        if t == 1 or t % every == 0 or t == total:
            snapshots.append((t, params.copy()))
        return cost, relative_error(cost, ctx.e_gs)

    def cost_and_grad(p):
        return exact_energy_and_gradient(circ, p, ctx.h, ctx.init)

    final, traj = minimize_adam(cost_and_grad, theta0, ctx.main_cfg(), stage="main", annotate=annotate)
    exact_by_iter = {rec.iteration: rec.exact_energy for rec in traj.records}

    rid = f"{mode}_d{depth}_exact_opt_r{run_index:02d}"
    res.run_ids.append(rid)
    res.trajectory += ctx.traj_rows(rid, seed, "exact_opt", depth, None, traj)
    res.params += ctx.param_rows(rid, "exact_opt", "init", theta0)
    res.params += ctx.param_rows(rid, "exact_opt", "main_final", final)

    for k in cfg.k_values:
        engine = WeightTruncatedPropagator(circ, ctx.h, ctx.init, ctx.trunc_cfg(k))
        krid = f"{mode}_d{depth}_k{k}_lwpp_eval_r{run_index:02d}"
        res.run_ids.append(krid)
        for it, params in snapshots:
            value = engine.energy(params)
            res.trajectory.append([
                krid, str(seed), cfg.scenario, "lwpp_eval",
                str(cfg.lattice.rows), str(cfg.lattice.cols), str(depth),
                str(k), "main", str(it), _fmt(value), _fmt(exact_by_iter[it]),
                "", "", "",
            ])
    return res


def _bundle_lwpp_opt(ctx: _ScenarioContext, key: tuple, mode: str, depth: int,
                     setting_index: int, run_index: int) -> _BundleResult:
    cfg = ctx.cfg
    seed = derive_seed(cfg.master_seed, ROLE_RUN, setting_index, run_index)
    res = _BundleResult(key=key, seed=seed, run_ids=[])
    circ = ctx.circuit(depth)
    theta0 = draw_initial_params(InitMode(mode), circ.param_count, seed)
    every = cfg.stages.exact_log_every
    total = cfg.stages.main_iterations

    for k in cfg.k_values:
        engine = WeightTruncatedPropagator(circ, ctx.h, ctx.init, ctx.trunc_cfg(k))
        if cfg.lwpp.gradient_method == "adjoint":
            cost_and_grad = engine.energy_and_gradient
        else:
            def cost_and_grad(p, _engine=engine):
                return _engine.energy(p), lwpp_gradient(circ, p, ctx.h, ctx.init, ctx.trunc_cfg(k))

        def annotate(t, _cost, params):
            if t == 1 or t % every == 0 or t == total:
                energy = exact_energy(circ, params, ctx.h, ctx.init)
                return energy, relative_error(energy, ctx.e_gs)
            return None, None

        _, traj = minimize_adam(cost_and_grad, theta0, ctx.main_cfg(), stage="main", annotate=annotate)
        rid = f"{mode}_d{depth}_k{k}_lwpp_opt_r{run_index:02d}"
        res.run_ids.append(rid)
        res.trajectory += ctx.traj_rows(rid, seed, "lwpp_opt", depth, k, traj)
        res.params += ctx.param_rows(rid, "lwpp_opt", "init", theta0)
        res.params += ctx.param_rows(rid, "lwpp_opt", "main_final", traj.final_params)
    return res


def _bundle_compare(ctx: _ScenarioContext, key: tuple, mode: str, depth: int,
                    setting_index: int, run_index: int, phi_seed: int | None = None) -> _BundleResult:
    cfg = ctx.cfg
    seed = derive_seed(cfg.master_seed, ROLE_RUN, setting_index, run_index)
    res = _BundleResult(key=key, seed=seed, run_ids=[])
    circ = ctx.circuit(depth, phi_seed)
    kwargs = dict(
        e_gs=ctx.e_gs,
        exact_log_every=cfg.stages.exact_log_every,
        pre_grad_norm_stop=cfg.stages.pre_grad_norm_stop or None,
        lwpp_gradient_method=cfg.lwpp.gradient_method,
    )

    # Direct baseline: zero-length pre stage, same draw.
    _, direct_main = two_stage_optimize(
        circ, ctx.h, ctx.init, ctx.trunc_cfg(cfg.k_values[0]),
        AdamConfig(iterations=0, **ctx.adam_kwargs), ctx.main_cfg(),
        InitMode(mode), seed, **kwargs,
    )
    rid = f"d{depth}_direct_r{run_index:02d}"
    res.run_ids.append(rid)
    res.trajectory += ctx.traj_rows(rid, seed, "direct", depth, None, direct_main)
    theta0 = draw_initial_params(InitMode(mode), circ.param_count, seed)
    res.params += ctx.param_rows(rid, "direct", "init", theta0)
    res.params += ctx.param_rows(rid, "direct", "main_final", direct_main.final_params)

    for k in cfg.k_values:
        pre, main = two_stage_optimize(
            circ, ctx.h, ctx.init, ctx.trunc_cfg(k),
            ctx.pre_cfg(), ctx.main_cfg(), InitMode(mode), seed, **kwargs,
        )
        krid = f"d{depth}_k{k}_lwpp_init_r{run_index:02d}"
        res.run_ids.append(krid)
        res.trajectory += ctx.traj_rows(krid, seed, "lwpp_init", depth, k, pre)
        res.trajectory += ctx.traj_rows(krid, seed, "lwpp_init", depth, k, main)
        res.params += ctx.param_rows(krid, "lwpp_init", "pre_final", pre.final_params)
        res.params += ctx.param_rows(krid, "lwpp_init", "main_final", main.final_params)
    return res


def _bundle_resampling(ctx: _ScenarioContext, key: tuple, mode: str, depth: int,
                       setting_index: int, run_index: int) -> _BundleResult:
    cfg = ctx.cfg
    seed = derive_seed(cfg.master_seed, ROLE_RUN, setting_index, run_index)
    res = _BundleResult(key=key, seed=seed, run_ids=[])
    circ = ctx.circuit(depth)
    theta0 = draw_initial_params(InitMode(mode), circ.param_count, seed)
    kwargs = dict(
        e_gs=ctx.e_gs,
        exact_log_every=cfg.stages.exact_log_every,
        pre_grad_norm_stop=cfg.stages.pre_grad_norm_stop or None,
        lwpp_gradient_method=cfg.lwpp.gradient_method,
    )

    def main_annotate(_t, cost, _params):
        return cost, relative_error(cost, ctx.e_gs)

    for k in cfg.k_values:
        pre, main = two_stage_optimize(
            circ, ctx.h, ctx.init, ctx.trunc_cfg(k),
            ctx.pre_cfg(), ctx.main_cfg(), InitMode(mode), seed, **kwargs,
        )
        krid = f"d{depth}_k{k}_lwpp_init_r{run_index:02d}"
        res.run_ids.append(krid)
        res.trajectory += ctx.traj_rows(krid, seed, "lwpp_init", depth, k, pre)
        res.trajectory += ctx.traj_rows(krid, seed, "lwpp_init", depth, k, main)
        res.params += ctx.param_rows(krid, "lwpp_init", "init", theta0)
        res.params += ctx.param_rows(krid, "lwpp_init", "pre_final", pre.final_params)
        res.params += ctx.param_rows(krid, "lwpp_init", "main_final", main.final_params)

        resample_seed = derive_seed(cfg.master_seed, ROLE_RESAMPLE, setting_index, run_index)
        theta_rs = resample_parameters(pre.final_params, resample_seed)
        _, rs_main = minimize_adam(
            lambda p: exact_energy_and_gradient(circ, p, ctx.h, ctx.init),
            theta_rs, ctx.main_cfg(), stage="main", annotate=main_annotate,
        )
        rrid = f"d{depth}_k{k}_lwpp_resampled_r{run_index:02d}"
        res.run_ids.append(rrid)
        res.trajectory += ctx.traj_rows(rrid, seed, "lwpp_resampled", depth, k, rs_main)
        res.params += ctx.param_rows(rrid, "lwpp_resampled", "init", theta_rs)
        res.params += ctx.param_rows(rrid, "lwpp_resampled", "main_final", rs_main.final_params)
    return res


def _plan_bundles(ctx: _ScenarioContext):
    """Yield (key, callable) bundles; key order defines the output order."""
    cfg = ctx.cfg
    scenario = cfg.scenario
    bundles = []
    if scenario in ("eval_on_exact_path", "lwpp_opt_exact_eval"):
        runner = _bundle_eval_on_exact_path if scenario == "eval_on_exact_path" else _bundle_lwpp_opt
        settings = [(m, d) for m in cfg.init_modes for d in cfg.depths]
        for s_idx, (mode, depth) in enumerate(settings):
            for r_idx in range(cfg.runs_per_setting):
                key = (s_idx, r_idx)
                bundles.append((key, lambda key=key, m=mode, d=depth, s=s_idx, r=r_idx:
                                runner(ctx, key, m, d, s, r)))
    elif scenario in ("random_init_compare", "near_identity_compare", "rugged_landscape"):
        mode = ctx.cfg.init_modes[0]
        for s_idx, depth in enumerate(cfg.depths):
            phi_seed = None
            if scenario == "rugged_landscape":
                phi_seed = derive_seed(cfg.master_seed, ROLE_PHI, s_idx)
            for r_idx in range(cfg.runs_per_setting):
                key = (s_idx, r_idx)
                bundles.append((key, lambda key=key, d=depth, s=s_idx, r=r_idx, p=phi_seed:
                                _bundle_compare(ctx, key, mode, d, s, r, phi_seed=p)))
    elif scenario == "resampling_control":
        mode = ctx.cfg.init_modes[0]
        for s_idx, depth in enumerate(cfg.depths):
            for r_idx in range(cfg.runs_per_setting):
                key = (s_idx, r_idx)
                bundles.append((key, lambda key=key, d=depth, s=s_idx, r=r_idx:
                                _bundle_resampling(ctx, key, mode, d, s, r)))
    else:  # pragma: no cover - scenario literal already validated
        raise ConfigError(f"unknown scenario {scenario!r}")
    return bundles


# ---------------------------------------------------------------------------
# Summary computation (works on CSV-shaped string rows so that summaries are
# exactly recomputable from the emitted trajectory file)


def _final_relative_error(rows: list[list[str]]) -> float | None:
    col = TRAJECTORY_COLUMNS.index("relative_error")
    stage_col = TRAJECTORY_COLUMNS.index("stage")
    for row in reversed(rows):
        if row[stage_col] == "main" and row[col] != "":
            return float(row[col])
    return None


def summarize_trajectory_rows(rows: list[list[str]]) -> list[list[str]]:
    """Aggregate trajectory rows into one summary row per strategy cell.

    Group key: (scenario, lattice, depth, k, strategy). Reports run count,
    decile/median/best final relative error (main stage), and the median
    number of main-stage iterations a warm-started run needs to reach its
    same-seed direct baseline's final error (runs that never reach it count
    as infinity; an infinite median is written as an empty field).
    """
    idx = {name: i for i, name in enumerate(TRAJECTORY_COLUMNS)}
    by_run: dict[str, list[list[str]]] = {}
    run_order: list[str] = []
    for row in rows:
        rid = row[idx["run_id"]]
        if rid not in by_run:
            by_run[rid] = []
            run_order.append(rid)
        by_run[rid].append(row)

    scenario_modes = {
        "random_init_compare": "random",
        "near_identity_compare": "near_identity",
        "resampling_control": "near_identity",
        "rugged_landscape": "near_identity",
    }

    groups: dict[tuple, dict] = {}
    for rid in run_order:
        rrows = by_run[rid]
        first = rrows[0]
        scenario = first[idx["scenario"]]
        # Multi-mode scenarios prefix the run id with the mode name.
        mode = scenario_modes.get(scenario) or rid.split(f"_d{first[idx['depth']]}_")[0]
        key = (
            scenario, first[idx["lattice_rows"]], first[idx["lattice_cols"]],
            first[idx["depth"]], first[idx["k"]], first[idx["strategy"]], mode,
        )
        group = groups.setdefault(key, {"run_ids": [], "final_errors": [], "iters": []})
        group["run_ids"].append(rid)
        err = _final_relative_error(rrows)
        if err is not None:
            group["final_errors"].append(err)
        strategy = first[idx["strategy"]]
        if strategy == "lwpp_init":
            # Paired direct baseline shares the run suffix and depth prefix.
            prefix, _, tail = rid.partition("_k")
            direct_id = f"{prefix}_direct_r{tail.split('_r')[-1]}"
            target = _final_relative_error(by_run.get(direct_id, []))
            if target is not None:
                reached = None
                for row in by_run[rid]:
                    if row[idx["stage"]] != "main" or row[idx["relative_error"]] == "":
                        continue
                    if float(row[idx["relative_error"]]) <= target:
                        reached = int(row[idx["iteration"]])
                        break
                group["iters"].append(float("inf") if reached is None else reached)

    out: list[list[str]] = []
    for key, group in groups.items():
        scenario, lrows, lcols, depth, k, strategy, mode = key
        errors = group["final_errors"]
        decile = _fmt(decile_accuracy(errors)) if errors else ""
        med = _fmt(median(errors)) if errors else ""
        best = _fmt(min(errors)) if errors else ""
        iters = group["iters"]
        med_iters = ""
        if iters:
            value = median(iters)
            med_iters = _fmt(value) if value != float("inf") else ""
        out.append([
            scenario, lrows, lcols, depth, k, strategy, mode,
            str(len(group["run_ids"])), decile, med, best, med_iters,
        ])
    return out


# ---------------------------------------------------------------------------
# Persistence


def _csv_bytes(columns: list[str], rows: list[list[str]]) -> bytes:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(row))
    return ("\n".join(lines) + "\n").encode()


def _write_atomic(path: Path, data: bytes) -> str:
    """Write via temp+rename; byte-identical existing files are left alone."""
    if path.exists():
        if path.read_bytes() == data:
            return "verified"
        status = "replaced"
    else:
        status = "written"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return status


def emit_records(manifest: RunManifest, records: RecordSet) -> dict[str, Path]:
    """Write the CSV artifacts and the manifest atomically.

    Existing byte-identical CSVs are verified rather than rewritten; the
    outcome per artifact is recorded in the manifest.
    """
    out_dir = Path(manifest.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RunError(f"cannot create output directory {out_dir}: {exc}") from exc
    files = {
        "trajectory_csv": ("trajectory.csv", _csv_bytes(TRAJECTORY_COLUMNS, records.trajectory)),
        "summary_csv": ("summary.csv", _csv_bytes(SUMMARY_COLUMNS, records.summary)),
        "params_csv": ("params.csv", _csv_bytes(PARAMS_COLUMNS, records.params)),
    }
    paths: dict[str, Path] = {}
    statuses: dict[str, str] = {}
    try:
        for label, (name, data) in files.items():
            target = out_dir / name
            statuses[name] = _write_atomic(target, data)
            manifest.artifacts[label] = name
            paths[label] = target
        manifest.artifacts["statuses"] = statuses
        manifest.completed_at = datetime.now(timezone.utc).isoformat()
        manifest_path = out_dir / "manifest.json"
        _write_atomic(manifest_path, manifest.to_json().encode())
        paths["manifest"] = manifest_path
    except OSError as exc:
        raise RunError(f"failed writing artifacts under {out_dir}: {exc}") from exc
    return paths


def run_experiment(
    cfg: ExperimentConfig, *, out_dir: str | Path | None = None, threads: int = 1
) -> RunManifest:
    """Execute all seeded runs of an experiment and persist the artifacts.

    Bundles (one initial draw plus every strategy consuming it) run
    independently, optionally on a thread pool; aggregation order is fixed by
    (setting_index, run_index) so outputs are identical for any thread count.
    Individual bundle failures are recorded in the manifest and do not stop
    the remaining runs.
    """
    resolved = out_dir or cfg.output_dir
    if resolved is None:
        raise ConfigError("an output directory is required (config output_dir or --out-dir)")
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    ctx = _ScenarioContext(cfg)
    bundles = _plan_bundles(ctx)

    results: dict[tuple, _BundleResult | Exception] = {}
    if threads == 1:
        for key, job in bundles:
            try:
                results[key] = job()
            except Exception as exc:  # noqa: BLE001 - recorded per run
                results[key] = exc
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {key: pool.submit(job) for key, job in bundles}
            for key, fut in futures.items():
                try:
                    results[key] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    results[key] = exc

    from . import __version__

    records = RecordSet()
    manifest = RunManifest(
        scenario=cfg.scenario,
        config=cfg.model_dump(),
        out_dir=str(resolved),
        toolkit_version=__version__,
        created_at=datetime.now(timezone.utc).isoformat(),
        rng=dict(RNG_DESCRIPTION),
        ground_state={
            "lattice": f"{cfg.lattice.rows}x{cfg.lattice.cols}",
            "num_qubits": ctx.lat.num_qubits,
            "couplings": cfg.couplings.model_dump(),
            "energy": ctx.e_gs,
            "method": "lanczos",
        },
    )
    for key in sorted(results):
        outcome = results[key]
        if isinstance(outcome, Exception):
            manifest.runs.append({
                "setting_index": key[0], "run_index": key[1],
                "status": "failed", "error": f"{type(outcome).__name__}: {outcome}",
            })
            continue
        manifest.runs.append({
            "setting_index": key[0], "run_index": key[1], "status": "ok",
            "seed": outcome.seed, "run_ids": outcome.run_ids,
        })
        records.trajectory.extend(outcome.trajectory)
        records.params.extend(outcome.params)
    records.summary = summarize_trajectory_rows(records.trajectory)
    emit_records(manifest, records)
    return manifest
