"""Adam optimization, the two-stage warm-start protocol, and run metrics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import ceil, isfinite
from statistics import median
from typing import Callable, Sequence

import numpy as np

from .errors import UndefinedMetricError
from .exact import exact_energy, exact_energy_and_gradient
from .lwpp import TruncationConfig, WeightTruncatedPropagator, lwpp_gradient
from .model import Circuit, InitStateSpec
from .pauli import PauliSum
from .seeding import make_rng

__all__ = [
    "AdamConfig",
    "InitMode",
    "IterationRecord",
    "Trajectory",
    "draw_initial_params",
    "minimize_adam",
    "two_stage_optimize",
    "relative_error",
    "decile_accuracy",
    "iterations_to_target",
]


@dataclass(frozen=True)
class AdamConfig:
    """Standard Adam with bias correction; stopping is budget-based."""

    iterations: int
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1/beta2 must lie in [0, 1)")


@dataclass(frozen=True)
class InitMode:
    """Initial-parameter scheme: uniform [-pi, pi], the same scaled by 0.01,
    or an explicit vector."""

    kind: str
    values: tuple[float, ...] | None = None

    RANDOM = "random"
    NEAR_IDENTITY = "near_identity"
    EXPLICIT = "explicit"

    def __post_init__(self) -> None:
        if self.kind not in (self.RANDOM, self.NEAR_IDENTITY, self.EXPLICIT):
            raise ValueError(f"unknown init mode {self.kind!r}")
        if (self.kind == self.EXPLICIT) != (self.values is not None):
            raise ValueError("explicit mode and values must come together")

    @classmethod
    def random(cls) -> "InitMode":
        return cls(cls.RANDOM)

    @classmethod
    def near_identity(cls) -> "InitMode":
        return cls(cls.NEAR_IDENTITY)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "InitMode":
        return cls(cls.EXPLICIT, tuple(float(v) for v in values))


def draw_initial_params(mode: InitMode, param_count: int, seed: int) -> np.ndarray:
    """Seeded draw; identical (mode, param_count, seed) give identical vectors."""
    if mode.kind == InitMode.EXPLICIT:
        if len(mode.values) != param_count:
            raise ValueError(
                f"explicit vector has {len(mode.values)} entries, circuit needs {param_count}"
            )
        return np.array(mode.values, dtype=float)
    rng = make_rng(seed)
    draw = rng.uniform(-np.pi, np.pi, param_count)
    if mode.kind == InitMode.NEAR_IDENTITY:
        draw *= 0.01
    return draw


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    grad_norm: float
    exact_energy: float | None = None
    relative_error: float | None = None
    wall_ms: float = 0.0


@dataclass
class Trajectory:
    """Per-iteration records of one optimization stage."""

    stage: str
    records: list[IterationRecord] = field(default_factory=list)
    final_params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    stop_reason: str = "budget"

    def final_relative_error(self) -> float | None:
        for rec in reversed(self.records):
            if rec.relative_error is not None:
                return rec.relative_error
        return None


def minimize_adam(
    cost_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    init_params: np.ndarray,
    cfg: AdamConfig,
    *,
    stage: str = "main",
    grad_norm_stop: float | None = None,
    annotate: Callable[[int, float, np.ndarray], tuple[float | None, float | None]] | None = None,
) -> tuple[np.ndarray, Trajectory]:
    """Adam minimization with a fixed iteration budget.

    Each iteration evaluates cost and gradient at the current point, records
    it (iteration indices start at 1), then applies the bias-corrected Adam
    update. `annotate` may attach (exact_energy, relative_error) to a record.
    Early exits: gradient norm below `grad_norm_stop`, or a non-finite
    cost/gradient (recorded as the stop reason, never silently).
    """
    params = np.asarray(init_params, dtype=float).copy()
    traj = Trajectory(stage=stage)
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    for t in range(1, cfg.iterations + 1):
        started = time.perf_counter()
        cost, grad = cost_and_grad(params)
        grad = np.asarray(grad, dtype=float)
        gnorm = float(np.linalg.norm(grad))
        record = IterationRecord(
            iteration=t,
            cost=float(cost),
            grad_norm=gnorm,
            wall_ms=(time.perf_counter() - started) * 1e3,
        )
        if annotate is not None:
            record.exact_energy, record.relative_error = annotate(t, float(cost), params)
        traj.records.append(record)
        if not (isfinite(cost) and np.all(np.isfinite(grad))):
            traj.stop_reason = "non_finite"
            break
        if grad_norm_stop is not None and gnorm < grad_norm_stop:
            traj.stop_reason = "grad_norm"
            break
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        m_hat = m / (1.0 - cfg.beta1**t)
        v_hat = v / (1.0 - cfg.beta2**t)
        params -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps_hat)
    traj.final_params = params
    return params, traj


def relative_error(e: float, e_gs: float) -> float:
    """|e - e_gs| / |e_gs|; undefined when the reference energy is zero."""
    if e_gs == 0.0:
        raise UndefinedMetricError("relative error undefined for e_gs = 0")
    return abs(e - e_gs) / abs(e_gs)


def decile_accuracy(final_errors: Sequence[float]) -> float:
    """Boundary of the best 10% of runs: ascending nearest-rank ceil(N/10)."""
    if len(final_errors) == 0:
        raise ValueError("decile_accuracy needs a non-empty list")
    ordered = sorted(final_errors)
    rank = ceil(0.1 * len(ordered))  # 1-indexed nearest rank
    return ordered[rank - 1]


def iterations_to_target(traj: Trajectory, target_error: float) -> int | None:
    """Smallest recorded iteration with relative error <= target, else None."""
    for rec in traj.records:
        if rec.relative_error is not None and rec.relative_error <= target_error:
            return rec.iteration
    return None


def median_or_none(values: Sequence[float]) -> float | None:
    return median(values) if values else None


def two_stage_optimize(
    circuit: Circuit,
    h: PauliSum,
    init: InitStateSpec,
    lwpp_cfg: TruncationConfig,
    pre_cfg: AdamConfig,
    main_cfg: AdamConfig,
    init_mode: InitMode,
    seed: int,
    *,
    e_gs: float | None = None,
    exact_log_every: int = 10,
    pre_grad_norm_stop: float | None = 1e-4,
    lwpp_gradient_method: str = "adjoint",
) -> tuple[Trajectory, Trajectory]:
    """LWPP pre-optimization followed by exact optimization.

    Stage 1 minimizes the truncated-propagation energy from the seeded draw
    (exact energy and relative error are logged every `exact_log_every`
    iterations and at the endpoint); stage 2 minimizes the exact energy from
    stage 1's final parameters, logging relative error every iteration.
    A zero-iteration pre stage degenerates to direct optimization.
    """
    theta = draw_initial_params(init_mode, circuit.param_count, seed)

    if pre_cfg.iterations > 0:
        engine = WeightTruncatedPropagator(circuit, h, init, lwpp_cfg)
        if lwpp_gradient_method == "adjoint":
            pre_cost = engine.energy_and_gradient
        elif lwpp_gradient_method == "parameter_shift":
            def pre_cost(p: np.ndarray) -> tuple[float, np.ndarray]:
                return engine.energy(p), lwpp_gradient(circuit, p, h, init, lwpp_cfg)
        else:
            raise ValueError(f"unknown lwpp gradient method {lwpp_gradient_method!r}")

        def pre_annotate(t: int, _cost: float, params: np.ndarray):
            if t % exact_log_every != 0 and t != 1 and t != pre_cfg.iterations:
                return None, None
            energy = exact_energy(circuit, params, h, init)
            err = relative_error(energy, e_gs) if e_gs is not None else None
            return energy, err

        theta, pre_traj = minimize_adam(
            pre_cost,
            theta,
            pre_cfg,
            stage="pre",
            grad_norm_stop=pre_grad_norm_stop,
            annotate=pre_annotate,
        )
        # The endpoint parameters are what stage 2 inherits; log their exact
        # energy even when the budget stopped mid-cadence.
        if pre_traj.records and pre_traj.records[-1].exact_energy is None:
            energy = exact_energy(circuit, theta, h, init)
            pre_traj.records[-1].exact_energy = energy
            if e_gs is not None:
                pre_traj.records[-1].relative_error = relative_error(energy, e_gs)
    else:
        pre_traj = Trajectory(stage="pre", final_params=theta.copy())

    def main_annotate(_t: int, cost: float, _params: np.ndarray):
        err = relative_error(cost, e_gs) if e_gs is not None else None
        return cost, err

    def main_cost(p: np.ndarray) -> tuple[float, np.ndarray]:
        return exact_energy_and_gradient(circuit, p, h, init)

    _, main_traj = minimize_adam(main_cost, theta, main_cfg, stage="main", annotate=main_annotate)
    return pre_traj, main_traj
