"""FastAPI application wrapping the toolkit.

All compute flows through these endpoints; the CLI talks to them either
in-process (ASGI test transport) or over the network. Endpoints are plain
sync functions so the framework runs them on its worker pool.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, PauliPropError
from ..exact import dense_ground_state_energy, exact_energy, exact_energy_and_gradient, ground_state_energy
from ..experiments import parse_experiment_config, run_experiment
from ..lwpp import TruncationConfig, WeightTruncatedPropagator, lwpp_energy, lwpp_gradient
from ..model import build_ansatz, build_hamiltonian, build_singlet_pairing, Lattice
from ..optimize import (
    AdamConfig,
    InitMode,
    Trajectory,
    draw_initial_params,
    minimize_adam,
    relative_error,
    two_stage_optimize,
)
from ..presets import preset_config, preset_names
from .models import (
    EvalRequest,
    EvalResponse,
    ExperimentRequest,
    ExperimentResponse,
    GroundStateRequest,
    GroundStateResponse,
    HealthResponse,
    OptimizeRequest,
    OptimizeResponse,
    PresetsResponse,
    SingleRunBase,
    StageOutcome,
    TrajectoryPoint,
)


def _setup(req: SingleRunBase):
    """Build lattice, Hamiltonian, pairing init, ansatz, and start params."""
    lat = Lattice(req.lattice.rows, req.lattice.cols)
    c = req.couplings
    h = build_hamiltonian(lat, c.jx, c.jy, c.jz)
    init = build_singlet_pairing(lat)
    circuit = build_ansatz(lat, req.depth)
    if req.params is not None:
        if len(req.params) != circuit.param_count:
            raise ConfigError(
                f"params has {len(req.params)} entries, circuit needs {circuit.param_count}"
            )
        theta = np.array(req.params, dtype=float)
    else:
        theta = draw_initial_params(InitMode(req.init_mode), circuit.param_count, req.seed)
    return lat, h, init, circuit, theta


def _trunc_cfg(req: SingleRunBase, k: int) -> TruncationConfig:
    return TruncationConfig(
        k=k,
        coeff_epsilon=req.lwpp.coeff_epsilon,
        path_coeff_cutoff=req.lwpp.path_coeff_cutoff,
    )


def _points(traj: Trajectory) -> list[TrajectoryPoint]:
    return [
        TrajectoryPoint(
            stage=traj.stage,
            iteration=rec.iteration,
            cost=rec.cost,
            grad_norm=rec.grad_norm,
            exact_energy=rec.exact_energy,
            relative_error=rec.relative_error,
        )
        for rec in traj.records
    ]


def _outcome(traj: Trajectory) -> StageOutcome:
    return StageOutcome(
        stage=traj.stage,
        iterations=len(traj.records),
        stop_reason=traj.stop_reason,
        final_cost=traj.records[-1].cost if traj.records else None,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="pauliprop", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(_request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(PauliPropError)
    async def _run_error(_request: Request, exc: PauliPropError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=PresetsResponse)
    def presets() -> PresetsResponse:
        return PresetsResponse(presets=preset_names())

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest) -> EvalResponse:
        lat, h, init, circuit, theta = _setup(req)
        gradient = None
        if req.k is None:
            engine = "exact"
            if req.with_gradient:
                energy, grad = exact_energy_and_gradient(circuit, theta, h, init)
                gradient = [float(v) for v in grad]
            else:
                energy = exact_energy(circuit, theta, h, init)
        else:
            engine = "lwpp"
            cfg = _trunc_cfg(req, req.k)
            if req.with_gradient:
                if req.lwpp.gradient_method == "parameter_shift":
                    energy = lwpp_energy(circuit, theta, h, init, cfg)
                    grad = lwpp_gradient(circuit, theta, h, init, cfg)
                else:
                    try:
                        prop = WeightTruncatedPropagator(circuit, h, init, cfg)
                        energy, grad = prop.energy_and_gradient(theta)
                    except ValueError as exc:
                        raise ConfigError(str(exc)) from exc
                gradient = [float(v) for v in grad]
            else:
                energy = lwpp_energy(circuit, theta, h, init, cfg)
        gs = err = None
        if req.with_ground_state:
            gs = ground_state_energy(h)
            err = relative_error(energy, gs)
        return EvalResponse(
            energy=energy,
            engine=engine,
            k=req.k,
            num_qubits=lat.num_qubits,
            param_count=circuit.param_count,
            gradient=gradient,
            ground_state_energy=gs,
            relative_error=err,
        )

    @app.post("/optimize", response_model=OptimizeResponse)
    def optimize(req: OptimizeRequest) -> OptimizeResponse:
        lat, h, init, circuit, theta = _setup(req)
        gs = ground_state_energy(h)
        adam = dict(
            learning_rate=req.adam.learning_rate,
            beta1=req.adam.beta1,
            beta2=req.adam.beta2,
            eps_hat=req.adam.eps_hat,
        )
        main_cfg = AdamConfig(iterations=req.stages.main_iterations, **adam)
        trajectories: list[Trajectory] = []
        if req.strategy == "direct":
            def annotate(_t, cost, _p):
                return cost, relative_error(cost, gs)

            final, main = minimize_adam(
                lambda p: exact_energy_and_gradient(circuit, p, h, init),
                theta, main_cfg, stage="main", annotate=annotate,
            )
            trajectories.append(main)
        else:
            if req.params is not None:
                init_mode = InitMode.explicit(req.params)
            else:
                init_mode = InitMode(req.init_mode)
            pre, main = two_stage_optimize(
                circuit, h, init, _trunc_cfg(req, req.k),
                AdamConfig(iterations=req.stages.pre_iterations, **adam), main_cfg,
                init_mode, req.seed,
                e_gs=gs,
                exact_log_every=req.stages.exact_log_every,
                pre_grad_norm_stop=req.stages.pre_grad_norm_stop or None,
                lwpp_gradient_method=req.lwpp.gradient_method,
            )
            if pre.records:
                trajectories.append(pre)
            trajectories.append(main)
            final = main.final_params
        energy = exact_energy(circuit, final, h, init)
        points = None
        if req.return_trajectory:
            points = [pt for traj in trajectories for pt in _points(traj)]
        return OptimizeResponse(
            final_energy=energy,
            final_params=[float(v) for v in final],
            ground_state_energy=gs,
            relative_error=relative_error(energy, gs),
            stages=[_outcome(t) for t in trajectories],
            trajectory=points,
        )

    @app.post("/gs", response_model=GroundStateResponse)
    def ground_state(req: GroundStateRequest) -> GroundStateResponse:
        lat = Lattice(req.lattice.rows, req.lattice.cols)
        c = req.couplings
        h = build_hamiltonian(lat, c.jx, c.jy, c.jz)
        if req.method == "dense":
            energy = dense_ground_state_energy(h)
        else:
            energy = ground_state_energy(h, seed=req.seed)
        return GroundStateResponse(energy=energy, num_qubits=lat.num_qubits, method=req.method)

    @app.post("/experiment", response_model=ExperimentResponse)
    def experiment(req: ExperimentRequest) -> ExperimentResponse:
        if req.preset is not None:
            data = preset_config(req.preset, overlay=req.config)
        else:
            data = dict(req.config or {})
        cfg = parse_experiment_config(data)
        manifest = run_experiment(cfg, out_dir=req.out_dir, threads=req.threads)
        ok = sum(1 for r in manifest.runs if r["status"] == "ok")
        return ExperimentResponse(
            scenario=manifest.scenario,
            out_dir=manifest.out_dir,
            manifest_path=f"{manifest.out_dir}/manifest.json",
            artifacts=manifest.artifacts,
            runs_ok=ok,
            runs_failed=len(manifest.runs) - ok,
            ground_state_energy=manifest.ground_state["energy"],
        )

    return app


app = create_app()
