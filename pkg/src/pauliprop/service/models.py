"""Request and response schemas for the HTTP API.

These mirror the JSON config files the CLI accepts: a config file body is
posted as-is, so the schema documented here is also the config file format.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..experiments import AdamSection, CouplingsSection, LatticeSection, LwppSection, StagesSection


class SingleRunBase(BaseModel):
    """Shared fields of eval/optimize requests: system, circuit, start point."""

    model_config = ConfigDict(extra="forbid")

    lattice: LatticeSection
    couplings: CouplingsSection = CouplingsSection()
    depth: int = Field(ge=1)
    params: list[float] | None = None
    init_mode: Literal["random", "near_identity"] | None = None
    seed: int = 2024
    lwpp: LwppSection = LwppSection()

    @model_validator(mode="after")
    def _one_start_point(self):
        if (self.params is None) == (self.init_mode is None):
            raise ValueError("provide exactly one of `params` or `init_mode`")
        return self


class EvalRequest(SingleRunBase):
    """Energy (optionally with gradient) of the ansatz state at fixed
    parameters.

    `k` selects the weight-truncated propagation estimate; omitting it gives
    the exact statevector energy.
    """

    k: int | None = Field(default=None, ge=1)
    with_gradient: bool = False
    with_ground_state: bool = False


class EvalResponse(BaseModel):
    energy: float
    engine: Literal["exact", "lwpp"]
    k: int | None
    num_qubits: int
    param_count: int
    gradient: list[float] | None = None
    ground_state_energy: float | None = None
    relative_error: float | None = None


class OptimizeRequest(SingleRunBase):
    """Adam minimization: direct exact optimization, or the two-stage
    truncated-propagation warm start followed by exact optimization."""

    strategy: Literal["direct", "two_stage"] = "two_stage"
    k: int = Field(default=3, ge=1)
    stages: StagesSection = StagesSection()
    adam: AdamSection = AdamSection()
    return_trajectory: bool = False


class TrajectoryPoint(BaseModel):
    stage: str
    iteration: int
    cost: float
    grad_norm: float
    exact_energy: float | None = None
    relative_error: float | None = None


class StageOutcome(BaseModel):
    stage: str
    iterations: int
    stop_reason: str
    final_cost: float | None = None


class OptimizeResponse(BaseModel):
    final_energy: float
    final_params: list[float]
    ground_state_energy: float
    relative_error: float
    stages: list[StageOutcome]
    trajectory: list[TrajectoryPoint] | None = None


class GroundStateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lattice: LatticeSection
    couplings: CouplingsSection = CouplingsSection()
    method: Literal["lanczos", "dense"] = "lanczos"
    seed: int = 2024


class GroundStateResponse(BaseModel):
    energy: float
    num_qubits: int
    method: str


class ExperimentRequest(BaseModel):
    """Run a full experiment; `preset` and `config` may be combined, with
    config entries overlaid onto the preset."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = None
    config: dict | None = None
    out_dir: str | None = None
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _has_source(self):
        if self.preset is None and self.config is None:
            raise ValueError("provide a `preset` name, a `config` object, or both")
        return self


class ExperimentResponse(BaseModel):
    scenario: str
    out_dir: str
    manifest_path: str
    artifacts: dict
    runs_ok: int
    runs_failed: int
    ground_state_energy: float


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetsResponse(BaseModel):
    presets: list[str]
