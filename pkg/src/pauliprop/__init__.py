"""Low-weight Pauli propagation and exact statevector VQE toolkit."""

from importlib.metadata import PackageNotFoundError, version

from .errors import (
    ConfigError,
    ContractViolationError,
    ConvergenceError,
    DimensionError,
    PauliPropError,
    RunError,
    UndefinedMetricError,
)
from .exact import (
    StateVector,
    apply_rotation,
    dense_ground_state_energy,
    exact_energy,
    exact_energy_and_gradient,
    expectation,
    ground_state_energy,
    prepare_init,
)
from .lwpp import (
    TruncationConfig,
    WeightTruncatedPropagator,
    apply_rotation_backward,
    backpropagate_observable,
    evaluate_initial_overlap,
    lwpp_energy,
    lwpp_gradient,
)
from .model import (
    Circuit,
    Gate,
    InitStateSpec,
    Lattice,
    build_ansatz,
    build_hamiltonian,
    build_rugged_ansatz,
    build_singlet_pairing,
    circuit_dump,
    two_site_string,
)
from .optimize import (
    AdamConfig,
    InitMode,
    Trajectory,
    decile_accuracy,
    draw_initial_params,
    iterations_to_target,
    minimize_adam,
    relative_error,
    two_stage_optimize,
)
from .pauli import PauliString, PauliSum, branch_product
from .seeding import derive_seed, make_rng

try:
    __version__ = version("pauliprop")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

# Imported after __version__ exists: experiments stamps it into manifests.
from .experiments import (  # noqa: E402
    ExperimentConfig,
    RecordSet,
    RunManifest,
    emit_records,
    load_config_data,
    parse_experiment_config,
    resample_parameters,
    run_experiment,
    summarize_trajectory_rows,
)
from .presets import PRESETS, preset_config, preset_names  # noqa: E402

__all__ = [
    "AdamConfig",
    "Circuit",
    "ConfigError",
    "ContractViolationError",
    "ConvergenceError",
    "DimensionError",
    "ExperimentConfig",
    "Gate",
    "InitMode",
    "InitStateSpec",
    "Lattice",
    "PRESETS",
    "PauliPropError",
    "PauliString",
    "PauliSum",
    "RecordSet",
    "RunError",
    "RunManifest",
    "StateVector",
    "Trajectory",
    "TruncationConfig",
    "UndefinedMetricError",
    "WeightTruncatedPropagator",
    "apply_rotation",
    "apply_rotation_backward",
    "backpropagate_observable",
    "branch_product",
    "build_ansatz",
    "build_hamiltonian",
    "build_rugged_ansatz",
    "build_singlet_pairing",
    "circuit_dump",
    "decile_accuracy",
    "dense_ground_state_energy",
    "derive_seed",
    "draw_initial_params",
    "emit_records",
    "evaluate_initial_overlap",
    "exact_energy",
    "exact_energy_and_gradient",
    "expectation",
    "ground_state_energy",
    "iterations_to_target",
    "load_config_data",
    "lwpp_energy",
    "lwpp_gradient",
    "make_rng",
    "minimize_adam",
    "parse_experiment_config",
    "prepare_init",
    "preset_config",
    "preset_names",
    "relative_error",
    "resample_parameters",
    "run_experiment",
    "summarize_trajectory_rows",
    "two_site_string",
    "two_stage_optimize",
]
