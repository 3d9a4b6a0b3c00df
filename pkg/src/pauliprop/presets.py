"""Named experiment configurations covering the study's figure set.

Each preset is a plain config dict accepted by ExperimentConfig; callers can
overlay fields (lattice size, run counts) before validation. They default to
the anisotropic couplings (1.0, 0.8, 0.5) on a 3x4 lattice and master seed
2024 unless the scenario calls for something else.
"""

from __future__ import annotations

import copy

from .errors import ConfigError

__all__ = ["PRESETS", "preset_config", "preset_names"]

_BASE = {
    "lattice": {"rows": 3, "cols": 4},
    "couplings": {"jx": 1.0, "jy": 0.8, "jz": 0.5},
    "master_seed": 2024,
}

PRESETS: dict[str, dict] = {
    # Truncated energy evaluated along exactly optimized paths, both draws.
    "fig1a": {
        **_BASE,
        "scenario": "eval_on_exact_path",
        "depths": [4],
        "k_values": [1, 2, 3, 4],
        "init_mode": ["random", "near_identity"],
        "runs_per_setting": 1,
        "stages": {"main_iterations": 1500, "snapshot_every": 10},
    },
    # Optimizing the truncated energy itself, exact energy logged alongside.
    "fig1b": {
        **_BASE,
        "scenario": "lwpp_opt_exact_eval",
        "depths": [4],
        "k_values": [1, 2, 3, 4],
        "init_mode": ["random", "near_identity"],
        "runs_per_setting": 1,
        "stages": {"main_iterations": 1000, "exact_log_every": 10},
    },
    # Random-draw head-to-head at one depth: per-iteration error curves.
    "fig2": {
        **_BASE,
        "scenario": "random_init_compare",
        "depths": [6],
        "k_values": [3],
        "init_mode": "random",
        "runs_per_setting": 12,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Random-draw accuracy across depths and truncation weights.
    "fig3": {
        **_BASE,
        "scenario": "random_init_compare",
        "depths": [2, 4, 6, 8],
        "k_values": [2, 3],
        "init_mode": "random",
        "runs_per_setting": 24,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Near-identity head-to-head at one depth.
    "fig4": {
        **_BASE,
        "scenario": "near_identity_compare",
        "depths": [6],
        "k_values": [3],
        "init_mode": "near_identity",
        "runs_per_setting": 12,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Near-identity accuracy and iterations-to-target across depths.
    "fig5": {
        **_BASE,
        "scenario": "near_identity_compare",
        "depths": [2, 4, 6, 8],
        "k_values": [3],
        "init_mode": "near_identity",
        "runs_per_setting": 24,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Ferromagnetic couplings variant of fig5.
    "s2": {
        **_BASE,
        "scenario": "near_identity_compare",
        "couplings": {"jx": -1.0, "jy": -0.8, "jz": -0.5},
        "depths": [2, 4, 6, 8],
        "k_values": [3],
        "init_mode": "near_identity",
        "runs_per_setting": 24,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Control: does a value-matched random shuffle of the pre-optimized
    # parameters carry the same benefit? (It should not.)
    "s3": {
        **_BASE,
        "scenario": "resampling_control",
        "depths": [6],
        "k_values": [3],
        "init_mode": "near_identity",
        "runs_per_setting": 8,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
    # Rugged landscape: fixed random twin rotations after each trainable gate.
    "s4": {
        **_BASE,
        "scenario": "rugged_landscape",
        "lattice": {"rows": 3, "cols": 3},
        "depths": [4],
        "k_values": [3],
        "init_mode": "near_identity",
        "runs_per_setting": 8,
        "stages": {"pre_iterations": 1000, "main_iterations": 1500},
    },
}


def preset_names() -> list[str]:
    return list(PRESETS)


def preset_config(name: str, overlay: dict | None = None) -> dict:
    """Deep copy of a preset, with top-level overlay entries merged in.

    Overlay dict values merge one level deep into dict-valued preset fields;
    everything else replaces the preset value.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    data = copy.deepcopy(PRESETS[name])
    for key, value in (overlay or {}).items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key].update(value)
        else:
            data[key] = value
    return data
