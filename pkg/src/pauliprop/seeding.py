"""Deterministic seed derivation and RNG construction.

Every random draw in the toolkit flows through a numpy PCG64 generator whose
seed is derived with a splitmix64 fold over integer coordinates such as
(master_seed, role, setting_index, run_index). The scheme is recorded in run
manifests so draws are reproducible across processes and thread counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "make_rng", "RNG_DESCRIPTION", "ROLE_RUN", "ROLE_PHI", "ROLE_RESAMPLE"]

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# Role constants keep the derivation streams for different purposes disjoint.
ROLE_RUN = 0
ROLE_PHI = 1
ROLE_RESAMPLE = 2

RNG_DESCRIPTION = {
    "algorithm": "numpy PCG64",
    "seed_derivation": "splitmix64 fold over (master_seed, role, setting_index, run_index)",
}


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integer coordinates into a 64-bit seed (splitmix64 mixing)."""
    state = 0
    for part in parts:
        state = (state + _GAMMA) & _MASK
        state = _mix(state ^ (int(part) & _MASK))
    return state


def make_rng(*parts: int) -> np.random.Generator:
    """PCG64 generator seeded from `derive_seed(*parts)`."""
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))
