"""Exact statevector engine: simulation, gradients, ground-state energies.

Amplitude indexing puts qubit 0 at the most significant bit, matching the
qubit-0-leftmost text convention of PauliString. Gate application works on
amplitude index sets selected by the generator's support; no gate matrix is
ever materialized.
"""

from __future__ import annotations

from itertools import product

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionError, RunError
from .model import Circuit, InitStateSpec
from .pauli import PauliString, PauliSum

__all__ = [
    "StateVector",
    "prepare_init",
    "apply_rotation",
    "expectation",
    "exact_energy",
    "exact_energy_and_gradient",
    "ground_state_energy",
    "dense_ground_state_energy",
    "build_dense",
]

_IMAG_TOL = 1e-10

# Cached index grids, keyed by qubit count.
_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(num_qubits: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(num_qubits)
    if idx is None:
        idx = np.arange(1 << num_qubits, dtype=np.int64)
        _INDEX_CACHE[num_qubits] = idx
    return idx


class StateVector:
    """2^n complex amplitudes; qubit 0 is the most significant index bit."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None) -> None:
        if num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
        dim = 1 << num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(dim, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (dim,):
                raise DimensionError(f"expected {dim} amplitudes, got {amplitudes.shape}")
        self.num_qubits = num_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _pauli_masks(p: PauliString) -> tuple[int, int, int]:
    """(flip_mask, sign_mask, y_count) for applying p to amplitude indices.

    (P psi)[j] = (-i)^y_count * (-1)^parity(j & sign_mask) * psi[j ^ flip_mask]
    where flip_mask covers X/Y sites and sign_mask covers Y/Z sites.
    """
    n = p.num_qubits
    flip = sign = ycount = 0
    for q in p.support():
        bit = 1 << (n - 1 - q)
        code = p.letter_at(q)
        if code == "X":
            flip |= bit
        elif code == "Y":
            flip |= bit
            sign |= bit
            ycount += 1
        else:  # Z
            sign |= bit
    return flip, sign, ycount


def _apply_pauli(amps: np.ndarray, p: PauliString) -> np.ndarray:
    """Return P * amps as a new array."""
    flip, sign, ycount = _pauli_masks(p)
    idx = _indices(p.num_qubits)
    src = amps[idx ^ flip] if flip else amps.copy()
    if sign:
        parity = np.bitwise_count(idx & sign).astype(np.int64) & 1
        src *= 1.0 - 2.0 * parity
    phase = (-1j) ** (ycount & 3)
    if phase != 1:
        src *= phase
    return src


def _apply_sum(amps: np.ndarray, h: PauliSum) -> np.ndarray:
    """Return H * amps, accumulating terms in canonical order."""
    out = np.zeros_like(amps)
    for p, c in h.sorted_items():
        out += c * _apply_pauli(amps, p)
    return out


def prepare_init(init: InitStateSpec) -> StateVector:
    """Product state of singlets (|01>-|10>)/sqrt(2) on pairs, |0> elsewhere."""
    n = init.num_qubits
    amps = np.zeros(1 << n, dtype=np.complex128)
    scale = (1.0 / np.sqrt(2.0)) ** len(init.pairs)
    # Each pair contributes |01> with +, |10> with -; unpaired qubits stay 0.
    for choices in product((0, 1), repeat=len(init.pairs)):
        index = 0
        parity = 0
        for (a, b), hi_first in zip(init.pairs, choices):
            parity ^= hi_first
            one_at = a if hi_first else b
            index |= 1 << (n - 1 - one_at)
        amps[index] = -scale if parity else scale
    return StateVector(n, amps)


def apply_rotation(state: StateVector, generator: PauliString, angle: float) -> StateVector:
    """In-place update state <- exp(-i*angle*G) state = cos(a)*state - i*sin(a)*(G state)."""
    if generator.num_qubits != state.num_qubits:
        raise DimensionError("generator qubit count differs from state")
    gpsi = _apply_pauli(state.amplitudes, generator)
    np.multiply(state.amplitudes, np.cos(angle), out=state.amplitudes)
    state.amplitudes += (-1j * np.sin(angle)) * gpsi
    return state


def expectation(state: StateVector, h: PauliSum) -> float:
    """<psi|H|psi>; asserts the imaginary residue is below 1e-10, then drops it."""
    if h.num_qubits != state.num_qubits:
        raise DimensionError("observable qubit count differs from state")
    value = np.vdot(state.amplitudes, _apply_sum(state.amplitudes, h))
    if abs(value.imag) > _IMAG_TOL:
        raise RunError(f"expectation imaginary residue {value.imag:.3e} exceeds {_IMAG_TOL}")
    return float(value.real)


def _evolve(circuit: Circuit, params: np.ndarray, init: InitStateSpec) -> StateVector:
    state = prepare_init(init)
    for gate, angle in zip(circuit.gates, circuit.gate_angles(params)):
        apply_rotation(state, gate.generator, angle)
    return state


def exact_energy(circuit: Circuit, params: np.ndarray, h: PauliSum, init: InitStateSpec) -> float:
    return expectation(_evolve(circuit, params, init), h)


def exact_energy_and_gradient(
    circuit: Circuit, params: np.ndarray, h: PauliSum, init: InitStateSpec
) -> tuple[float, np.ndarray]:
    """Energy plus full gradient from one forward and one reverse sweep.

    Forward evolves |psi>, then lambda = H|psi| is dragged backward together
    with |psi| by un-applying each gate; the component for a trainable gate
    with generator G is 2*Re(<lambda|(-iG)|psi>) evaluated just after that
    gate's position.
    """
    params = np.asarray(params, dtype=float)
    state = _evolve(circuit, params, init)
    psi = state.amplitudes
    lam = _apply_sum(psi, h)
    value = np.vdot(psi, lam)
    if abs(value.imag) > _IMAG_TOL:
        raise RunError(f"energy imaginary residue {value.imag:.3e} exceeds {_IMAG_TOL}")
    grad = np.zeros(circuit.param_count, dtype=float)
    angles = circuit.gate_angles(params)
    for gate, angle in zip(reversed(circuit.gates), angles[::-1]):
        gpsi = _apply_pauli(psi, gate.generator)
        if gate.kind == "trainable":
            # 2*Re(<lam|(-iG)|psi>) = 2*Im(<lam|G|psi>)
            grad[gate.param_id] = 2.0 * np.vdot(lam, gpsi).imag
        # Un-apply exp(-i*angle*G) from both vectors, reusing G|psi>.
        cos_a, sin_a = np.cos(angle), np.sin(angle)
        psi = cos_a * psi + 1j * sin_a * gpsi
        glam = _apply_pauli(lam, gate.generator)
        lam = cos_a * lam + 1j * sin_a * glam
    return float(value.real), grad


def build_dense(h: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of h (cross-check path, n <= 12)."""
    n = h.num_qubits
    if n > 12:
        raise RunError(f"dense path limited to 12 qubits, got {n}")
    dim = 1 << n
    idx = _indices(n)
    out = np.zeros((dim, dim), dtype=np.complex128)
    for p, c in h.sorted_items():
        flip, sign, ycount = _pauli_masks(p)
        coeff = c * (-1j) ** (ycount & 3) * np.ones(dim, dtype=np.complex128)
        if sign:
            parity = np.bitwise_count(idx & sign).astype(np.int64) & 1
            coeff *= 1.0 - 2.0 * parity
        out[idx, idx ^ flip] += coeff
    return out


def dense_ground_state_energy(h: PauliSum) -> float:
    return float(np.linalg.eigvalsh(build_dense(h))[0])


def ground_state_energy(
    h: PauliSum,
    num_qubits: int | None = None,
    *,
    seed: int = 2024,
    max_iterations: int = 500,
    ritz_tol: float = 1e-10,
) -> float:
    """Lowest eigenvalue of h via matrix-free Lanczos.

    Full reorthogonalization against all stored Lanczos vectors; converged
    when the smallest Ritz value moves by less than `ritz_tol` between
    iterations, or when the Krylov space is exhausted. Exceeding
    `max_iterations` raises ConvergenceError rather than returning a
    possibly-wrong value.
    """
    n = h.num_qubits
    if num_qubits is not None and num_qubits != n:
        raise DimensionError(f"num_qubits {num_qubits} differs from Hamiltonian ({n})")
    dim = 1 << n
    budget = min(max_iterations, dim)
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)

    basis = np.empty((min(budget, 64) + 1, dim), dtype=np.complex128)
    basis[0] = v
    alphas: list[float] = []
    betas: list[float] = []
    previous = np.inf
    for j in range(budget):
        if j + 1 >= basis.shape[0]:  # grow storage in blocks
            basis = np.concatenate(
                [basis, np.empty((min(64, budget + 1 - basis.shape[0]), dim), basis.dtype)]
            )
        w = _apply_sum(basis[j], h)
        alphas.append(float(np.vdot(basis[j], w).real))
        # Full reorthogonalization, applied twice for numerical safety; this
        # also covers the usual alpha/beta three-term subtraction.
        active = basis[: j + 1]
        w -= active.T @ (active.conj() @ w)
        w -= active.T @ (active.conj() @ w)
        beta = float(np.linalg.norm(w))
        ritz = float(
            scipy.linalg.eigh_tridiagonal(
                alphas, betas, select="i", select_range=(0, 0), eigvals_only=True
            )[0]
        )
        if abs(ritz - previous) < ritz_tol:
            return ritz
        previous = ritz
        if beta < 1e-12 * max(1.0, abs(alphas[-1])):
            return ritz  # Krylov space exhausted: exact within this subspace
        betas.append(beta)
        basis[j + 1] = w / beta
    raise ConvergenceError(
        f"Lanczos did not converge within {budget} iterations (last Ritz {previous!r})"
    )
