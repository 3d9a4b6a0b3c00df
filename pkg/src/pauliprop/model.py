"""Lattices, Hamiltonians, ansatz circuits, and the initial-state spec.

The physical setting is an open-boundary m x n square lattice with an XYZ
Heisenberg Hamiltonian on nearest-neighbor bonds. Circuits interleave XX, YY
and ZZ two-qubit rotations over the bond list; the initial state is a product
of singlets on horizontally paired qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import DimensionError
from .pauli import PauliString, PauliSum

__all__ = [
    "Lattice",
    "Gate",
    "Circuit",
    "InitStateSpec",
    "build_hamiltonian",
    "build_ansatz",
    "build_rugged_ansatz",
    "build_singlet_pairing",
    "two_site_string",
    "circuit_dump",
]


@dataclass(frozen=True)
class Lattice:
    """Open-boundary rows x cols square lattice, row-major qubit indexing."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"lattice dimensions must be >= 1, got {self.rows}x{self.cols}")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols

    def index(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"site ({row},{col}) outside {self.rows}x{self.cols} lattice")
        return row * self.cols + col

    @cached_property
    def bonds(self) -> tuple[tuple[int, int], ...]:
        """Nearest-neighbor bonds (j, k) with j < k.

        Order is deterministic: all horizontal bonds row by row, then all
        vertical bonds row by row. Count = rows*(cols-1) + (rows-1)*cols.
        """
        out: list[tuple[int, int]] = []
        for r in range(self.rows):
            for c in range(self.cols - 1):
                out.append((self.index(r, c), self.index(r, c + 1)))
        for r in range(self.rows - 1):
            for c in range(self.cols):
                out.append((self.index(r, c), self.index(r + 1, c)))
        return tuple(out)


def two_site_string(num_qubits: int, axis: str, i: int, j: int) -> PauliString:
    """Weight-2 string with the same letter (X, Y or Z) at qubits i and j."""
    if i == j:
        raise ValueError("two_site_string needs distinct qubits")
    return PauliString.from_sites(num_qubits, {i: axis, j: axis})


@dataclass(frozen=True)
class Gate:
    """One Pauli rotation exp(-i * angle * G).

    Trainable gates read their angle from the parameter vector via
    `param_id`; fixed gates carry a frozen `angle`.
    """

    kind: Literal["trainable", "fixed"]
    generator: PauliString
    param_id: int | None = None
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "trainable":
            if self.param_id is None or self.angle is not None:
                raise ValueError("trainable gate needs param_id and no fixed angle")
        elif self.kind == "fixed":
            if self.angle is None or self.param_id is not None:
                raise ValueError("fixed gate needs angle and no param_id")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


@dataclass(frozen=True)
class Circuit:
    """Ordered rotation list; list order is application order on the state."""

    num_qubits: int
    gates: tuple[Gate, ...]
    param_count: int

    def __post_init__(self) -> None:
        ids = sorted(g.param_id for g in self.gates if g.kind == "trainable")
        if ids != list(range(self.param_count)):
            raise ValueError("param_ids must be 0..param_count-1, each used exactly once")
        for g in self.gates:
            if g.generator.num_qubits != self.num_qubits:
                raise DimensionError("gate generator qubit count differs from circuit")

    def gate_angles(self, params: np.ndarray) -> np.ndarray:
        """Effective angle per gate, resolving trainable gates through params."""
        if len(params) != self.param_count:
            raise DimensionError(
                f"expected {self.param_count} parameters, got {len(params)}"
            )
        return np.array(
            [params[g.param_id] if g.kind == "trainable" else g.angle for g in self.gates],
            dtype=float,
        )


@dataclass(frozen=True)
class InitStateSpec:
    """Singlet pairs plus |0> fillers; pairs/unpaired partition the qubits."""

    num_qubits: int
    pairs: tuple[tuple[int, int], ...]
    unpaired: tuple[int, ...]

    def __post_init__(self) -> None:
        seen = [q for pair in self.pairs for q in pair] + list(self.unpaired)
        if sorted(seen) != list(range(self.num_qubits)):
            raise ValueError("pairs and unpaired must partition 0..num_qubits-1")


def build_hamiltonian(lat: Lattice, jx: float, jy: float, jz: float) -> PauliSum:
    """XYZ Heisenberg Hamiltonian: sum over bonds of Jx XX + Jy YY + Jz ZZ.

    Terms with a zero coupling are omitted, so the term count is (number of
    nonzero couplings) * bond count.
    """
    n = lat.num_qubits
    h = PauliSum(n)
    for i, j in lat.bonds:
        for axis, coupling in (("X", jx), ("Y", jy), ("Z", jz)):
            if coupling != 0.0:
                h.add_term(two_site_string(n, axis, i, j), coupling, 0.0)
    return h


def _ansatz_gates(lat: Lattice, depth: int, after_each=None) -> list[Gate]:
    # One depth block = all XX bond rotations, then all YY, then all ZZ;
    # bonds follow the lattice bond order. `after_each(gate)` may append
    # extra fixed gates (rugged variant).
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    n = lat.num_qubits
    gates: list[Gate] = []
    pid = 0
    for _ in range(depth):
        for axis in ("X", "Y", "Z"):
            for i, j in lat.bonds:
                gate = Gate("trainable", two_site_string(n, axis, i, j), param_id=pid)
                pid += 1
                gates.append(gate)
                if after_each is not None:
                    gates.append(after_each(gate))
    return gates


def build_ansatz(lat: Lattice, depth: int) -> Circuit:
    """Trainable-only ansatz with depth * 3 * bond_count gates/parameters."""
    gates = _ansatz_gates(lat, depth)
    return Circuit(lat.num_qubits, tuple(gates), param_count=len(gates))


def build_rugged_ansatz(lat: Lattice, depth: int, seed: int) -> Circuit:
    """Ansatz variant with a fixed random-angle twin after every trainable gate.

    Each trainable rotation is followed by a fixed rotation with the same
    generator and an angle drawn once, at build time, from uniform[-pi, pi)
    using the seeded stream; the draw order is the gate order.
    """
    rng = np.random.Generator(np.random.PCG64(seed))

    def fixed_twin(gate: Gate) -> Gate:
        return Gate("fixed", gate.generator, angle=float(rng.uniform(-np.pi, np.pi)))

    gates = _ansatz_gates(lat, depth, after_each=fixed_twin)
    return Circuit(lat.num_qubits, tuple(gates), param_count=len(gates) // 2)


def build_singlet_pairing(lat: Lattice) -> InitStateSpec:
    """Pair adjacent columns within each row; odd column counts leave the
    last qubit of each row unpaired in |0>."""
    pairs: list[tuple[int, int]] = []
    unpaired: list[int] = []
    for r in range(lat.rows):
        for c in range(0, lat.cols - 1, 2):
            pairs.append((lat.index(r, c), lat.index(r, c + 1)))
        if lat.cols % 2 == 1:
            unpaired.append(lat.index(r, lat.cols - 1))
    return InitStateSpec(lat.num_qubits, tuple(pairs), tuple(unpaired))


def circuit_dump(circuit: Circuit) -> str:
    """Debug dump: one gate per line as `kind generator param_id|angle`."""
    lines = []
    for g in circuit.gates:
        tail = f"param_id={g.param_id}" if g.kind == "trainable" else f"angle={g.angle!r}"
        lines.append(f"{g.kind} {g.generator.letters} {tail}")
    return "\n".join(lines)
