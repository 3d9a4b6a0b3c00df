"""Symbolic algebra on n-qubit Pauli strings and real-weighted sums of them.

A Pauli string is stored in symplectic form: two bits per qubit, the x-bit
flagging an X component and the z-bit flagging a Z component (Y sets both).
All signs produced by products of Hermitian strings with real-coefficient
rotations stay in {+1, -1}, so sums carry plain real coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ContractViolationError, DimensionError

__all__ = [
    "PauliString",
    "PauliSum",
    "branch_product",
]

# Letter codes: index = x_bit | (z_bit << 1).
_CODE_I, _CODE_X, _CODE_Z, _CODE_Y = 0, 1, 2, 3
_CHAR_BY_CODE = ("I", "X", "Z", "Y")
_CODE_BY_CHAR = {"I": _CODE_I, "X": _CODE_X, "Z": _CODE_Z, "Y": _CODE_Y}

# _PROD_IPOW[g][p] = exponent e with (single-qubit) G*P = i^e * (G xor P).
# Rows/cols indexed by letter code; derived from XY=iZ, YZ=iX, ZX=iY.
_PROD_IPOW = (
    (0, 0, 0, 0),  # g = I
    (0, 0, 3, 1),  # g = X
    (0, 1, 0, 3),  # g = Z
    (0, 3, 1, 0),  # g = Y
)


@dataclass(frozen=True, slots=True)
class PauliString:
    """An n-qubit Pauli word, phase-free and Hermitian.

    Attributes
    ----------
    num_qubits : int
        Number of tensor factors.
    key : int
        Packed symplectic encoding; qubit q occupies bits (2q, 2q+1)
        as (x, z). The identity is key 0.
    """

    num_qubits: int
    key: int

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        if not 0 <= self.key < (1 << (2 * self.num_qubits)):
            raise ValueError(f"key {self.key} out of range for {self.num_qubits} qubits")

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits, 0)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse a string of characters from "IXYZ", qubit 0 leftmost."""
        if not text:
            raise ValueError("empty Pauli text")
        key = 0
        for q, ch in enumerate(text):
            code = _CODE_BY_CHAR.get(ch)
            if code is None:
                raise ValueError(f"invalid Pauli letter {ch!r} in {text!r}")
            key |= code << (2 * q)
        return cls(len(text), key)

    @classmethod
    def from_sites(cls, num_qubits: int, sites: dict[int, str]) -> "PauliString":
        """Build a string that is identity everywhere except at `sites`.

        `sites` maps qubit index to a letter in "XYZ".
        """
        key = 0
        for q, ch in sites.items():
            if not 0 <= q < num_qubits:
                raise ValueError(f"qubit {q} out of range for {num_qubits} qubits")
            code = _CODE_BY_CHAR.get(ch)
            if code in (None, _CODE_I):
                raise ValueError(f"site letter must be one of X, Y, Z, got {ch!r}")
            key |= code << (2 * q)
        return cls(num_qubits, key)

    def code_at(self, qubit: int) -> int:
        return (self.key >> (2 * qubit)) & 3

    def letter_at(self, qubit: int) -> str:
        return _CHAR_BY_CODE[self.code_at(qubit)]

    @property
    def letters(self) -> str:
        """Text form, qubit 0 leftmost."""
        return "".join(_CHAR_BY_CODE[self.code_at(q)] for q in range(self.num_qubits))

    def support(self) -> tuple[int, ...]:
        """Qubits carrying a non-identity letter, ascending."""
        return tuple(q for q in range(self.num_qubits) if self.code_at(q) != _CODE_I)

    def weight(self) -> int:
        """Number of non-identity letters."""
        mask = int("01" * self.num_qubits, 2)  # x-bit positions
        return ((self.key | (self.key >> 1)) & mask).bit_count()

    def commutes(self, other: "PauliString") -> bool:
        """True iff [self, other] = 0 (symplectic-form parity test)."""
        if self.num_qubits != other.num_qubits:
            raise DimensionError(
                f"qubit count mismatch: {self.num_qubits} vs {other.num_qubits}"
            )
        mask = int("01" * self.num_qubits, 2)
        xs, zs = self.key & mask, (self.key >> 1) & mask
        xo, zo = other.key & mask, (other.key >> 1) & mask
        return (((xs & zo) ^ (zs & xo)).bit_count() & 1) == 0

    def __str__(self) -> str:
        return self.letters


def branch_product(p: PauliString, g: PauliString) -> tuple[int, PauliString]:
    """Resolve i[G,P]/2 for an anticommuting pair into (sign, string).

    For anticommuting Hermitian strings i[G,P]/2 = iGP, which is again a
    Hermitian string up to a real sign. Returns (sign, p_prime) with
    sign * p_prime = iGP.

    Raises
    ------
    DimensionError
        If the qubit counts differ.
    ContractViolationError
        If p and g commute (no branch exists).
    """
    if p.commutes(g):
        raise ContractViolationError(f"branch_product needs an anticommuting pair, got {p} and {g}")
    ipow = 1  # the leading i
    for q in g.support():
        ipow += _PROD_IPOW[g.code_at(q)][p.code_at(q)]
    ipow &= 3
    # Hermiticity of iGP for anticommuting G, P forces a real sign.
    if ipow not in (0, 2):
        raise AssertionError(f"non-real phase i^{ipow} from {g} * {p}")
    sign = 1 if ipow == 0 else -1
    return sign, PauliString(p.num_qubits, p.key ^ g.key)


class PauliSum:
    """Sparse real-weighted sum of Pauli strings on a fixed qubit count.

    Terms are merged on insertion; entries whose merged coefficient has
    magnitude <= the insertion epsilon are removed. Iteration follows
    insertion order; `sorted_items` gives a canonical order.
    """

    __slots__ = ("num_qubits", "_terms")

    def __init__(
        self,
        num_qubits: int,
        terms: Iterable[tuple[PauliString, float]] = (),
        *,
        epsilon: float = 1e-12,
    ) -> None:
        if num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
        self.num_qubits = num_qubits
        self._terms: dict[PauliString, float] = {}
        for p, c in terms:
            self.add_term(p, c, epsilon)

    def add_term(self, p: PauliString, c: float, epsilon: float = 1e-12) -> "PauliSum":
        """Merge coefficient c onto string p; drop the entry if it lands within epsilon of 0."""
        if p.num_qubits != self.num_qubits:
            raise DimensionError(
                f"term on {p.num_qubits} qubits added to sum on {self.num_qubits}"
            )
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        # float() keeps stored values plain Python floats even when callers
        # pass numpy scalars, so repr-based serialization stays canonical.
        new = self._terms.get(p, 0.0) + float(c)
        if abs(new) <= epsilon:
            self._terms.pop(p, None)
        else:
            self._terms[p] = new
        return self

    def coefficient(self, p: PauliString) -> float:
        return self._terms.get(p, 0.0)

    def items(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self._terms.items())

    def sorted_items(self) -> list[tuple[PauliString, float]]:
        """Terms sorted by packed key (canonical, deterministic)."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].key)

    def max_weight(self) -> int:
        return max((p.weight() for p in self._terms), default=0)

    def squared_norm(self) -> float:
        return sum(c * c for c in self._terms.values())

    def copy(self) -> "PauliSum":
        out = PauliSum(self.num_qubits)
        out._terms = dict(self._terms)
        return out

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, p: PauliString) -> bool:
        return p in self._terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        return f"PauliSum(num_qubits={self.num_qubits}, terms={len(self._terms)})"

    def to_text(self) -> str:
        """One `<coefficient> <string>` line per term, round-trip precision."""
        return "\n".join(f"{c!r} {p.letters}" for p, c in self.sorted_items())

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        """Inverse of `to_text`; blank lines are ignored."""
        entries: list[tuple[PauliString, float]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<coefficient> <string>', got {line!r}")
            entries.append((PauliString.from_text(parts[1]), float(parts[0])))
        if not entries:
            raise ValueError("no terms found")
        n = entries[0][0].num_qubits
        out = cls(n)
        for p, c in entries:
            out.add_term(p, c, 0.0)
        return out
