"""Pauli algebra against an independent dense-matrix oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliprop import ContractViolationError, DimensionError, PauliString, PauliSum, branch_product

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense(p: PauliString) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for letter in p.letters:
        out = np.kron(out, MATS[letter])
    return out


letters2 = st.text(alphabet="IXYZ", min_size=2, max_size=2)
letters_n = st.text(alphabet="IXYZ", min_size=1, max_size=5)


class TestPauliString:
    def test_text_round_trip(self):
        p = PauliString.from_text("XIZY")
        assert p.letters == "XIZY"
        assert p.num_qubits == 4

    def test_from_sites(self):
        p = PauliString.from_sites(4, {0: "X", 2: "Z", 3: "Y"})
        assert p.letters == "XIZY"
        assert p == PauliString.from_text("XIZY")

    def test_identity(self):
        p = PauliString.identity(3)
        assert p.letters == "III"
        assert p.weight() == 0

    def test_weight_and_support(self):
        p = PauliString.from_text("XIZY")
        assert p.weight() == 3
        assert p.support() == (0, 2, 3)

    def test_rejects_bad_letter(self):
        with pytest.raises(ValueError):
            PauliString.from_text("XQ")

    def test_commutes_basics(self):
        x = PauliString.from_text("X")
        z = PauliString.from_text("Z")
        assert not x.commutes(z)
        assert PauliString.from_text("XX").commutes(PauliString.from_text("YY"))
        assert PauliString.from_text("XI").commutes(PauliString.from_text("IZ"))

    def test_commutes_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            PauliString.from_text("X").commutes(PauliString.from_text("XX"))

    @given(letters_n, st.data())
    @settings(max_examples=60, deadline=None)
    def test_commutes_matches_dense(self, a, data):
        b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
        p, g = PauliString.from_text(a), PauliString.from_text(b)
        pm, gm = dense(p), dense(g)
        assert p.commutes(g) == np.allclose(pm @ gm, gm @ pm)


class TestBranchProduct:
    def test_single_qubit_example(self):
        sign, prime = branch_product(PauliString.from_text("X"), PauliString.from_text("Z"))
        assert sign == -1
        assert prime.letters == "Y"

    def test_two_qubit_examples(self):
        sign, prime = branch_product(PauliString.from_text("ZZ"), PauliString.from_text("XI"))
        assert (sign, prime.letters) == (1, "YZ")
        sign, prime = branch_product(PauliString.from_text("ZI"), PauliString.from_text("XX"))
        assert (sign, prime.letters) == (1, "YX")

    def test_commuting_pair_rejected(self):
        with pytest.raises(ContractViolationError):
            branch_product(PauliString.from_text("XX"), PauliString.from_text("YY"))

    def test_exhaustive_two_qubit_oracle(self):
        # sign * P' must equal iGP as matrices, for every anticommuting pair.
        strings = [PauliString.from_text(a + b) for a in "IXYZ" for b in "IXYZ"]
        checked = 0
        for p in strings:
            for g in strings:
                if p.commutes(g):
                    continue
                sign, prime = branch_product(p, g)
                expected = 1j * dense(g) @ dense(p)
                assert np.allclose(sign * dense(prime), expected), (p.letters, g.letters)
                checked += 1
        assert checked == 120

    @given(letters_n, st.data())
    @settings(max_examples=60, deadline=None)
    def test_involution(self, a, data):
        b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
        p, g = PauliString.from_text(a), PauliString.from_text(b)
        if p.commutes(g):
            return
        sign, prime = branch_product(p, g)
        back_sign, back = branch_product(prime, g)
        assert back == p
        assert back_sign == -sign

    @given(letters_n, st.data())
    @settings(max_examples=40, deadline=None)
    def test_weight_sum_permutation_invariant(self, a, data):
        b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
        p, g = PauliString.from_text(a), PauliString.from_text(b)
        if p.commutes(g):
            return
        total = p.weight() + branch_product(p, g)[1].weight()
        perm = data.draw(st.permutations(range(len(a))))
        pa = PauliString.from_text("".join(a[i] for i in perm))
        pb = PauliString.from_text("".join(b[i] for i in perm))
        assert pa.weight() + branch_product(pa, pb)[1].weight() == total


class TestPauliSum:
    def test_add_and_merge(self):
        s = PauliSum(2)
        p = PauliString.from_text("XZ")
        s.add_term(p, 0.5)
        s.add_term(p, 0.25)
        assert s.coefficient(p) == 0.75
        assert len(s) == 1

    def test_cancellation_removes_term(self):
        s = PauliSum(1)
        p = PauliString.from_text("X")
        s.add_term(p, 1.0)
        s.add_term(p, -1.0)
        assert len(s) == 0
        assert s.coefficient(p) == 0.0

    def test_max_weight_and_norm(self):
        s = PauliSum(3)
        s.add_term(PauliString.from_text("XII"), 3.0)
        s.add_term(PauliString.from_text("XYZ"), 4.0)
        assert s.max_weight() == 3
        assert s.squared_norm() == pytest.approx(25.0)

    def test_text_round_trip(self):
        s = PauliSum(2)
        s.add_term(PauliString.from_text("XZ"), -0.125)
        s.add_term(PauliString.from_text("IY"), 2.0)
        again = PauliSum.from_text(s.to_text())
        assert again == s

    def test_dimension_mismatch(self):
        s = PauliSum(2)
        with pytest.raises(DimensionError):
            s.add_term(PauliString.from_text("X"), 1.0)
