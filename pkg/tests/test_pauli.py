import itertools

import numpy as np
import pytest

from vqescan.pauli import PauliString, PauliSum, commutes, multiply

LETTERS = "IXYZ"


def random_string(rng, n):
    return PauliString.from_letters("".join(rng.choice(list(LETTERS), size=n)))


class TestPauliString:
    def test_letters_roundtrip(self):
        s = PauliString.from_letters("IXYZ")
        assert s.letters == "IXYZ"
        assert s.letter(0) == "I" and s.letter(3) == "Z"
        assert s.weight == 3

    def test_label(self):
        assert PauliString.from_letters("XIZ").label() == "X0 Z2"
        assert PauliString.identity(3).label() == "I"

    def test_qubit_zero_is_least_significant(self):
        # Z on qubit 0 of two qubits: diag over indices 0..3 by bit 0
        mat = PauliString.from_letters("ZI").matrix()
        assert np.allclose(np.diag(mat), [1, -1, 1, -1])

    def test_single_qubit_matrices(self):
        assert np.allclose(PauliString.from_letters("Z").matrix(), np.diag([1, -1]))
        y = PauliString.from_letters("Y").matrix()
        assert np.allclose(y, np.array([[0, -1j], [1j, 0]]))

    def test_bit_pattern_bounds(self):
        with pytest.raises(ValueError):
            PauliString(2, x_bits=4)


class TestMultiply:
    def test_involution(self):
        x = PauliString.from_letters("X")
        phase, result = multiply(x, x)
        assert phase == 1 and result.is_identity

    def test_xy_gives_iz(self):
        phase, result = multiply(PauliString.from_letters("X"),
                                 PauliString.from_letters("Y"))
        assert phase == 1j and result.letters == "Z"

    def test_exhaustive_small_against_matrices(self):
        for n in (1, 2, 3):
            strings = ["".join(p) for p in itertools.product(LETTERS, repeat=n)]
            for s1 in strings:
                for s2 in strings:
                    a, b = PauliString.from_letters(s1), PauliString.from_letters(s2)
                    phase, c = multiply(a, b)
                    assert np.max(np.abs(phase * c.matrix() - a.matrix() @ b.matrix())) \
                        < 1e-12

    def test_random_eight_qubits_against_matrices(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            a, b = random_string(rng, 8), random_string(rng, 8)
            phase, c = multiply(a, b)
            assert np.max(np.abs(phase * c.matrix() - a.matrix() @ b.matrix())) \
                < 1e-12

    def test_random_eight_qubits_associative(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b, c = (random_string(rng, 8) for _ in range(3))
            p1, ab = multiply(a, b)
            p2, ab_c = multiply(ab, c)
            q1, bc = multiply(b, c)
            q2, a_bc = multiply(a, bc)
            assert ab_c == a_bc
            assert p1 * p2 == q1 * q2

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            multiply(PauliString.identity(2), PauliString.identity(3))


class TestCommutes:
    def test_identity_commutes_with_all(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            s = random_string(rng, 5)
            assert commutes(s, PauliString.identity(5))

    def test_x_z_anticommute(self):
        assert not commutes(PauliString.from_letters("X"), PauliString.from_letters("Z"))

    def test_xx_zz_commute(self):
        a = PauliString.from_letters("XX")
        b = PauliString.from_letters("ZZ")
        assert commutes(a, b)
        comm = a.matrix() @ b.matrix() - b.matrix() @ a.matrix()
        assert np.max(np.abs(comm)) == 0

    def test_random_against_matrix_commutator(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a, b = random_string(rng, 4), random_string(rng, 4)
            comm = a.matrix() @ b.matrix() - b.matrix() @ a.matrix()
            assert commutes(a, b) == (np.max(np.abs(comm)) < 1e-12)


class TestPauliSum:
    def test_scaled_identity_matrix(self):
        assert np.allclose(PauliSum.identity(1, 0.5).matrix(), 0.5 * np.eye(2))

    def test_xx_plus_zz_spectrum(self):
        obs = PauliSum(2, {PauliString.from_letters("XX"): 1.0,
                           PauliString.from_letters("ZZ"): 1.0})
        eig = np.linalg.eigvalsh(obs.matrix())
        assert np.allclose(eig, [-2.0, 0.0, 0.0, 2.0], atol=1e-12)

    def test_addition_matches_matrix_sum(self):
        rng = np.random.default_rng(3)
        a = PauliSum(3, {random_string(rng, 3): complex(rng.normal())
                         for _ in range(5)})
        b = PauliSum(3, {random_string(rng, 3): complex(rng.normal())
                         for _ in range(5)})
        assert np.max(np.abs((a + b).matrix() - (a.matrix() + b.matrix()))) < 1e-12

    def test_product_matches_matrix_product(self):
        rng = np.random.default_rng(4)
        a = PauliSum(3, {random_string(rng, 3): complex(rng.normal(), rng.normal())
                         for _ in range(4)})
        b = PauliSum(3, {random_string(rng, 3): complex(rng.normal(), rng.normal())
                         for _ in range(4)})
        assert np.max(np.abs((a @ b).matrix() - a.matrix() @ b.matrix())) < 1e-12

    def test_zero_terms_pruned(self):
        s = PauliString.from_letters("X")
        total = PauliSum(1, {s: 1.0}) + PauliSum(1, {s: -1.0})
        assert len(total) == 0

    def test_hermitian_flag_and_matrix(self):
        rng = np.random.default_rng(5)
        terms = {random_string(rng, 3): float(rng.normal()) for _ in range(6)}
        obs = PauliSum(3, terms)
        assert obs.is_hermitian()
        mat = obs.matrix()
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
        assert not PauliSum(1, {PauliString.from_letters("X"): 1j}).is_hermitian()

    def test_matrix_size_cap(self):
        with pytest.raises(ValueError, match="12"):
            PauliSum.identity(13).matrix()

    def test_format(self):
        obs = PauliSum(4, {PauliString.from_letters("IXIY"): -0.5,
                           PauliString.identity(4): 1.25})
        text = obs.format()
        assert "1.25 * I" in text
        assert "-0.5 * X1 Y3" in text

    def test_json_roundtrip(self):
        rng = np.random.default_rng(6)
        obs = PauliSum(4, {random_string(rng, 4): complex(rng.normal(), rng.normal())
                           for _ in range(6)})
        again = PauliSum.from_json(obs.to_json())
        assert again == obs
