import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqc1ml import qcore
from dqc1ml.qcore import (
    PAULI_Z,
    InvalidStateError,
    binary_entropy,
    coherence,
    partial_trace,
    purity,
    tensor_product,
    von_neumann_entropy,
)


def kron_loop(a, b):
    """Index-loop Kronecker product."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def rand_c(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestTensorProduct:
    def test_identity(self):
        np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_zz(self):
        np.testing.assert_array_equal(tensor_product(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]))

    def test_matches_index_loop(self, rng):
        a, b = rand_c(rng, (2, 2)), rand_c(rng, (2, 2))
        np.testing.assert_allclose(tensor_product(a, b), kron_loop(a, b), atol=1e-14)

    def test_rectangular_matches_index_loop(self, rng):
        a, b = rand_c(rng, (2, 3)), rand_c(rng, (3, 1))
        np.testing.assert_allclose(tensor_product(a, b), kron_loop(a, b), atol=1e-14)

    def test_associative_and_bilinear(self, rng):
        a, b, c = (rand_c(rng, (2, 2)) for _ in range(3))
        lhs = tensor_product(tensor_product(a, b), c)
        rhs = tensor_product(a, tensor_product(b, c))
        np.testing.assert_allclose(lhs, rhs, atol=1e-13)
        s = 0.7 - 0.2j
        np.testing.assert_allclose(
            tensor_product(s * a + b, c), s * tensor_product(a, c) + tensor_product(b, c), atol=1e-13
        )


class TestPartialTrace:
    def test_product_state(self):
        rho = tensor_product(np.eye(2) / 2, np.eye(4) / 4)
        np.testing.assert_allclose(partial_trace(rho, [2, 4], [0]), np.eye(2) / 2, atol=1e-15)

    @pytest.mark.parametrize("keep", [0, 1])
    def test_bell_state(self, keep):
        bell = qcore.projector((qcore.ket("00") + qcore.ket("11")) / np.sqrt(2))
        np.testing.assert_allclose(partial_trace(bell, [2, 2], [keep]), np.eye(2) / 2, atol=1e-15)

    def test_random_product(self, rng):
        for _ in range(20):
            ra = qcore.random_density_matrix(2, rng)
            rb = qcore.random_density_matrix(4, rng)
            rc = qcore.random_density_matrix(2, rng)
            joint = qcore.tensor_all([ra, rb, rc])
            np.testing.assert_allclose(partial_trace(joint, [2, 4, 2], [0]), ra, atol=1e-12)
            np.testing.assert_allclose(partial_trace(joint, [2, 4, 2], [1]), rb, atol=1e-12)
            np.testing.assert_allclose(
                partial_trace(joint, [2, 4, 2], [0, 2]), tensor_product(ra, rc), atol=1e-12
            )

    def test_trace_preserved(self, rng):
        rho = qcore.random_density_matrix(8, rng)
        red = partial_trace(rho, [2, 2, 2], [1])
        assert np.trace(red) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4) / 4, [2, 3], [0])

    def test_empty_keep(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4) / 4, [2, 2], [])


class TestEntropies:
    def test_pure_state(self):
        assert von_neumann_entropy(qcore.projector(qcore.ket("0"))) == 0.0

    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)

    def test_diag(self):
        # H2(1/4) evaluated by hand: 0.5 + 0.75*log2(4/3)
        expected = 0.25 * 2 + 0.75 * np.log2(4 / 3)
        assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.811278, abs=1e-6)

    @pytest.mark.parametrize("x,expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.25, 0.8112781244591328)])
    def test_binary_entropy(self, x, expected):
        assert binary_entropy(x) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("x", [-0.01, 1.01])
    def test_binary_entropy_domain(self, x):
        with pytest.raises(ValueError):
            binary_entropy(x)

    def test_unitary_invariance(self, rng):
        for _ in range(10):
            rho = qcore.random_density_matrix(4, rng)
            u = qcore.random_unitary(4, rng)
            assert von_neumann_entropy(u @ rho @ u.conj().T) == pytest.approx(
                von_neumann_entropy(rho), abs=1e-9
            )

    def test_bounds(self, rng):
        for d in (2, 4, 8):
            s = von_neumann_entropy(qcore.random_density_matrix(d, rng))
            assert 0.0 <= s <= np.log2(d) + 1e-12

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(InvalidStateError):
            von_neumann_entropy(np.diag([1.1, -0.1]))

    def test_tiny_negative_eigenvalue_clamped(self):
        assert von_neumann_entropy(np.diag([1.0 + 5e-11, -5e-11])) == pytest.approx(0.0, abs=1e-8)


class TestPurity:
    def test_maximally_mixed(self):
        assert purity(np.eye(4) / 4) == pytest.approx(0.25)

    def test_pure(self, rng):
        v = rand_c(rng, 4)
        assert purity(qcore.projector(v / np.linalg.norm(v))) == pytest.approx(1.0)

    def test_diag(self):
        assert purity(np.diag([0.75, 0.25])) == pytest.approx(9 / 16 + 1 / 16)

    def test_range(self, rng):
        for d in (2, 4, 8):
            p = purity(qcore.random_density_matrix(d, rng))
            assert 1 / d - 1e-12 <= p <= 1 + 1e-12


class TestCoherence:
    def test_diagonal_zero(self):
        assert coherence(np.diag([0.3, 0.7])) == 0.0

    def test_plus_state(self):
        plus = qcore.projector((qcore.ket("0") + qcore.ket("1")) / np.sqrt(2))
        assert coherence(plus) == pytest.approx(1.0, abs=1e-12)

    def test_dqc1_output_state(self):
        # alpha = 1, |K| = 0.5: S(diag) = 1, S(rho) = H2(0.25)
        rho = 0.5 * np.array([[1, 0.5], [0.5, 1]])
        assert coherence(rho) == pytest.approx(0.18872187554086717, abs=1e-12)

    def test_nonnegative(self, rng):
        for d in (2, 4):
            assert coherence(qcore.random_density_matrix(d, rng)) >= 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8))
    def test_vanishes_on_diagonal_states(self, weights):
        w = np.asarray(weights)
        if w.sum() == 0:
            return
        assert coherence(np.diag(w / w.sum())) == pytest.approx(0.0, abs=1e-12)


class TestValidation:
    def test_check_density_matrix(self):
        qcore.check_density_matrix(np.eye(2) / 2)
        with pytest.raises(InvalidStateError):
            qcore.check_density_matrix(np.eye(2))
        with pytest.raises(InvalidStateError):
            qcore.check_density_matrix(np.array([[0.5, 1], [0, 0.5]]))

    def test_check_unitary(self, rng):
        qcore.check_unitary(qcore.random_unitary(4, rng))
        with pytest.raises(qcore.NotUnitaryError):
            qcore.check_unitary(2 * np.eye(2))

    def test_num_qubits(self):
        assert qcore.num_qubits(8) == 3
        with pytest.raises(ValueError):
            qcore.num_qubits(6)
