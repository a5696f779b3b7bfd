import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interlace.core import BORDERED, RANK_ONE, BorderedProblem, TolerancePolicy, spread
from interlace.errors import BoundaryPoint, DegenerateSpectrum, IndexOutOfRange, ShiftNotAboveSpectrum
from interlace.forward import (
    PerturbationDirection,
    abs_map,
    check_slice_identities,
    eigenvalue_derivative,
    eigenvalue_second_derivative_bordered,
    forward,
    forward_bordered,
    forward_rank_one,
    jacobian_F,
    jacobian_G,
    spectral_frame,
)

from conftest import dense_bordered, dense_rank_one, random_spectrum, random_unitary, spectra

R15, R05 = math.sqrt(1.5), math.sqrt(0.5)


def fd_jacobian(f, x, h=None):
    h = h if h is not None else 1e-5 * (1 + np.linalg.norm(x))
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.array(cols).T


class TestForwardExamples:
    def test_rank_one(self):
        assert forward_rank_one([0, 1], [0, 2]).values.tolist() == [0, 5]
        assert forward_rank_one([0, 2], [0, 0]).values.tolist() == [0, 2]
        np.testing.assert_allclose(forward_rank_one([0, 2], [R15, R05]).values, [1, 3], atol=1e-15)

    def test_bordered(self):
        np.testing.assert_allclose(forward_bordered([0], [math.sqrt(2)], 1).values, [-1, 2], atol=1e-15)
        assert forward_bordered([0, 2], [0, 0], 1).values.tolist() == [0, 1, 2]
        assert forward_bordered(BorderedProblem([0], [0], -3)).values.tolist() == [-3, 0]

    def test_dispatch(self):
        assert forward([0, 1], [0, 2]).values.tolist() == [0, 5]
        assert forward([0], [0], -3, BORDERED).values.tolist() == [-3, 0]


class TestBasis:
    @pytest.mark.parametrize("complex_", [False, True])
    def test_general_hermitian(self, rng, complex_):
        for n in (1, 3, 6):
            q = random_unitary(rng, n, complex_)
            lam = random_spectrum(rng, n)
            s = q @ np.diag(lam) @ q.conj().T
            v = rng.standard_normal(n) + (1j * rng.standard_normal(n) if complex_ else 0)
            c = 0.7
            ref = np.linalg.eigvalsh(s + np.outer(v, v.conj()))
            got = forward_rank_one(lam, v, basis=q).values
            assert np.abs(got - ref).max() <= 1e-12 * spread(ref)
            big = np.zeros((n + 1, n + 1), dtype=complex)
            big[:n, :n] = s
            big[:n, n] = v
            big[n, :n] = v.conj()
            big[n, n] = c
            ref = np.linalg.eigvalsh(big)
            got = forward_bordered(lam, v, c, basis=q).values
            assert np.abs(got - ref).max() <= 1e-12 * spread(ref)

    def test_spectral_frame(self, rng):
        q = random_unitary(rng, 4)
        lam = np.array([-1.0, 0.0, 2.0, 5.0])
        got, q2 = spectral_frame(q @ np.diag(lam) @ q.T)
        np.testing.assert_allclose(got.values, lam, atol=1e-13)
        v = rng.standard_normal(4)
        np.testing.assert_allclose(forward_rank_one(got, v, basis=q2).values,
                                   dense_rank_one(lam, q.T @ v), atol=1e-12)


class TestAbsMap:
    def test_examples(self):
        assert abs_map([-3, 4]).p.tolist() == [3, 4]
        assert abs_map([3j, -4]).p.tolist() == [3, 4]

    def test_basis_coordinates(self, rng):
        q = random_unitary(rng, 2, complex_=True)
        np.testing.assert_allclose(abs_map(q @ np.array([1.0, 2.0]), q).p, [1, 2], atol=1e-14)

    @given(spectra(1, 6), st.data())
    def test_forward_depends_on_moduli_only(self, lam, data):
        n = lam.size
        re = data.draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
        im = data.draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
        v = np.array(re) + 1j * np.array(im)
        a = forward_rank_one(lam, v).values
        b = forward_rank_one(lam, abs_map(v).p).values
        assert np.abs(a - b).max() <= 1e-12 * spread(lam, a)


class TestPhaseInvariance:
    @given(spectra(1, 6), st.data())
    def test_rank_one_and_bordered(self, lam, data):
        n = lam.size
        v = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n)), dtype=complex)
        th = np.array(data.draw(st.lists(st.floats(0, 2 * math.pi), min_size=n, max_size=n)))
        w = v * np.exp(1j * th)
        tol = TolerancePolicy().tol_res
        a, b = forward_rank_one(lam, v).values, forward_rank_one(lam, w).values
        assert np.abs(a - b).max() <= tol * spread(lam, a)
        a, b = forward_bordered(lam, v, 0.5).values, forward_bordered(lam, w, 0.5).values
        assert np.abs(a - b).max() <= tol * spread(lam, a)

    def test_dense_complex_oracle(self, rng):
        lam = np.array([0.0, 1.0, 3.0])
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        np.testing.assert_allclose(forward_rank_one(lam, v).values, dense_rank_one(lam, v), atol=1e-13)
        np.testing.assert_allclose(forward_bordered(lam, v, -1).values, dense_bordered(lam, v, -1), atol=1e-13)


class TestJacobians:
    def test_scalar(self):
        assert jacobian_F([3.0], [0.5]).entries.tolist() == [[1.0]]

    def test_rank_one_fd(self):
        v = np.array([R15, R05])
        jac = jacobian_F([0, 2], v).entries
        fd = fd_jacobian(lambda x: forward_rank_one([0, 2], x).values, v)
        np.testing.assert_allclose(jac, fd, atol=1e-6)
        assert abs(jacobian_F([0, 2], [1, 1]).det) > 1e-3

    def test_bordered_fd(self):
        x = np.array([1.0, 0.0])
        jac = jacobian_G([0], [1.0], 0.0).entries
        fd = fd_jacobian(lambda y: forward_bordered([0], y[:1], y[1]).values, x)
        np.testing.assert_allclose(jac, fd, atol=1e-6)

    def test_boundary(self):
        with pytest.raises(BoundaryPoint):
            jacobian_G([0, 1], [1.0, 0.0], 0.5)
        with pytest.raises(BoundaryPoint):
            jacobian_F([0, 1], [0.0, 1.0])

    @pytest.mark.parametrize("n", [1, 2, 4, 7])
    def test_random_interior(self, rng, n):
        for _ in range(10):
            lam = random_spectrum(rng, n, min_gap=0.05)
            v = rng.uniform(0.2, 1.5, n) * rng.choice([-1, 1], n)
            c = float(rng.normal())
            jac = jacobian_F(lam, v).entries
            fd = fd_jacobian(lambda x: forward_rank_one(lam, x).values, v)
            assert np.abs(jac - fd).max() <= 1e-5 * np.abs(fd).max()
            assert abs(np.linalg.det(jac)) > 0
            x = np.append(v, c)
            jac = jacobian_G(lam, v, c).entries
            fd = fd_jacobian(lambda y: forward_bordered(lam, y[:-1], y[-1]).values, x)
            assert np.abs(jac - fd).max() <= 1e-5 * np.abs(fd).max()
            assert abs(np.linalg.det(jac)) > 0


class TestDerivatives:
    def test_first_order_examples(self):
        t = np.diag([0.0, 1.0])
        assert eigenvalue_derivative(t, np.ones((2, 2)), 1) == pytest.approx(1.0)
        assert eigenvalue_derivative(t, np.zeros((2, 2)), 0) == 0.0
        with pytest.raises(IndexOutOfRange):
            eigenvalue_derivative(t, t, 2)
        with pytest.raises(DegenerateSpectrum):
            eigenvalue_derivative(np.eye(2), t, 0)

    def test_first_order_fd(self, rng):
        for _ in range(10):
            a = rng.standard_normal((3, 3))
            b = rng.standard_normal((3, 3))
            t, tdot = a + a.T, b + b.T
            h = 1e-5
            fd = (np.linalg.eigvalsh(t + h * tdot) - np.linalg.eigvalsh(t - h * tdot)) / (2 * h)
            for j in range(3):
                assert eigenvalue_derivative(t, tdot, j) == pytest.approx(fd[j], abs=1e-6)

    def test_direction_matrix(self, rng):
        v = rng.standard_normal(3)
        vdot = rng.standard_normal(3)
        h = 1e-6
        m = PerturbationDirection(vdot).matrix(v)
        fd = (np.outer(v + h * vdot, v + h * vdot) - np.outer(v - h * vdot, v - h * vdot)) / (2 * h)
        np.testing.assert_allclose(m, fd, atol=1e-8)
        mb = PerturbationDirection(vdot, 0.5).matrix(v, BORDERED)
        assert mb[3, 3] == 0.5
        np.testing.assert_array_equal(mb[:3, 3], vdot)

    def test_second_order_examples(self):
        assert eigenvalue_second_derivative_bordered([0], 1, 0) == -2
        assert eigenvalue_second_derivative_bordered([0], 1, 1) == 2
        with pytest.raises(ShiftNotAboveSpectrum):
            eigenvalue_second_derivative_bordered([0, 2], 1, 0)

    def test_second_order_fd(self):
        lam = np.array([0.0, 2.0])
        h = 1e-3
        f = lambda t: forward_bordered(lam, np.full(2, t), 3.0).values
        fd = (f(h) - 2 * f(0) + f(-h)) / h**2
        for j in range(3):
            assert eigenvalue_second_derivative_bordered(lam, 3.0, j) == pytest.approx(fd[j], abs=1e-4)


class TestSliceIdentities:
    def test_examples(self):
        rep = check_slice_identities([0, 2], [R15, R05])
        assert rep.mode == RANK_ONE
        assert abs(rep.residuals["trace"]) < 1e-14 and rep.ok()
        rep = check_slice_identities([0], [math.sqrt(2)], 1.0)
        assert rep.mode == BORDERED
        assert abs(rep.residuals["trace"]) < 1e-14
        assert abs(rep.residuals["trace_sq"]) < 1e-14
        rep = check_slice_identities([0, 1], [0, 0], 0.0)
        assert rep.residuals == {"trace": 0.0, "trace_sq": 0.0}

    def test_wrong_mu_fails(self):
        assert not check_slice_identities([0, 2], [1, 1], mu=[1, 3.5]).ok()

    @given(spectra(1, 6), st.data())
    def test_properness_trace_linearity(self, lam, data):
        n = lam.size
        u = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
        if np.linalg.norm(u) < 1e-3:
            u[0] = 1.0
        u /= np.linalg.norm(u)
        for r in (1.0, 10.0, 100.0):
            mu = forward_rank_one(lam, r * u).values
            assert mu.sum() - lam.sum() == pytest.approx(r * r, rel=1e-12, abs=1e-12 * spread(lam))


class TestBoundaryLaw:
    @given(spectra(1, 7), st.data())
    def test_zero_coordinate_shares_eigenvalue(self, lam, data):
        n = lam.size
        v = np.array(data.draw(st.lists(st.floats(0.1, 3), min_size=n, max_size=n)))
        i = data.draw(st.integers(0, n - 1))
        eps = TolerancePolicy().face_tol(lam)
        mu = forward_rank_one(lam, v).values
        assert np.min(np.abs(mu[:, None] - lam[None, :])) > eps
        v[i] = 0.0
        mu = forward_rank_one(lam, v).values
        assert np.min(np.abs(mu - lam[i])) <= 1e-11 * spread(lam, mu)
        mu = forward_bordered(lam, v, 0.3).values
        assert np.min(np.abs(mu - lam[i])) <= 1e-11 * spread(lam, mu)
