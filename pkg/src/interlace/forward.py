"""Forward spectral maps, their Jacobians and eigenvalue perturbation formulas.

All kernels run in the eigenbasis of the base matrix, where it is the
diagonal ``diag(lam)``.  A general Hermitian ``S`` is handled by
:func:`spectral_frame`, which returns ``(lam, Q)``; vectors are then mapped
to eigenbasis coordinates with ``Q* v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BORDERED,
    DEFAULT_TOL,
    RANK_ONE,
    BorderedProblem,
    OrderedSpectrum,
    OrthantVector,
    TolerancePolicy,
    as_spectrum,
    as_vector,
    check_unitary,
    spread,
)
from .eigen import (
    SecularSystem,
    arrowhead_eigenpairs,
    eig_hermitian,
    rank_one_eigenpairs,
    secular_roots_arrowhead,
    secular_roots_rank_one,
)
from .errors import (
    BoundaryPoint,
    DegenerateSpectrum,
    IndexOutOfRange,
    InputError,
    LengthMismatch,
    ShiftNotAboveSpectrum,
)


@dataclass(frozen=True, eq=False)
class JacobianMatrix:
    entries: np.ndarray
    base_point: tuple

    def __array__(self, dtype=None, copy=None):
        return self.entries.astype(dtype) if dtype is not None else self.entries.copy()

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))


@dataclass(frozen=True, eq=False)
class PerturbationDirection:
    vdot: np.ndarray
    cdot: float | None = None

    def matrix(self, v, mode: str = RANK_ONE) -> np.ndarray:
        """The matrix derivative of the map at ``v`` along this direction."""
        vdot = np.asarray(self.vdot)
        v = np.asarray(v)
        if vdot.size != v.size:
            raise LengthMismatch("direction and base point differ in length")
        if mode == RANK_ONE:
            return np.outer(vdot, v.conj()) + np.outer(v, vdot.conj())
        n = v.size
        t = np.zeros((n + 1, n + 1), dtype=np.result_type(vdot, float))
        t[:n, n] = vdot
        t[n, :n] = np.conj(vdot)
        t[n, n] = self.cdot or 0.0
        return t


def spectral_frame(s, tol: TolerancePolicy = DEFAULT_TOL):
    """Diagonalize a Hermitian ``S`` once: returns (strict spectrum, eigenbasis Q)."""
    dec = eig_hermitian(s, tol)
    lam = as_spectrum(dec.values.values, strict=True, tol=tol)
    return lam, dec.vectors


def _coords(v, basis, n):
    v = as_vector(v)
    if v.size != n:
        raise LengthMismatch(f"v has length {v.size}, lambda has length {n}")
    if basis is not None:
        v = check_unitary(basis).conj().T @ v
    return v


def forward_rank_one(lam, v, basis=None, tol: TolerancePolicy = DEFAULT_TOL) -> OrderedSpectrum:
    """Ordered spectrum of ``S + v v*`` with ``S = Q diag(lam) Q*``."""
    lam = as_spectrum(lam, strict=True, tol=tol)
    z = _coords(v, basis, len(lam))
    return secular_roots_rank_one(SecularSystem(lam, np.abs(z) ** 2))


def forward_bordered(problem, v=None, c=None, basis=None, tol: TolerancePolicy = DEFAULT_TOL) -> OrderedSpectrum:
    """Ordered spectrum of the bordered matrix ``[[S, v], [v*, c]]``.

    Accepts a :class:`BorderedProblem` or the triple ``(lam, v, c)``.
    """
    if isinstance(problem, BorderedProblem):
        lam, v, c = problem.lam, problem.v, problem.c
    else:
        if v is None or c is None:
            raise InputError("forward_bordered needs v and c")
        lam = as_spectrum(problem, strict=True, tol=tol)
    z = _coords(v, basis, len(lam))
    return secular_roots_arrowhead(SecularSystem(lam, np.abs(z) ** 2, float(c)))


def forward(lam, v, c=None, mode: str = RANK_ONE, basis=None, tol: TolerancePolicy = DEFAULT_TOL) -> OrderedSpectrum:
    if mode == RANK_ONE:
        return forward_rank_one(lam, v, basis, tol)
    if mode == BORDERED:
        return forward_bordered(lam, v, c, basis, tol)
    raise InputError(f"unknown mode {mode!r}")


def abs_map(v, basis=None, tol: TolerancePolicy = DEFAULT_TOL) -> OrthantVector:
    """Moduli of the coordinates of ``v`` in the basis ``Q`` (identity if None)."""
    v = as_vector(v)
    if basis is None:
        return OrthantVector(np.abs(v))
    q = check_unitary(basis, tol.tol_orth)
    if q.shape[0] != v.size:
        raise LengthMismatch("basis size does not match v")
    return OrthantVector(np.abs(q.conj().T @ v), q)


def _real_point(v, n, lam, tol):
    v = as_vector(v)
    if np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise InputError("Jacobians are defined on real (orthant) coordinates")
        v = v.real
    if v.size != n:
        raise LengthMismatch(f"v has length {v.size}, lambda has length {n}")
    eps = tol.face_tol(lam)
    small = np.flatnonzero(np.abs(v) <= eps)
    if small.size:
        raise BoundaryPoint(f"v[{small[0]}] is on a face of the orthant")
    return v


def _check_simple(vals, tol):
    if vals.size > 1 and np.min(np.diff(vals)) <= tol.tol_gap * spread(vals):
        raise DegenerateSpectrum("image spectrum has a repeated eigenvalue")


def jacobian_F(lam, v, tol: TolerancePolicy = DEFAULT_TOL) -> JacobianMatrix:
    """Jacobian of ``v -> sigma(diag(lam) + v v^T)`` at an interior real ``v``.

    Row i is ``2 <w_i, v> w_i^T`` with ``w_i`` the i-th normalized eigenvector.
    """
    lam = as_spectrum(lam, strict=True, tol=tol)
    v = _real_point(v, len(lam), lam.values, tol)
    vals, w = rank_one_eigenpairs(lam.values, v)
    _check_simple(vals, tol)
    proj = w.T @ v
    return JacobianMatrix(2.0 * proj[:, None] * w.T, (v.copy(),))


def jacobian_G(problem, v=None, c=None, tol: TolerancePolicy = DEFAULT_TOL) -> JacobianMatrix:
    """Jacobian of ``(v, c) -> sigma(T(v, c))``, columns ordered (v_1..v_n, c).

    Row j is ``(2 w_j[n] w_j[:n], w_j[n]^2)``.
    """
    if isinstance(problem, BorderedProblem):
        lam, v, c = problem.lam, problem.v.entries, problem.c
    else:
        lam = as_spectrum(problem, strict=True, tol=tol)
    v = _real_point(v, len(lam), lam.values, tol)
    vals, w = arrowhead_eigenpairs(lam.values, v, float(c))
    _check_simple(vals, tol)
    last = w[-1, :]
    jac = np.empty((len(lam) + 1, len(lam) + 1))
    jac[:, :-1] = 2.0 * last[:, None] * w[:-1, :].T
    jac[:, -1] = last**2
    return JacobianMatrix(jac, (v.copy(), float(c)))


def eigenvalue_derivative(t, tdot, j: int, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Derivative of the j-th eigenvalue of ``T`` along ``Tdot``: ``<Tdot w_j, w_j>``."""
    dec = eig_hermitian(t, tol)
    vals = dec.values.values
    if not 0 <= j < vals.size:
        raise IndexOutOfRange(f"eigenvalue index {j} outside 0..{vals.size - 1}")
    gaps = np.abs(np.delete(vals, j) - vals[j])
    if gaps.size and gaps.min() <= tol.tol_gap * spread(vals):
        raise DegenerateSpectrum(f"eigenvalue {j} is not simple")
    w = dec.vectors[:, j]
    return float(np.real(w.conj() @ np.asarray(tdot) @ w))


def eigenvalue_second_derivative_bordered(lam, c: float, j: int, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Second derivative at t = 0 of the j-th eigenvalue of ``[[diag(lam), t 1], [t 1^T, c]]``.

    Requires ``c > lam[-1]``, so that the unperturbed ordered spectrum is
    ``(lam..., c)``.  Lower eigenvalues bend down, the top one bends up.
    """
    lam = as_spectrum(lam, strict=True, tol=tol).values
    n = lam.size
    if not c > lam[-1]:
        raise ShiftNotAboveSpectrum(f"c = {c} is not above lambda[{n - 1}] = {lam[-1]}")
    if not 0 <= j <= n:
        raise IndexOutOfRange(f"eigenvalue index {j} outside 0..{n}")
    if j < n:
        return -2.0 / (c - lam[j])
    return -2.0 * float(np.sum(1.0 / (lam - c)))


@dataclass(frozen=True)
class SliceReport:
    """Residuals of the trace (and trace-of-squares) identities.

    ``scale`` converts residuals to eigenvalue units: trace residuals are
    compared with ``tol * spread``, the squared one with
    ``tol * spread * 2 max|mu|``.
    """

    mode: str
    mu: tuple
    residuals: dict = field(default_factory=dict)
    spread: float = 1.0
    mu_max: float = 1.0

    def ok(self, rtol: float = DEFAULT_TOL.tol_res) -> bool:
        for name, r in self.residuals.items():
            bound = rtol * self.spread
            if name == "trace_sq":
                bound *= 2.0 * max(self.mu_max, 1e-300)
            if not abs(r) <= bound:
                return False
        return True


def check_slice_identities(lam, v, c=None, *, mode: str | None = None, mu=None, basis=None,
                           tol: TolerancePolicy = DEFAULT_TOL) -> SliceReport:
    lam = as_spectrum(lam, strict=True, tol=tol)
    if mode is None:
        mode = RANK_ONE if c is None else BORDERED
    z = _coords(v, basis, len(lam))
    r2 = float(np.sum(np.abs(z) ** 2))
    if mu is None:
        mu = forward(lam, z, c, mode, tol=tol)
    mu = np.asarray(mu, dtype=float)
    lv = lam.values
    if mode == RANK_ONE:
        res = {"trace": float(mu.sum() - lv.sum() - r2)}
    elif mode == BORDERED:
        if c is None:
            raise InputError("bordered slice identities need c")
        res = {
            "trace": float(mu.sum() - lv.sum() - c),
            "trace_sq": float(np.sum(mu**2) - np.sum(lv**2) - 2.0 * r2 - c**2),
        }
    else:
        raise InputError(f"unknown mode {mode!r}")
    return SliceReport(mode, tuple(mu.tolist()), res, spread(lv, mu), float(np.abs(mu).max()))
