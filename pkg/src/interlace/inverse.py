"""Inverse problems: recover the orthant preimage of an interlacing target.

Two independent routes:

* closed form, from equating the characteristic polynomial of the updated
  matrix with ``prod(x - mu_j)`` and evaluating at each pole;
* predictor-corrector continuation along the straight segment from the
  image of an interior seed to the target, Newton-corrected with the
  analytic Jacobians.

Both return solutions in eigenbasis coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    BORDERED,
    DEFAULT_TOL,
    RANK_ONE,
    BorderedProblem,
    FieldVector,
    OrthantVector,
    TolerancePolicy,
    as_spectrum,
    as_vector,
    box_bounds,
    classify_faces,
    interlacing_violation,
    spread,
)
from .eigen import eig_hermitian
from .errors import (
    BoundaryPoint,
    DegenerateSpectrum,
    InputError,
    LengthMismatch,
    NegativeWeight,
    NewtonDivergence,
    NoConvergence,
    NotInterlacing,
    NumericalError,
    StepUnderflow,
)
from .forward import forward_bordered, forward_rank_one, jacobian_F, jacobian_G

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps

CLOSED_FORM = "closed_form"
CONTINUATION = "continuation"


class CertificationFailed(NumericalError):
    pass


@dataclass(frozen=True)
class ContinuationOptions:
    max_steps: int = 2000
    newton_tol: float = 1e-12
    newton_max_iter: int = 8
    initial_step: float = 0.25
    min_step: float = 1e-6

    def __post_init__(self):
        if not 0 < self.min_step <= self.initial_step <= 1:
            raise InputError("need 0 < min_step <= initial_step <= 1")
        if self.max_steps < 1 or self.newton_max_iter < 1 or not self.newton_tol > 0:
            raise InputError("invalid continuation budget")


@dataclass(frozen=True)
class SolveCertificate:
    residual_spectrum: float
    residual_trace: float
    interlacing_ok: bool
    method: str
    threshold: float
    path_steps: int | None = None

    @property
    def accepting(self) -> bool:
        return bool(self.interlacing_ok and self.residual_spectrum <= self.threshold)

    def as_dict(self) -> dict:
        out = {
            "method": self.method,
            "accepting": self.accepting,
            "residual_spectrum": self.residual_spectrum,
            "residual_trace": self.residual_trace,
            "interlacing_ok": self.interlacing_ok,
            "threshold": self.threshold,
        }
        if self.path_steps is not None:
            out["path_steps"] = self.path_steps
        return out


# -- shared helpers -----------------------------------------------------------

def _target(lam, mu, mode, tol):
    """Validate and clip a target into the image box (slack tol_face)."""
    lam = as_spectrum(lam, strict=True, tol=tol)
    mu = np.asarray(mu, dtype=float).ravel()
    want = len(lam) + (mode == BORDERED)
    if mu.size != want:
        raise LengthMismatch(f"mu has length {mu.size}, expected {want}")
    bad = interlacing_violation(lam.values, mu, mode, tol=tol.face_tol(lam.values))
    if bad is not None:
        raise NotInterlacing(bad)
    lower, upper = box_bounds(lam.values, mode)
    return lam, np.clip(mu, lower, upper)


def _clamp_radicand(r, scale, tol):
    if np.any(r < -tol.tol_res * scale):
        i = int(np.argmin(r))
        raise NegativeWeight(f"squared weight {i} is {r[i]:.3g}")
    return np.where(r > 0, r, 0.0)


def _rank_one_radicands(lam, mu):
    """p_i^2 = prod_j (mu_j - lam_i) / prod_{j != i} (lam_j - lam_i).

    Factors are paired so that every ratio lies in [0, 1] for an
    interlacing target: mu_j with lam_j for j < i, mu_j with lam_{j+1} for
    i <= j < n-1, and mu_{n-1} - lam_i left over.
    """
    n = lam.size
    out = np.empty(n)
    for i in range(n):
        lo = np.arange(i)
        mid = np.arange(i, n - 1)
        r = mu[n - 1] - lam[i]
        if lo.size:
            r *= np.prod((mu[lo] - lam[i]) / (lam[lo] - lam[i]))
        if mid.size:
            r *= np.prod((mu[mid] - lam[i]) / (lam[mid + 1] - lam[i]))
        out[i] = r
    return out


def _bordered_radicands(lam, mu):
    """v_i^2 = -prod_j (mu_j - lam_i) / prod_{k != i} (lam_k - lam_i).

    Paired as mu_{k+1}/lam_k for k < i and mu_k/lam_k for k > i; the
    leftover (lam_i - mu_0)(mu_n - lam_i) is nonnegative.
    """
    n = lam.size
    out = np.empty(n)
    for i in range(n):
        k = np.arange(n)
        lo, hi = k[k < i], k[k > i]
        r = (lam[i] - mu[0]) * (mu[n] - lam[i])
        if lo.size:
            r *= np.prod((mu[lo + 1] - lam[i]) / (lam[lo] - lam[i]))
        if hi.size:
            r *= np.prod((mu[hi] - lam[i]) / (lam[hi] - lam[i]))
        out[i] = r
    return out


def _residual(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


# -- closed forms -------------------------------------------------------------

def invert_rank_one_closed(lam, mu, basis=None, tol: TolerancePolicy = DEFAULT_TOL) -> OrthantVector:
    """Orthant vector ``p`` with ``sigma(diag(lam) + p p^T) = mu``.

    ``p_i`` is exactly zero when ``mu`` attains ``lam_i``.  The result is
    checked against the forward map before it is returned.
    """
    lam, mu = _target(lam, mu, RANK_ONE, tol)
    lv = lam.values
    scale = spread(lv, mu)
    p = np.sqrt(_clamp_radicand(_rank_one_radicands(lv, mu), scale, tol))
    got = forward_rank_one(lam, p).values
    if _residual(got, mu) > tol.tol_res * scale:
        raise CertificationFailed(f"closed-form residual {_residual(got, mu):.3g}")
    return OrthantVector(p, basis)


def invert_bordered_closed(lam, mu, tol: TolerancePolicy = DEFAULT_TOL) -> BorderedProblem:
    """Border ``(v, c)`` with ``sigma([[diag(lam), v], [v^T, c]]) = mu``, ``v >= 0``.

    ``c`` is fixed by the trace: ``c = sum(mu) - sum(lam)``.
    """
    lam, mu = _target(lam, mu, BORDERED, tol)
    lv = lam.values
    scale = spread(lv, mu)
    c = float(mu.sum() - lv.sum())
    v = np.sqrt(_clamp_radicand(_bordered_radicands(lv, mu), scale, tol))
    got = forward_bordered(lam, v, c).values
    if _residual(got, mu) > tol.tol_res * scale:
        raise CertificationFailed(f"closed-form residual {_residual(got, mu):.3g}")
    return BorderedProblem(lam, FieldVector(v), c)


# -- certificates -------------------------------------------------------------

def certify(lam, mu, solution, mode: str = RANK_ONE, method: str = CLOSED_FORM,
            tol: TolerancePolicy = DEFAULT_TOL, path_steps: int | None = None) -> SolveCertificate:
    """Reassemble the matrix from ``solution``, re-diagonalize densely and report residuals.

    ``solution`` is the eigenbasis coordinate vector (rank-one mode) or a
    :class:`BorderedProblem` / ``(v, c)`` pair (bordered mode).
    """
    lam = as_spectrum(lam, strict=True, tol=tol)
    lv = lam.values
    mu = np.asarray(mu, dtype=float).ravel()
    if mode == RANK_ONE:
        if isinstance(solution, OrthantVector):
            z = solution.p
        else:
            z = as_vector(solution)
        t = np.diag(lv).astype(z.dtype) + np.outer(z, z.conj())
        trace_res = float(mu.sum() - lv.sum() - np.sum(np.abs(z) ** 2))
    elif mode == BORDERED:
        if not isinstance(solution, BorderedProblem):
            v, c = solution
            solution = BorderedProblem(lam, v, c)
        t = solution.matrix()
        trace_res = float(mu.sum() - lv.sum() - solution.c)
    else:
        raise InputError(f"unknown mode {mode!r}")
    sigma = eig_hermitian(t, tol).values.values
    eps = tol.face_tol(lv)
    scale = spread(lv, mu)
    ok = (
        sigma.size == mu.size
        and interlacing_violation(lv, mu, mode, tol=eps) is None
        and interlacing_violation(lv, sigma, mode, tol=eps) is None
    )
    res = _residual(sigma, mu) if sigma.size == mu.size else float("inf")
    return SolveCertificate(res, trace_res, bool(ok), method, tol.tol_res * scale, path_steps)


# -- continuation -------------------------------------------------------------

def _deflate(lam, mu, mode, tol):
    """Drop face contacts: returns (kept base indices, reduced lam, reduced mu)."""
    prof = classify_faces(lam, mu, mode, tol)
    keep_lam = np.ones(lam.size, dtype=bool)
    keep_mu = np.ones(mu.size, dtype=bool)
    for j in prof.shared:
        keep_lam[j] = False
        cand = np.flatnonzero(keep_mu)
        drop = cand[np.argmin(np.abs(mu[cand] - lam[j]))]
        keep_mu[drop] = False
    lam_r, mu_r = lam[keep_lam], mu[keep_mu]
    if lam_r.size:
        lower, upper = box_bounds(lam_r, mode)
        mu_r = np.clip(mu_r, lower, upper)
    return np.flatnonzero(keep_lam), lam_r, mu_r


def _newton(fmap, jmap, x, goal, opts, tol_abs):
    """Newton corrector.  Returns (x, iterations, converged)."""
    try:
        r = goal - fmap(x)
    except NumericalError:
        return x, 0, False
    err = np.abs(r).max()
    for it in range(1, opts.newton_max_iter + 1):
        if err <= tol_abs:
            return x, it - 1, True
        try:
            step = np.linalg.solve(jmap(x), r)
            x_new = x + step
            r_new = goal - fmap(x_new)
        except (np.linalg.LinAlgError, BoundaryPoint, DegenerateSpectrum, NumericalError):
            return x, it, False
        err_new = np.abs(r_new).max()
        if not np.isfinite(err_new) or (err_new > err and err_new > tol_abs):
            return x, it, False
        x, r, err = x_new, r_new, err_new
    return x, opts.newton_max_iter, err <= tol_abs


def _polish(fmap, jmap, x, goal, max_iter=10):
    """Extra Newton steps at the end point while the residual keeps dropping."""
    err = np.abs(goal - fmap(x)).max()
    for _ in range(max_iter):
        if err == 0:
            break
        try:
            x_new = x + np.linalg.solve(jmap(x), goal - fmap(x))
            err_new = np.abs(goal - fmap(x_new)).max()
        except (np.linalg.LinAlgError, BoundaryPoint, DegenerateSpectrum, NumericalError):
            break
        if not err_new < err:
            break
        x, err = x_new, err_new
    return x


def _track(fmap, jmap, x0, target, opts, tol_abs):
    """Follow F(x(t)) = (1 - t) F(x0) + t target from t = 0 to 1."""
    mu0 = fmap(x0)
    direction = target - mu0
    x = np.array(x0, dtype=float)
    t, h, steps = 0.0, opts.initial_step, 0
    if np.abs(direction).max() <= tol_abs:
        return x, 0
    while t < 1.0:
        if steps >= opts.max_steps:
            raise NoConvergence(f"continuation used {steps} steps without reaching t = 1")
        steps += 1
        h = min(h, 1.0 - t)
        t_new = 1.0 if h >= 1.0 - t else t + h
        try:
            tangent = np.linalg.solve(jmap(x), direction)
        except (np.linalg.LinAlgError, BoundaryPoint, DegenerateSpectrum):
            tangent = np.zeros_like(x)
        x_new, its, ok = _newton(fmap, jmap, x + h * tangent, mu0 + t_new * direction, opts, tol_abs)
        if ok:
            x, t = x_new, t_new
            if its <= 3:
                h = min(2.0 * h, 1.0)
        else:
            h *= 0.5
            if h < opts.min_step:
                raise StepUnderflow(f"step {h:.3g} fell below min_step at t = {t:.6f}")
    x = _polish(fmap, jmap, x, target)
    if np.abs(target - fmap(x)).max() > tol_abs:
        raise NewtonDivergence("corrector failed to reach the target at t = 1")
    return x, steps


def _abs_tol(opts, lam, mu):
    return max(opts.newton_tol * spread(lam, mu), 16 * _EPS * float(np.abs(np.r_[lam, mu]).max()))


def invert_rank_one_continuation(lam, mu, opts: ContinuationOptions | None = None, seed=None,
                                 tol: TolerancePolicy = DEFAULT_TOL):
    """Orthant preimage by numerical continuation.  Returns (OrthantVector, SolveCertificate).

    ``seed`` is an optional interior starting point (all entries nonzero);
    by default ``s * (1, ..., 1)`` with ``n s^2 = sum(mu) - sum(lam)``.
    Face contacts of the target are deflated first: those coordinates are
    zero and the path runs in the remaining ones.
    """
    opts = opts or ContinuationOptions()
    lam, mu = _target(lam, mu, RANK_ONE, tol)
    lv = lam.values
    keep, lam_r, mu_r = _deflate(lv, mu, RANK_ONE, tol)
    p = np.zeros(lv.size)
    steps = 0
    if lam_r.size:
        r2 = float(mu_r.sum() - lam_r.sum())
        if seed is None:
            x0 = np.full(lam_r.size, np.sqrt(max(r2, 0.0) / lam_r.size))
        else:
            x0 = np.asarray(seed, dtype=float).ravel()
            if x0.size != lv.size:
                raise LengthMismatch("seed must have the length of lambda")
            x0 = x0[keep]
        if np.any(np.abs(x0) <= tol.face_tol(lv)):
            raise BoundaryPoint("continuation seed must lie in the interior of the orthant")
        sub = as_spectrum(lam_r, strict=True, tol=tol)
        x, steps = _track(
            lambda x: forward_rank_one(sub, x).values,
            lambda x: jacobian_F(sub, x, tol).entries,
            x0, mu_r, opts, _abs_tol(opts, lam_r, mu_r),
        )
        p[keep] = np.abs(x)
    sol = OrthantVector(p)
    cert = certify(lam, mu, sol, RANK_ONE, CONTINUATION, tol, steps)
    log.debug("rank-one continuation: %d steps, residual %.3g", steps, cert.residual_spectrum)
    return sol, cert


def invert_bordered_continuation(lam, mu, opts: ContinuationOptions | None = None, seed=None,
                                 tol: TolerancePolicy = DEFAULT_TOL):
    """Bordered counterpart of :func:`invert_rank_one_continuation`.

    Unknowns are ``(v, c)``; the default seed is the all-ones border scaled
    to the target's trace-of-squares slice, with ``c`` at the trace gap.
    ``seed`` may be a ``(v0, c0)`` pair.
    """
    opts = opts or ContinuationOptions()
    lam, mu = _target(lam, mu, BORDERED, tol)
    lv = lam.values
    keep, lam_r, mu_r = _deflate(lv, mu, BORDERED, tol)
    c_target = float(mu_r.sum() - lam_r.sum())
    v = np.zeros(lv.size)
    c = c_target
    steps = 0
    if lam_r.size:
        if seed is None:
            r2 = 0.5 * float(np.sum(mu_r**2) - np.sum(lam_r**2) - c_target**2)
            s = np.sqrt(max(r2, _EPS * spread(lam_r, mu_r)) / lam_r.size)
            x0 = np.append(np.full(lam_r.size, s), c_target)
        else:
            v0, c0 = seed
            v0 = np.asarray(v0, dtype=float).ravel()
            if v0.size != lv.size:
                raise LengthMismatch("seed border must have the length of lambda")
            x0 = np.append(v0[keep], float(c0))
        if np.any(np.abs(x0[:-1]) <= tol.face_tol(lv)):
            raise BoundaryPoint("continuation seed must lie in the interior of the orthant")
        sub = as_spectrum(lam_r, strict=True, tol=tol)
        x, steps = _track(
            lambda x: forward_bordered(sub, x[:-1], x[-1]).values,
            lambda x: jacobian_G(sub, x[:-1], x[-1], tol).entries,
            x0, mu_r, opts, _abs_tol(opts, lam_r, mu_r),
        )
        v[keep] = np.abs(x[:-1])
        c = float(x[-1])
    sol = BorderedProblem(lam, FieldVector(v), c)
    cert = certify(lam, mu, sol, BORDERED, CONTINUATION, tol, steps)
    log.debug("bordered continuation: %d steps, residual %.3g", steps, cert.residual_spectrum)
    return sol, cert
