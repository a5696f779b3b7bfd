"""Self-contained eigensolvers.

* :func:`eig_hermitian` -- cyclic Jacobi rotations on a real symmetric
  matrix; complex Hermitian input goes through the 2n x 2n real embedding.
* :func:`secular_roots_rank_one` / :func:`secular_roots_arrowhead` --
  bracketed Newton iteration on the secular equation of ``D + z z*`` and of
  the arrowhead matrix ``[[D, z], [z*, c]]``.

The secular kernels work in shifted coordinates: each root is stored as
``origin + tau`` with ``origin`` the nearest pole, so differences
``pole - root`` are computed without cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, OrderedSpectrum, TolerancePolicy, as_spectrum
from .errors import InputError, LengthMismatch, NoConvergence, NotHermitian

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60
SECULAR_MAX_ITER = 200
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    values: OrderedSpectrum
    vectors: np.ndarray

    def residual(self, t) -> float:
        """max_j ||T w_j - values[j] w_j||."""
        t = np.asarray(t)
        r = t @ self.vectors - self.vectors * self.values.values
        return float(np.linalg.norm(r, axis=0).max())


@dataclass(frozen=True, eq=False)
class SecularSystem:
    """Poles (strictly increasing), nonnegative weights, optional border shift."""

    poles: OrderedSpectrum
    weights: np.ndarray
    shift: float | None = None

    def __post_init__(self):
        poles = as_spectrum(self.poles, strict=True)
        w = np.array(self.weights, dtype=float).ravel()
        if w.size != len(poles):
            raise LengthMismatch(f"{w.size} weights for {len(poles)} poles")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InputError("secular weights must be finite and nonnegative")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "weights", w)
        if self.shift is not None:
            object.__setattr__(self, "shift", float(self.shift))


# -- Jacobi -----------------------------------------------------------------

def _jacobi_symmetric(a: np.ndarray):
    """Cyclic-by-row Jacobi.  Returns (diagonal, accumulated rotations)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    norm = math.sqrt(float(np.sum(a * a)))
    if n == 1 or norm == 0.0:
        return np.diag(a).copy(), v
    iu = np.triu_indices(n, 1)
    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
        if off <= JACOBI_TOL * norm:
            return np.diag(a).copy(), v
        if sweep == JACOBI_MAX_SWEEPS:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def _pair_embedding(vals: np.ndarray, vecs: np.ndarray, n: int):
    """Recover n complex eigenpairs from the 2n real ones of the embedding.

    Each complex eigenvector z = x + iy appears twice, as (x, y) and
    (-y, x).  Vectors are taken in ascending order and kept when they add a
    new complex direction (complex Gram-Schmidt against the kept ones).
    """
    order = np.argsort(vals, kind="stable")
    kept_vals, kept = [], []
    for j in order:
        z = vecs[:n, j] + 1j * vecs[n:, j]
        for u in kept:
            z = z - (u.conj() @ z) * u
        nz = np.linalg.norm(z)
        if nz > 0.5:
            kept.append(z / nz)
            kept_vals.append(vals[j])
            if len(kept) == n:
                break
    if len(kept) != n:
        raise NoConvergence("could not pair the eigenvectors of the real embedding")
    return np.array(kept_vals), np.column_stack(kept)


def eig_hermitian(t, tol: TolerancePolicy = DEFAULT_TOL) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix, values ascending.

    >>> eig_hermitian([[0.0, 1.0], [1.0, 0.0]]).values.values.tolist()
    [-1.0, 1.0]
    """
    t = np.asarray(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InputError("expected a square matrix")
    n = t.shape[0]
    if n == 0:
        raise InputError("empty matrix")
    scale = max(1.0, float(np.abs(t).max()))
    if np.abs(t - t.conj().T).max() > tol.tol_orth * scale:
        raise NotHermitian("matrix is not Hermitian")
    if np.iscomplexobj(t) and np.any(t.imag != 0):
        h = 0.5 * (t + t.conj().T)
        a, b = h.real, h.imag
        emb = np.block([[a, -b], [b, a]])
        vals, vecs = _jacobi_symmetric(emb)
        vals, vecs = _pair_embedding(vals, vecs, n)
        # Rayleigh quotients remove the pairing's dependence on round-off
        vals = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), h, vecs))
    else:
        a = np.real(t).astype(float)
        vals, vecs = _jacobi_symmetric(0.5 * (a + a.T))
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    return EigenDecomposition(OrderedSpectrum(vals, strict=False), vecs[:, order])


# -- secular equations --------------------------------------------------------

def _newton_shifted(delta, w, origin_col, a0, b, lo, hi):
    """Safeguarded Newton on all brackets at once.

    Row k solves  phi_k(tau) = a0[k] + b*tau + sum_j w[j] / (delta[k, j] - tau) = 0
    for tau in [lo[k], hi[k]], where delta[k, origin_col[k]] == 0.  phi_k is
    increasing; the iteration works on tau * phi_k(tau), which is smooth
    at the origin pole.
    """
    rows = np.arange(delta.shape[0])
    w_rest = np.broadcast_to(w, delta.shape).copy()
    w_org = w[origin_col]
    w_rest[rows, origin_col] = 0.0
    tau = 0.5 * (lo + hi)
    active = np.ones(tau.shape, dtype=bool)
    for _ in range(SECULAR_MAX_ITER):
        diff = delta - tau[:, None]
        # a bracket collapsed onto its origin gives 0/0 here; bisection takes over
        with np.errstate(divide="ignore", invalid="ignore"):
            r = w_rest / diff
            f_rest = a0 + b * tau + r.sum(axis=1)
            fp_rest = b + (r / diff).sum(axis=1)
            g = tau * f_rest - w_org
            gp = f_rest + tau * fp_rest
        # sign of phi = sign(g) * sign(tau)
        phi_sign = np.sign(g) * np.sign(tau)
        lo = np.where(active & (phi_sign < 0), tau, lo)
        hi = np.where(active & (phi_sign > 0), tau, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = tau - g / gp
        ok = np.isfinite(new) & (new >= lo) & (new <= hi) & (new != 0.0)
        new = np.where(ok, new, 0.5 * (lo + hi))
        width = hi - lo
        scale = np.maximum(np.abs(lo), np.abs(hi))
        done = (
            (phi_sign == 0)
            | (np.abs(new - tau) <= 2.0 * _EPS * np.abs(tau))
            | (width <= 4.0 * _EPS * scale)
        )
        tau = np.where(active & (phi_sign != 0), new, tau)
        active &= ~done
        if not active.any():
            break
    if not np.all(np.isfinite(tau)):
        raise NoConvergence("secular iteration produced a non-finite root")
    return tau


def _prepare(poles, weights):
    d = np.asarray(poles, dtype=float)
    w = np.asarray(weights, dtype=float)
    live = w > 0
    return d, w, live


def _rank_one_shifted(d, w):
    """Roots of 1 + sum w/(d - x) for strictly positive weights: (origins, taus)."""
    m = d.size
    origin = np.empty(m)
    lo = np.empty(m)
    hi = np.empty(m)
    col = np.empty(m, dtype=int)
    if m > 1:
        mid = 0.5 * (d[:-1] + d[1:])
        phi_mid = 1.0 + (w / (d[None, :] - mid[:, None])).sum(axis=1)
        left = phi_mid > 0
        k = np.arange(m - 1)
        col[:-1] = np.where(left, k, k + 1)
        origin[:-1] = d[col[:-1]]
        lo[:-1] = np.where(left, 0.0, mid - d[k + 1])
        hi[:-1] = np.where(left, mid - d[k], 0.0)
    col[-1] = m - 1
    origin[-1] = d[-1]
    lo[-1] = 0.0
    hi[-1] = w.sum()
    delta = d[None, :] - origin[:, None]
    tau = _newton_shifted(delta, w, col, np.ones(m), 0.0, lo, hi)
    return origin, tau


def _arrowhead_shifted(d, w, c):
    """Roots of (x - c) + sum w/(d - x) = 0 for strictly positive weights."""
    m = d.size
    radius = math.sqrt(float(w.sum()))
    origin = np.empty(m + 1)
    lo = np.empty(m + 1)
    hi = np.empty(m + 1)
    col = np.empty(m + 1, dtype=int)
    col[0] = 0
    origin[0] = d[0]
    lo[0] = min(d[0], c) - radius - d[0]
    hi[0] = 0.0
    col[-1] = m - 1
    origin[-1] = d[-1]
    lo[-1] = 0.0
    hi[-1] = max(d[-1], c) + radius - d[-1]
    if m > 1:
        mid = 0.5 * (d[:-1] + d[1:])
        phi_mid = (mid - c) + (w / (d[None, :] - mid[:, None])).sum(axis=1)
        left = phi_mid > 0
        k = np.arange(m - 1)
        col[1:-1] = np.where(left, k, k + 1)
        origin[1:-1] = d[col[1:-1]]
        lo[1:-1] = np.where(left, 0.0, mid - d[k + 1])
        hi[1:-1] = np.where(left, mid - d[k], 0.0)
    delta = d[None, :] - origin[:, None]
    tau = _newton_shifted(delta, w, col, origin - c, 1.0, lo, hi)
    return origin, tau


def secular_roots_rank_one(sys: SecularSystem) -> OrderedSpectrum:
    """Eigenvalues of ``diag(poles) + z z*`` with ``|z|^2 = weights``.

    Zero weights deflate: the corresponding pole is returned verbatim.
    """
    if sys.shift is not None:
        raise InputError("rank-one secular system must not carry a shift")
    d, w, live = _prepare(sys.poles.values, sys.weights)
    out = d.copy()
    if live.any():
        origin, tau = _rank_one_shifted(d[live], w[live])
        out = np.concatenate([d[~live], origin + tau])
    return OrderedSpectrum(np.sort(out), strict=False)


def secular_roots_arrowhead(sys: SecularSystem) -> OrderedSpectrum:
    """Eigenvalues of the arrowhead matrix with diagonal (poles, shift) and border sqrt(weights)."""
    if sys.shift is None:
        raise InputError("arrowhead secular system needs a shift")
    d, w, live = _prepare(sys.poles.values, sys.weights)
    c = sys.shift
    if live.any():
        origin, tau = _arrowhead_shifted(d[live], w[live], c)
        out = np.concatenate([d[~live], origin + tau])
    else:
        out = np.append(d, c)
    return OrderedSpectrum(np.sort(out), strict=False)


def rank_one_eigenpairs(poles, z):
    """Eigenvalues and normalized eigenvectors of ``diag(poles) + z z*``.

    Eigenvectors of undeflated roots are ``z_j / (poles_j - mu)``; a zero
    ``z_i`` contributes the pair ``(poles_i, e_i)``.
    """
    d = np.asarray(poles, dtype=float)
    z = np.asarray(z)
    n = d.size
    w = np.abs(z) ** 2
    live = w > 0
    vals = [d[~live]]
    vecs = [np.eye(n, dtype=z.dtype)[:, ~live]]
    if live.any():
        dl, wl = d[live], w[live]
        origin, tau = _rank_one_shifted(dl, wl)
        diff = (dl[None, :] - origin[:, None]) - tau[:, None]
        block = np.zeros((n, dl.size), dtype=z.dtype)
        block[live, :] = (z[live][None, :] / diff).T
        block /= np.linalg.norm(block, axis=0)
        vals.append(origin + tau)
        vecs.append(block)
    vals = np.concatenate(vals)
    vecs = np.concatenate(vecs, axis=1)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def arrowhead_eigenpairs(poles, z, c):
    """Eigenpairs of ``[[diag(poles), z], [z*, c]]`` (last coordinate = border)."""
    d = np.asarray(poles, dtype=float)
    z = np.asarray(z)
    n = d.size
    w = np.abs(z) ** 2
    live = w > 0
    eye = np.eye(n + 1, dtype=z.dtype)
    dead = np.append(~live, False)
    vals = [d[~live]]
    vecs = [eye[:, dead]]
    if live.any():
        dl, wl = d[live], w[live]
        origin, tau = _arrowhead_shifted(dl, wl, float(c))
        # mu - d_j, accurate through the shifted representation
        gap = tau[:, None] - (dl[None, :] - origin[:, None])
        block = np.zeros((n + 1, dl.size + 1), dtype=z.dtype)
        block[np.append(live, False), :] = (z[live][None, :] / gap).T
        block[n, :] = 1.0
        block /= np.linalg.norm(block, axis=0)
        vals.append(origin + tau)
        vecs.append(block)
    else:
        vals.append(np.array([float(c)]))
        vecs.append(eye[:, [n]])
    vals = np.concatenate(vals)
    vecs = np.concatenate(vecs, axis=1)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]
