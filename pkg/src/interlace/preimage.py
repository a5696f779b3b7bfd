"""Full preimage sets of the forward maps over the real and complex fields.

Two vectors have the same image exactly when their eigenbasis coordinates
have the same moduli.  Over the reals the preimage of a target is therefore
the orthant solution with every sign choice on its nonzero coordinates;
over the complex numbers each nonzero coordinate sweeps a circle.

The complex preimage set is sampled as an (n - k)-dimensional torus, one
circle per nonzero coordinate.  A count of n - k - 1 circles also circulates
for this set; the diagonal-unitary invariance gives one free phase per
nonzero coordinate, so ``torus_dim`` reports n - k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    BORDERED,
    DEFAULT_TOL,
    RANK_ONE,
    FieldVector,
    TolerancePolicy,
    as_spectrum,
    spread,
)
from .errors import FrozenMismatch, InputError, LengthMismatch
from .forward import forward_bordered, forward_rank_one
from .inverse import CertificationFailed, invert_bordered_closed, invert_rank_one_closed

FROZEN = None


@dataclass(frozen=True)
class SignPattern:
    """Signs in {+1, -1, 0}; 0 marks a face-contact (zero) coordinate."""

    signs: tuple

    def __post_init__(self):
        if any(s not in (1, -1, 0) for s in self.signs):
            raise InputError("signs must be +1, -1 or 0")

    def apply(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if len(self.signs) != p.size:
            raise LengthMismatch("sign pattern length differs from the vector")
        if np.any((p == 0) != (np.array(self.signs) == 0)):
            raise InputError("zero signs must sit exactly on the zero coordinates")
        return p * np.array(self.signs, dtype=float)

    def label(self) -> str:
        return "".join({1: "+", -1: "-", 0: "0"}[s] for s in self.signs)


@dataclass(frozen=True)
class PhaseAssignment:
    """Angles per coordinate; ``None`` marks a frozen (zero) coordinate."""

    thetas: tuple

    @classmethod
    def for_support(cls, p, angles) -> "PhaseAssignment":
        """Spread ``angles`` over the nonzero coordinates of ``p``, freezing the rest."""
        p = np.asarray(p)
        angles = list(angles)
        nz = np.flatnonzero(p)
        if len(angles) != nz.size:
            raise LengthMismatch(f"{len(angles)} angles for {nz.size} free coordinates")
        thetas = [FROZEN] * p.size
        for i, a in zip(nz, angles):
            thetas[i] = float(a) % (2 * np.pi)
        return cls(tuple(thetas))


@dataclass(frozen=True)
class PreimageCount:
    field: str
    count: int | None
    torus_dim: int | None
    radius_sq: float
    k: int

    def as_dict(self) -> dict:
        out = {"field": self.field, "k": self.k, "radius_sq": self.radius_sq}
        if self.count is not None:
            out["count"] = self.count
        if self.torus_dim is not None:
            out["torus_dim"] = self.torus_dim
        return out


def orthant_solution(lam, mu, mode: str = RANK_ONE, tol: TolerancePolicy = DEFAULT_TOL):
    """Closed-form orthant preimage: ``(p, c)`` with ``c`` None in rank-one mode."""
    if mode == RANK_ONE:
        return invert_rank_one_closed(lam, mu, tol=tol).p, None
    if mode == BORDERED:
        sol = invert_bordered_closed(lam, mu, tol=tol)
        return sol.v.entries, sol.c
    raise InputError(f"unknown mode {mode!r}")


def sign_patterns(p) -> list[SignPattern]:
    """All sign patterns on the support of ``p``, all-positive first, '+' before '-'."""
    p = np.asarray(p)
    nz = np.flatnonzero(p)
    out = []
    for choice in itertools.product((1, -1), repeat=nz.size):
        signs = [0] * p.size
        for i, s in zip(nz, choice):
            signs[i] = s
        out.append(SignPattern(tuple(signs)))
    return out


def _check_image(lam, mu, z, c, mode, tol):
    got = (forward_rank_one(lam, z) if mode == RANK_ONE else forward_bordered(lam, z, c)).values
    err = float(np.abs(got - np.asarray(mu, dtype=float)).max())
    if err > tol.tol_res * spread(lam, mu):
        raise CertificationFailed(f"preimage maps {err:.3g} away from the target")


def enumerate_real_preimages(lam, mu, mode: str = RANK_ONE, limit: int | None = None,
                             tol: TolerancePolicy = DEFAULT_TOL) -> list[FieldVector]:
    """Every real preimage (2^(n-k) of them), each checked against the forward map.

    In bordered mode the vectors are borders ``v``; ``c`` is fixed by the trace.
    """
    lam = as_spectrum(lam, strict=True, tol=tol)
    p, c = orthant_solution(lam, mu, mode, tol)
    out = []
    for pattern in sign_patterns(p):
        if limit is not None and len(out) >= limit:
            break
        z = pattern.apply(p)
        _check_image(lam, mu, z, c, mode, tol)
        out.append(FieldVector(z, "real"))
    return out


def _as_phases(phases, n):
    if isinstance(phases, PhaseAssignment):
        thetas = phases.thetas
    else:
        thetas = tuple(phases)
    if len(thetas) != n:
        raise LengthMismatch(f"{len(thetas)} phases for {n} coordinates")
    return thetas


def sample_complex_preimage(lam, mu, phases, mode: str = RANK_ONE,
                            tol: TolerancePolicy = DEFAULT_TOL) -> FieldVector:
    """The preimage ``v_j = exp(i theta_j) p_j`` on the phase torus."""
    lam = as_spectrum(lam, strict=True, tol=tol)
    p, c = orthant_solution(lam, mu, mode, tol)
    thetas = _as_phases(phases, p.size)
    z = np.zeros(p.size, dtype=complex)
    for j, (pj, th) in enumerate(zip(p, thetas)):
        if pj == 0:
            if th is not FROZEN:
                raise FrozenMismatch(f"coordinate {j} is zero and takes no phase")
            continue
        if th is FROZEN:
            raise InputError(f"coordinate {j} is nonzero and needs a phase")
        z[j] = pj * np.exp(1j * float(th))
    _check_image(lam, mu, z, c, mode, tol)
    return FieldVector(z, "complex")


def preimage_count(lam, mu, field: str = "real", mode: str = RANK_ONE,
                   tol: TolerancePolicy = DEFAULT_TOL) -> PreimageCount:
    """Size of the preimage set: 2^(n-k) points (real) or an (n-k)-torus (complex).

    ``radius_sq`` is the squared norm shared by all preimages.  k counts the
    zero coordinates of the orthant solution.
    """
    if field not in ("real", "complex"):
        raise InputError(f"unknown field {field!r}")
    lam = as_spectrum(lam, strict=True, tol=tol)
    p, c = orthant_solution(lam, mu, mode, tol)
    free = int(np.count_nonzero(p))
    mu = np.asarray(mu, dtype=float)
    if mode == RANK_ONE:
        r2 = float(mu.sum() - lam.values.sum())
    else:
        r2 = 0.5 * float(np.sum(mu**2) - np.sum(lam.values**2) - c**2)
    k = p.size - free
    if field == "real":
        return PreimageCount(field, 2**free, None, r2, k)
    return PreimageCount(field, None, free, r2, k)
