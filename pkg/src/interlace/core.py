"""Domain types, interlacing predicates and face geometry of the image boxes.

Index conventions are 0-based throughout.  For a base spectrum ``lam`` of
length n the rank-one image box is

    [lam[0], lam[1]] x [lam[1], lam[2]] x ... x [lam[n-1], inf)

and the bordered image box (n + 1 coordinates) is

    (-inf, lam[0]] x [lam[0], lam[1]] x ... x [lam[n-1], inf)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BasisNotUnitary,
    DegenerateSpectrum,
    IndexOutOfRange,
    InputError,
    LengthMismatch,
    NotInPolytope,
)

RANK_ONE = "rank_one"
BORDERED = "bordered"
MODES = (RANK_ONE, BORDERED)

LOWER = "lower"
UPPER = "upper"


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def spread(*arrays) -> float:
    """Scale of a collection of spectra: the range of all values.

    Falls back to ``max(1, max|x|)`` when the range is zero, so that
    relative tolerances stay meaningful for single points.
    """
    vals = np.concatenate([np.ravel(np.asarray(a, dtype=float)) for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 1.0
    width = float(vals.max() - vals.min())
    if width > 0:
        return width
    return max(1.0, float(np.abs(vals).max()))


@dataclass(frozen=True)
class TolerancePolicy:
    tol_gap: float = 1e-10
    tol_face: float | None = None
    tol_res: float = 1e-10
    tol_orth: float = 1e-10

    def __post_init__(self):
        for name in ("tol_gap", "tol_res", "tol_orth"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.tol_face is not None and not self.tol_face > 0:
            raise InputError("tol_face must be positive")

    def face_tol(self, lam) -> float:
        """Absolute face-membership threshold for base spectrum ``lam``."""
        if self.tol_face is not None:
            return self.tol_face
        lam = np.asarray(lam, dtype=float)
        return 1e-9 * (float(lam[-1] - lam[0]) + 1.0)


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True, eq=False)
class OrderedSpectrum:
    """Ascending list of real eigenvalues."""

    values: np.ndarray
    strict: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size < 1:
            raise InputError("a spectrum needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise InputError("spectrum values must be finite")
        gaps = np.diff(vals)
        if np.any(gaps < 0):
            raise InputError("spectrum values must be in ascending order")
        if self.strict and np.any(gaps == 0):
            raise DegenerateSpectrum("repeated eigenvalue in a strict spectrum")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values.copy()
        return self.values.astype(dtype)

    def __eq__(self, other):
        if isinstance(other, OrderedSpectrum):
            return np.array_equal(self.values, other.values)
        return NotImplemented

    def __repr__(self):
        return f"OrderedSpectrum({self.values.tolist()}, strict={self.strict})"

    @property
    def n(self) -> int:
        return self.values.size


def as_spectrum(values, strict: bool = True, tol: TolerancePolicy = DEFAULT_TOL) -> OrderedSpectrum:
    """Coerce ``values`` to an :class:`OrderedSpectrum`.

    Strict (base) spectra are rejected when a gap falls below
    ``tol.tol_gap`` times the spread; degenerate spectra are never perturbed.
    """
    if isinstance(values, OrderedSpectrum) and (values.strict or not strict):
        spectrum = values
    else:
        spectrum = OrderedSpectrum(np.asarray(values, dtype=float), strict=False)
    if strict:
        vals = spectrum.values
        if vals.size > 1:
            gap = float(np.min(np.diff(vals)))
            if gap <= tol.tol_gap * spread(vals):
                raise DegenerateSpectrum(
                    f"base spectrum has a gap of {gap:.3g}, below tol_gap * spread"
                )
        if not spectrum.strict:
            spectrum = OrderedSpectrum(vals, strict=True)
    return spectrum


@dataclass(frozen=True, eq=False)
class OrthantVector:
    """Nonnegative coordinates ``p`` in the eigenbasis ``basis`` (identity if None)."""

    p: np.ndarray
    basis: np.ndarray | None = None

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InputError("orthant coordinates must be finite and nonnegative")
        object.__setattr__(self, "p", p)
        if self.basis is not None:
            q = check_unitary(self.basis)
            if q.shape[0] != p.size:
                raise LengthMismatch("basis size does not match the coordinates")
            object.__setattr__(self, "basis", q)

    def __len__(self):
        return self.p.size

    def __array__(self, dtype=None, copy=None):
        return self.p.astype(dtype) if dtype is not None else self.p.copy()

    @property
    def vector(self) -> np.ndarray:
        """The vector ``Q p`` in standard coordinates."""
        if self.basis is None:
            return self.p.copy()
        return self.basis @ self.p


def check_unitary(q, tol: float = DEFAULT_TOL.tol_orth) -> np.ndarray:
    q = np.asarray(q)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise BasisNotUnitary("basis must be a square matrix")
    if not np.iscomplexobj(q):
        q = q.astype(float)
    err = np.abs(q.conj().T @ q - np.eye(q.shape[0])).max()
    if err > tol:
        raise BasisNotUnitary(f"basis columns are not orthonormal (error {err:.3g})")
    return q


@dataclass(frozen=True, eq=False)
class FieldVector:
    """Real or complex coordinate vector."""

    entries: np.ndarray
    field: str = "real"

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise InputError(f"unknown field {self.field!r}")
        arr = np.asarray(self.entries)
        if self.field == "real":
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise InputError("real field vector with nonzero imaginary part")
                arr = arr.real
            arr = np.array(arr, dtype=float).ravel()
        else:
            arr = np.array(arr, dtype=complex).ravel()
        object.__setattr__(self, "entries", arr)

    def __len__(self):
        return self.entries.size

    def __iter__(self):
        return iter(self.entries.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.entries.astype(dtype) if dtype is not None else self.entries.copy()

    def __repr__(self):
        return f"FieldVector({self.entries.tolist()}, field={self.field!r})"


def as_vector(v) -> np.ndarray:
    """Plain ndarray (float or complex) from any vector-like input."""
    if isinstance(v, OrthantVector):
        return v.vector
    if isinstance(v, FieldVector):
        return v.entries
    arr = np.asarray(v)
    if np.iscomplexobj(arr):
        return arr.astype(complex).ravel()
    return arr.astype(float).ravel()


@dataclass(frozen=True, eq=False)
class BorderedProblem:
    """The bordered matrix ``[[diag(lam), v], [v*, c]]`` (border ``v`` as a column)."""

    lam: OrderedSpectrum
    v: FieldVector
    c: float

    def __post_init__(self):
        lam = as_spectrum(self.lam, strict=True)
        v = self.v if isinstance(self.v, FieldVector) else _field_vector(self.v)
        if len(v) != len(lam):
            raise LengthMismatch(f"v has length {len(v)}, lambda has length {len(lam)}")
        c = float(self.c)
        if not math.isfinite(c):
            raise InputError("border scalar c must be finite")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", c)

    def matrix(self) -> np.ndarray:
        n = len(self.lam)
        v = self.v.entries
        t = np.zeros((n + 1, n + 1), dtype=v.dtype)
        t[np.arange(n), np.arange(n)] = self.lam.values
        t[n, n] = self.c
        t[:n, n] = v
        t[n, :n] = v.conj()
        return t


def _field_vector(v) -> FieldVector:
    arr = as_vector(v)
    return FieldVector(arr, "complex" if np.iscomplexobj(arr) else "real")


@dataclass(frozen=True)
class FaceProfile:
    """Faces of the image box touched by a target spectrum.

    ``touched`` holds ``(coordinate, LOWER | UPPER)`` pairs; ``shared`` the
    base-eigenvalue indices attained by the target.  ``k`` counts shared
    base eigenvalues, which equals the number of zero coordinates of the
    orthant preimage.
    """

    touched: frozenset = field(default_factory=frozenset)
    shared: tuple = ()

    @property
    def k(self) -> int:
        return len(self.shared)

    def as_dict(self) -> dict:
        return {
            "touched": [[i, kind] for i, kind in sorted(self.touched)],
            "shared": list(self.shared),
            "k": self.k,
        }


# -- interlacing ------------------------------------------------------------

def box_bounds(lam, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate (lower, upper) endpoints of the image box."""
    lam = np.asarray(lam, dtype=float)
    if _check_mode(mode) == RANK_ONE:
        lower = lam.copy()
        upper = np.append(lam[1:], np.inf)
    else:
        lower = np.insert(lam, 0, -np.inf)
        upper = np.append(lam, np.inf)
    return lower, upper


def _pair(lam, mu, mode):
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    want = lam.size if mode == RANK_ONE else lam.size + 1
    if mu.size != want:
        raise LengthMismatch(f"mu has length {mu.size}, expected {want} for mode {mode}")
    return lam, mu


def interlacing_violation(lam, mu, mode: str = RANK_ONE, tol: float = 0.0) -> str | None:
    """First violated inequality as a string, or None when ``mu`` interlaces ``lam``.

    Comparisons are exact when ``tol`` is 0.
    """
    lam, mu = _pair(lam, mu, _check_mode(mode))
    lower, upper = box_bounds(lam, mode)
    # lambda index of the lower/upper endpoint of coordinate i
    lo_off, hi_off = (0, 1) if mode == RANK_ONE else (-1, 0)
    for i, x in enumerate(mu):
        if x < lower[i] - tol:
            return f"mu[{i}] < lambda[{i + lo_off}]"
        if x > upper[i] + tol:
            return f"mu[{i}] > lambda[{i + hi_off}]"
    return None


def check_interlacing_rank_one(lam, mu) -> bool:
    """True iff lam[i] <= mu[i] <= lam[i+1] for every i (no upper bound on the last)."""
    return interlacing_violation(lam, mu, RANK_ONE) is None


def check_interlacing_bordered(lam, mu) -> bool:
    """True iff mu[0] <= lam[0] <= mu[1] <= ... <= lam[n-1] <= mu[n]."""
    return interlacing_violation(lam, mu, BORDERED) is None


def classify_faces(lam, mu, mode: str = RANK_ONE, tol: TolerancePolicy = DEFAULT_TOL) -> FaceProfile:
    lam = as_spectrum(lam, strict=True, tol=tol).values
    lam, mu = _pair(lam, mu, _check_mode(mode))
    eps = tol.face_tol(lam)
    bad = interlacing_violation(lam, mu, mode, tol=eps)
    if bad is not None:
        raise NotInPolytope(bad)
    lower, upper = box_bounds(lam, mode)
    lo_off, hi_off = (0, 1) if mode == RANK_ONE else (-1, 0)
    touched = set()
    shared = set()
    for i, x in enumerate(mu):
        if abs(x - lower[i]) <= eps:
            touched.add((i, LOWER))
            shared.add(i + lo_off)
        if abs(x - upper[i]) <= eps:
            touched.add((i, UPPER))
            shared.add(i + hi_off)
    return FaceProfile(frozenset(touched), tuple(sorted(shared)))


# -- face images ------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Interval closed at finite endpoints and open at infinite ones."""

    lo: float
    hi: float

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return (self.lo - tol <= x) and (x <= self.hi + tol) and math.isfinite(x)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self):
        if self.is_point:
            return f"{{{self.lo:g}}}"
        left = "(" if math.isinf(self.lo) else "["
        right = ")" if math.isinf(self.hi) else "]"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


@dataclass(frozen=True)
class FaceImage:
    """Union of boxes (each a tuple of intervals) forming the image of a domain face."""

    boxes: tuple

    def contains(self, mu: Iterable[float], tol: float = 0.0) -> bool:
        mu = list(mu)
        return any(
            len(box) == len(mu) and all(iv.contains(x, tol) for iv, x in zip(box, mu))
            for box in self.boxes
        )

    def __str__(self):
        return " u ".join("(" + " x ".join(str(iv) for iv in box) + ")" for box in self.boxes)


def _pinned_box(lower, upper, coord, value) -> tuple:
    box = [Interval(float(a), float(b)) for a, b in zip(lower, upper)]
    box[coord] = Interval(float(value), float(value))
    return tuple(box)


def face_image_rank_one(lam: Sequence[float], i: int) -> FaceImage:
    """Image of the domain face ``v_i = 0`` under the rank-one map.

    The face is creased onto two adjoining faces of the box: coordinate i
    pinned at its lower end lam[i], and coordinate i-1 pinned at its upper
    end lam[i].  For i = 0 only the first of these exists.
    """
    lam = as_spectrum(lam, strict=True).values
    n = lam.size
    if not 0 <= i < n:
        raise IndexOutOfRange(f"face index {i} outside 0..{n - 1}")
    lower, upper = box_bounds(lam, RANK_ONE)
    boxes = [_pinned_box(lower, upper, i, lam[i])]
    if i > 0:
        boxes.append(_pinned_box(lower, upper, i - 1, lam[i]))
    return FaceImage(tuple(boxes))


def face_image_bordered(lam: Sequence[float], i: int) -> FaceImage:
    """Image of the face ``v_i = 0`` (c free) under the bordered map."""
    lam = as_spectrum(lam, strict=True).values
    n = lam.size
    if not 0 <= i < n:
        raise IndexOutOfRange(f"face index {i} outside 0..{n - 1}")
    lower, upper = box_bounds(lam, BORDERED)
    return FaceImage((
        _pinned_box(lower, upper, i, lam[i]),
        _pinned_box(lower, upper, i + 1, lam[i]),
    ))
