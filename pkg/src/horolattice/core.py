"""Matrix groups and torus arithmetic for affine lattice dynamics.

The objects here are the raw material everything else is built from:
unimodular real d x d matrices (the linear part of an affine lattice),
their integer subgroup, points of the d-torus with coordinates kept as
exact rationals whenever the input is rational, and the (matrix, torus
point) pairs that parametrize affine lattices.  The one-parameter
diagonal flow and the expanding horospherical coordinate are provided
as constructors.

All values are immutable and freely shareable between threads.  Exact
rational arithmetic is used wherever a downstream check must be
bit-exact (integer matrices acting on rational torus points stay on the
same rational grid, and tests rely on that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import (
    DeterminantError,
    DimensionMismatchError,
    FlowRangeError,
    RationalityError,
)

__all__ = [
    "SplittingSignature",
    "SpecialLinearMatrix",
    "IntegerMatrix",
    "TorusPoint",
    "AffineLatticePoint",
    "matrix_norm",
    "operator_norm",
    "diagonal_flow",
    "horo_embed",
    "affine_apply",
    "torus_act",
    "matrix_to_json",
    "matrix_from_json",
    "torus_to_json",
    "torus_from_json",
]

_EPS = np.finfo(float).eps

#: Unimodularity tolerance at O(1) entry scale.
DET_TOL = 1e-9
#: Below this drift the determinant is left untouched.
DET_RENORM_TOL = 1e-12


def _det_tolerance(scale: float, dim: int) -> float:
    # Float determinant evaluation of a matrix with entries of size s
    # carries absolute noise ~ eps * s^d, so the acceptance threshold
    # must grow with the entry scale; at O(1) scale this is DET_TOL.
    return max(DET_TOL, 64.0 * dim * _EPS * max(1.0, scale) ** dim)


def _unimodular_inverse(a: np.ndarray) -> np.ndarray:
    """Inverse of a (near-)unimodular matrix via the adjugate for d <= 3."""
    d = a.shape[0]
    det = float(np.linalg.det(a))
    if d == 2:
        adj = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]])
        return adj / det
    if d == 3:
        adj = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                minor = np.delete(np.delete(a, j, axis=0), i, axis=1)
                adj[i, j] = ((-1) ** (i + j)) * (
                    minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0]
                )
        return adj / det
    return np.linalg.inv(a)


@dataclass(frozen=True)
class SplittingSignature:
    """Block sizes (m, n) of the diagonal flow diag(e^{nt} Id_m, e^{-mt} Id_n)."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("both blocks of the splitting must be nonempty")

    @property
    def d(self) -> int:
        return self.m + self.n


class SpecialLinearMatrix:
    """A real d x d matrix with determinant 1 and a cached inverse.

    Construction validates unimodularity (scale-aware tolerance, see
    `_det_tolerance`) and renormalizes small determinant drift by
    scaling the first column.  Entries and inverse are read-only numpy
    arrays.
    """

    __slots__ = ("entries", "inverse")

    def __init__(self, entries: np.ndarray, inverse: np.ndarray):
        # Internal constructor; use from_entries() for validated input.
        self.entries = entries
        self.inverse = inverse

    @classmethod
    def from_entries(cls, entries) -> "SpecialLinearMatrix":
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        d = a.shape[0]
        if d < 2:
            raise DimensionMismatchError("dimension must be at least 2")
        det = float(np.linalg.det(a))
        scale = float(np.abs(a).max())
        if abs(det - 1.0) > _det_tolerance(scale, d):
            raise DeterminantError(f"determinant {det!r} is not 1 within tolerance")
        if abs(det - 1.0) > DET_RENORM_TOL:
            a = a.copy()
            a[:, 0] /= det
        inv = _unimodular_inverse(a)
        a.setflags(write=False)
        inv.setflags(write=False)
        return cls(a, inv)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def compose(self, other: "SpecialLinearMatrix") -> "SpecialLinearMatrix":
        if self.dim != other.dim:
            raise DimensionMismatchError("dimension mismatch in product")
        return SpecialLinearMatrix.from_entries(self.entries @ other.entries)

    def __matmul__(self, other: "SpecialLinearMatrix") -> "SpecialLinearMatrix":
        return self.compose(other)

    def apply(self, v) -> np.ndarray:
        return self.entries @ np.asarray(v, dtype=float)

    def transpose(self) -> "SpecialLinearMatrix":
        return SpecialLinearMatrix.from_entries(self.entries.T)

    def inv(self) -> "SpecialLinearMatrix":
        return SpecialLinearMatrix.from_entries(self.inverse)

    def __repr__(self):
        return f"SpecialLinearMatrix({self.entries.tolist()!r})"


def _int_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant (cofactor expansion; d stays small here)."""
    d = len(rows)
    if d == 1:
        return rows[0][0]
    if d == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j in range(d):
        if rows[0][j] == 0:
            continue
        minor = [[row[k] for k in range(d) if k != j] for row in rows[1:]]
        total += ((-1) ** j) * rows[0][j] * _int_det(minor)
    return total


@dataclass(frozen=True)
class IntegerMatrix:
    """An integer d x d matrix; determinant checked exactly when required.

    Entries are Python ints, so nothing overflows.  Group elements
    (determinant +1) are validated with `require_unimodular()`.
    """

    rows: tuple

    @classmethod
    def from_rows(cls, rows) -> "IntegerMatrix":
        tup = tuple(tuple(int(x) for x in row) for row in rows)
        d = len(tup)
        if d < 1 or any(len(r) != d for r in tup):
            raise DimensionMismatchError("expected a square integer matrix")
        return cls(tup)

    @classmethod
    def identity(cls, d: int) -> "IntegerMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d)))

    @classmethod
    def from_array(cls, arr, residual_tol: float = 1e-6) -> "IntegerMatrix":
        """Round a float array to integers, rejecting residuals above tolerance."""
        a = np.asarray(arr, dtype=float)
        rounded = np.rint(a)
        residual = float(np.abs(a - rounded).max())
        if residual > residual_tol:
            raise ValueError(f"rounding residual {residual:g} exceeds {residual_tol:g}")
        return cls.from_rows(rounded.astype(object).tolist())

    @property
    def dim(self) -> int:
        return len(self.rows)

    def det(self) -> int:
        return _int_det(self.rows)

    def require_unimodular(self) -> "IntegerMatrix":
        if self.det() != 1:
            raise DeterminantError(f"integer matrix determinant {self.det()} != +1")
        return self

    def transpose(self) -> "IntegerMatrix":
        d = self.dim
        return IntegerMatrix(tuple(tuple(self.rows[j][i] for j in range(d)) for i in range(d)))

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.dim != other.dim:
            raise DimensionMismatchError("dimension mismatch in product")
        d = self.dim
        return IntegerMatrix(
            tuple(
                tuple(sum(self.rows[i][k] * other.rows[k][j] for k in range(d)) for j in range(d))
                for i in range(d)
            )
        )

    def inv(self) -> "IntegerMatrix":
        """Exact inverse; only valid for determinant +-1 matrices."""
        d = self.dim
        det = self.det()
        if det not in (1, -1):
            raise DeterminantError("only determinant +-1 integer matrices invert exactly")
        cof = [[0] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                minor = [
                    [self.rows[r][c] for c in range(d) if c != j]
                    for r in range(d)
                    if r != i
                ]
                cof[j][i] = ((-1) ** (i + j)) * (_int_det(minor) if d > 1 else 1)
        return IntegerMatrix(tuple(tuple(x * det for x in row) for row in cof))

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def to_int64(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def max_abs_entry(self) -> int:
        return max(abs(x) for row in self.rows for x in row)

    def to_special_linear(self) -> SpecialLinearMatrix:
        self.require_unimodular()
        return SpecialLinearMatrix.from_entries(self.to_array())


Coordinate = Union[Fraction, float]


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^d, either all-rational (exact) or all-floating.

    Coordinates are normalized into [0, 1).  Rational and floating
    coordinates never mix inside one point; downstream invariance tests
    on rational orbits depend on the exact representation surviving
    every group action.
    """

    coords: tuple

    @classmethod
    def from_values(cls, values) -> "TorusPoint":
        vals = list(values)
        if not vals:
            raise DimensionMismatchError("torus point needs at least one coordinate")
        parsed = []
        rational_flags = []
        for v in vals:
            if isinstance(v, Fraction):
                parsed.append(v)
                rational_flags.append(True)
            elif isinstance(v, int):
                parsed.append(Fraction(v))
                rational_flags.append(True)
            elif isinstance(v, str):
                parsed.append(Fraction(v))
                rational_flags.append(True)
            elif isinstance(v, float):
                if not math.isfinite(v):
                    raise ValueError("torus coordinates must be finite")
                parsed.append(v)
                rational_flags.append(False)
            else:
                raise TypeError(f"unsupported coordinate type {type(v)!r}")
        if any(rational_flags) and not all(rational_flags):
            raise RationalityError("rational and floating coordinates cannot mix")
        if all(rational_flags):
            coords = tuple(c % 1 for c in parsed)
        else:
            coords = tuple(c % 1.0 for c in parsed)
        return cls(coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.coords[0], Fraction)

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])

    def denominator(self) -> int:
        if not self.is_rational:
            raise RationalityError("floating torus point has no denominator")
        return math.lcm(*(c.denominator for c in self.coords))


@dataclass(frozen=True)
class AffineLatticePoint:
    """An affine lattice g Z^d + (translation class b), as a pair (g, b)."""

    linear: SpecialLinearMatrix
    torus: TorusPoint

    def __post_init__(self):
        if self.linear.dim != self.torus.dim:
            raise DimensionMismatchError(
                f"linear part is {self.linear.dim}-dimensional, torus part {self.torus.dim}"
            )

    @property
    def dim(self) -> int:
        return self.linear.dim


def matrix_norm(g: SpecialLinearMatrix) -> float:
    """Max absolute entry over g and g^{-1}; symmetric under inversion."""
    return float(max(np.abs(g.entries).max(), np.abs(g.inverse).max()))


def operator_norm(g: SpecialLinearMatrix) -> float:
    """Operator norm for the sup norm on R^d: max absolute row sum."""
    return float(np.abs(g.entries).sum(axis=1).max())


def integer_operator_norm(g: IntegerMatrix) -> int:
    return max(sum(abs(x) for x in row) for row in g.rows)


def diagonal_flow(t: float, sig: SplittingSignature) -> SpecialLinearMatrix:
    """diag(e^{nt} Id_m, e^{-mt} Id_n); rejects |t| d > 600 (overflow)."""
    if abs(t) * sig.d > 600.0:
        raise FlowRangeError(f"flow time {t} overflows double precision for d={sig.d}")
    diag = [math.exp(sig.n * t)] * sig.m + [math.exp(-sig.m * t)] * sig.n
    return SpecialLinearMatrix.from_entries(np.diag(diag))


def diagonal_flow_vector(t: float, sig: SplittingSignature) -> np.ndarray:
    """The diagonal of `diagonal_flow` as a plain vector (bulk-path helper)."""
    if abs(t) * sig.d > 600.0:
        raise FlowRangeError(f"flow time {t} overflows double precision for d={sig.d}")
    return np.array([math.exp(sig.n * t)] * sig.m + [math.exp(-sig.m * t)] * sig.n)


def horo_embed(block, sig: SplittingSignature) -> SpecialLinearMatrix:
    """Embed an m x n block A as [[Id_m, A], [0, Id_n]]; determinant exactly 1."""
    a = np.atleast_2d(np.asarray(block, dtype=float))
    if a.shape != (sig.m, sig.n):
        raise DimensionMismatchError(f"block shape {a.shape} does not match ({sig.m},{sig.n})")
    d = sig.d
    out = np.eye(d)
    out[: sig.m, sig.m :] = a
    return SpecialLinearMatrix.from_entries(out)


def affine_apply(g: SpecialLinearMatrix, y: AffineLatticePoint) -> AffineLatticePoint:
    """Left action on the linear part; the torus coordinate is untouched.

    The fiber coordinate only changes under reduction to the fundamental
    domain; for the induced integer action on the fiber use `torus_act`.
    """
    if g.dim != y.dim:
        raise DimensionMismatchError("dimension mismatch in affine action")
    return AffineLatticePoint(g.compose(y.linear), y.torus)


def torus_act(gamma: IntegerMatrix, b: TorusPoint) -> TorusPoint:
    """gamma . b mod 1, exact when b is rational."""
    if gamma.dim != b.dim:
        raise DimensionMismatchError("dimension mismatch in torus action")
    if b.is_rational:
        coords = tuple(
            sum(Fraction(gamma.rows[i][j]) * b.coords[j] for j in range(b.dim)) % 1
            for i in range(b.dim)
        )
        return TorusPoint(coords)
    vec = gamma.to_array() @ b.as_floats()
    return TorusPoint(tuple(float(x % 1.0) for x in vec))


# -- JSON-friendly serialization -------------------------------------------
#
# Matrices travel as row-major nested lists of numbers; rational torus
# coordinates as "p/q" strings so they survive a round trip exactly.


def matrix_to_json(g: SpecialLinearMatrix) -> list:
    return [[float(x) for x in row] for row in g.entries]


def matrix_from_json(data) -> SpecialLinearMatrix:
    return SpecialLinearMatrix.from_entries(np.array(data, dtype=float))


def torus_to_json(b: TorusPoint) -> list:
    if b.is_rational:
        return [f"{c.numerator}/{c.denominator}" for c in b.coords]
    return [float(c) for c in b.coords]


def torus_from_json(data) -> TorusPoint:
    return TorusPoint.from_values(
        [v if isinstance(v, str) else float(v) for v in data]
    )
