"""Fourier and concentration analysis of empirical torus measures.

Fourier coefficients of rational sample clouds are evaluated with exact
phases: the dot products m . b are reduced mod 1 in integer arithmetic
over the common denominator before any complex exponential is formed,
so grid identities (coefficient exactly 1 on the dual grid) survive to
the last bit of the weight sum.

`flatten_weights` is the constructive search for the weight-flattening
decomposition: given a nonnegatively weighted family with one large
weighted average, it finds a half-size column subset whose plain
averages are large on a definite fraction of the rows.  The search
follows the probabilistic argument directly (sector pigeonhole, greedy
window, Bernoulli sampling with an exhaustive fallback) and its output
is always re-verified against the two conclusion inequalities rather
than trusted from the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .core import TorusPoint
from .orbits import EmpiricalTorusMeasure

__all__ = [
    "FourierSpectrum",
    "fourier_coefficient",
    "fourier_spectrum",
    "large_coefficient_set",
    "ball_mass",
    "max_concentration",
    "FlatteningInstance",
    "FlatteningResult",
    "FlatteningSearchError",
    "flatten_weights",
]

_MAX_BOX = 10_000_000


def fourier_coefficient(nu: EmpiricalTorusMeasure, m) -> complex:
    """sum_i w_i exp(-2 pi i m . b_i); exact phases for rational clouds."""
    mv = np.asarray(m, dtype=np.int64)
    if mv.shape != (nu.dim,):
        raise ValueError(f"frequency shape {mv.shape} does not match dimension {nu.dim}")
    if not mv.any():
        return complex(1.0, 0.0)
    if nu.is_rational:
        q = nu.denominator
        phases = (nu.numerators @ mv) % q
        roots = np.exp(-2j * np.pi * np.arange(q) / q)
        acc = np.bincount(phases.astype(np.intp), weights=nu.weights, minlength=q)
        return complex(acc @ roots)
    angles = -2.0 * np.pi * (nu.coords @ mv.astype(float))
    return complex(np.sum(nu.weights * np.exp(1j * angles)))


@dataclass
class FourierSpectrum:
    """Coefficients on a centered frequency box, keyed by integer vectors."""

    dim: int
    coeffs: Dict[tuple, complex]
    sample_count: int

    def __getitem__(self, m) -> complex:
        return self.coeffs[tuple(int(x) for x in m)]

    @property
    def noise_floor(self) -> float:
        """CLT floor 5/sqrt(N) below which decay claims are refused."""
        return 5.0 / math.sqrt(self.sample_count)


def fourier_spectrum(nu: EmpiricalTorusMeasure, max_freq: int) -> FourierSpectrum:
    """All coefficients with sup norm of the frequency at most max_freq."""
    if max_freq < 0:
        raise ValueError("max_freq must be nonnegative")
    side = 2 * max_freq + 1
    if side**nu.dim > _MAX_BOX:
        raise ValueError("frequency box too large")
    rng = range(-max_freq, max_freq + 1)
    coeffs: Dict[tuple, complex] = {}

    def fill(prefix):
        if len(prefix) == nu.dim:
            coeffs[prefix] = fourier_coefficient(nu, prefix)
            return
        for k in rng:
            fill(prefix + (k,))

    fill(())
    return FourierSpectrum(nu.dim, coeffs, nu.size)


def large_coefficient_set(spec: FourierSpectrum, R: int, eta: float):
    """Nonzero frequencies in the sup ball of radius R with |coeff| >= eta."""
    out = []
    for m, c in spec.coeffs.items():
        if any(m) and max(abs(x) for x in m) <= R and abs(c) >= eta:
            out.append(m)
    out.sort()
    return out


def _circular_sup_distance(coords: np.ndarray, p: np.ndarray) -> np.ndarray:
    diff = np.abs(coords - p)
    return np.max(np.minimum(diff, 1.0 - diff), axis=1)


def ball_mass(nu: EmpiricalTorusMeasure, p, rho: float) -> float:
    """Weight within wrap-around sup distance rho of p."""
    if not (0 < rho < 0.5):
        raise ValueError("rho must lie in (0, 1/2)")
    pv = p.as_floats() if isinstance(p, TorusPoint) else np.asarray(p, dtype=float) % 1.0
    return float(nu.weights[_circular_sup_distance(nu.coords, pv) <= rho].sum())


def max_concentration(nu: EmpiricalTorusMeasure, rho: float):
    """Center maximizing the ball mass over the rho/2 grid plus samples.

    Returns (TorusPoint, mass) with a deterministic lexicographic pick
    among tied centers.
    """
    if not (0 < rho < 0.5):
        raise ValueError("rho must lie in (0, 1/2)")
    steps = int(math.ceil(2.0 / rho))
    if steps**nu.dim > _MAX_BOX:
        raise ValueError("concentration grid too large")
    axes = [np.arange(steps) * (rho / 2.0) for _ in range(nu.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1) % 1.0
    centers = np.vstack([grid, nu.coords])
    best_mass = -1.0
    best_center = None
    chunk = max(1, _MAX_BOX // max(nu.size, 1))
    for start in range(0, centers.shape[0], chunk):
        block = centers[start : start + chunk]
        diff = np.abs(block[:, None, :] - nu.coords[None, :, :])
        dist = np.minimum(diff, 1.0 - diff).max(axis=2)
        masses = (dist <= rho) @ nu.weights
        for j in range(block.shape[0]):
            mass = float(masses[j])
            if mass > best_mass + 1e-15:
                best_mass = mass
                best_center = tuple(float(x) for x in block[j])
            elif abs(mass - best_mass) <= 1e-15 and tuple(block[j]) < best_center:
                best_center = tuple(float(x) for x in block[j])
    return TorusPoint.from_values(list(best_center)), best_mass


class FlatteningSearchError(RuntimeError):
    """The randomized search exhausted its retries (|J| > 20 only)."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass
class FlatteningInstance:
    """Weighted family (a_ij, b_ij) satisfying the flattening hypotheses.

    a is nonnegative with a_ij <= lam / |I x J|; the weighted average
    |sum a_ij b_ij| is at least tau; |b_ij| <= 1.
    """

    a: np.ndarray
    b: np.ndarray
    lam: float
    tau: float

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=complex)
        if self.a.shape != self.b.shape or self.a.ndim != 2:
            raise ValueError("a and b must be matching 2-d arrays")
        if np.any(self.a < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.abs(self.b) > 1.0 + 1e-12):
            raise ValueError("b entries must have modulus at most 1")
        size = self.a.size
        if np.any(self.a > self.lam / size * (1 + 1e-12)):
            raise ValueError("weight cap a_ij <= lam/|IxJ| violated")
        if abs((self.a * self.b).sum()) < self.tau * (1 - 1e-12):
            raise ValueError("weighted average below tau")

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    @property
    def n_cols(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class FlatteningResult:
    """A verified (J', I'') pair with the thresholds it satisfies."""

    cols: tuple
    rows: tuple
    row_threshold: float
    row_count_bound: float


def _verify_flattening(inst: FlatteningInstance, cols) -> Optional[FlatteningResult]:
    nJ = inst.n_cols
    if len(cols) < nJ / 2.0 - 1e-9:
        return None
    thr = inst.tau / (2**6 * inst.lam)
    sums = np.abs(inst.b[:, list(cols)].sum(axis=1)) / nJ
    rows = tuple(int(i) for i in np.nonzero(sums >= thr)[0])
    need = inst.tau**3 / (2**17 * inst.lam**3) * inst.n_rows
    if len(rows) >= need:
        return FlatteningResult(tuple(int(j) for j in cols), rows, thr, need)
    return None


def flatten_weights(
    inst: FlatteningInstance,
    seed: int = 0,
    max_retries: int = 10_000,
) -> FlatteningResult:
    """Find a half-size column set flattening the weighted average.

    Search: pick the phase sector maximizing the sector sum over a
    16-point grid, take the heavy entries in that sector, choose a
    window J0 carrying a quarter of their column incidence by a greedy
    scan over contiguous windows, then sample Bernoulli subsets of J0
    (the complement always stays in).  For n_cols <= 20 an exhaustive
    sweep over subsets of J0 backs the randomized phase, so failure is
    only possible above that size.  The returned pair is re-verified
    against the conclusion inequalities; the construction is never
    trusted on its own.
    """
    nI, nJ = inst.n_rows, inst.n_cols
    size = inst.a.size
    heavy = (inst.a >= inst.tau / (2.0 * size)) & (np.abs(inst.b) >= inst.tau / (2.0 * inst.lam))
    best_theta = 0.0
    best_sum = -1.0
    for k in range(16):
        theta = 2.0 * np.pi * k / 16.0
        sector = heavy & (np.abs(np.angle(inst.b * np.exp(-1j * theta))) <= np.pi / 4.0)
        s = abs((inst.a * inst.b)[sector].sum())
        if s > best_sum:
            best_sum = s
            best_theta = theta
    sector = heavy & (np.abs(np.angle(inst.b * np.exp(-1j * best_theta))) <= np.pi / 4.0)
    col_weight = sector.sum(axis=0).astype(float)

    # greedy contiguous window carrying >= 1/4 of the incidence mass
    w = max(nJ // 4, 1)
    best_win = None
    for width in range(nJ // 2, w - 1, -1):
        for start in range(nJ):
            cols = [(start + j) % nJ for j in range(width)]
            if col_weight[cols].sum() * 4 >= col_weight.sum():
                best_win = cols
                break
        if best_win is not None:
            break
    if best_win is None:
        best_win = list(range(max(nJ // 4, 1)))
    j0 = sorted(best_win)
    rest = [j for j in range(nJ) if j not in set(j0)]

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed)))
    for _ in range(max_retries):
        mask = rng.integers(0, 2, size=len(j0)).astype(bool)
        cols = tuple(sorted(rest + [j for j, keep in zip(j0, mask) if keep]))
        res = _verify_flattening(inst, cols)
        if res is not None:
            return res
    if nJ <= 20:
        best = None
        for bits in range(1 << len(j0)):
            subset = [j0[i] for i in range(len(j0)) if bits >> i & 1]
            cols = tuple(sorted(rest + subset))
            res = _verify_flattening(inst, cols)
            if res is not None:
                return res
        raise FlatteningSearchError(
            "exhaustive flattening sweep failed; hypotheses violated upstream", best
        )
    raise FlatteningSearchError("randomized flattening search exhausted", None)
