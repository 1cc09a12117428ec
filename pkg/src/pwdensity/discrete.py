"""Discrete-domain ([N] = {1..N}) adaptations: flattening, power sums, nonnegativity.

The merging loop works unchanged over an ordered discrete support; only the
flattening (mass spread over integer points instead of length) and the gap
weights of the Ak reduction (power sums instead of integrals) differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .empirical import EmpiricalDistribution
from .intervals import Interval
from .merging import (
    MergeConfig,
    HypothesisPiece,
    PiecewiseHypothesis,
    _Engine,
    _StartEndPair,
    _merge_loop,
)
from .poly import coeff_bound, poly_eval, affine_compose
from .roots import approx_real_roots


@dataclass(frozen=True)
class DiscreteInterval:
    """Integer endpoints lo <= hi inside [1, N]."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty discrete interval")

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


def discrete_flatten(emp: EmpiricalDistribution, J: DiscreteInterval) -> float:
    """Constant pmf value spreading the empirical mass of J over its points."""
    mass = emp.mass(Interval(float(J.lo), float(J.hi)))
    return mass / J.width


@lru_cache(maxsize=None)
def _bernoulli(j: int) -> Fraction:
    # standard convention with B_1 = -1/2
    if j == 0:
        return Fraction(1)
    s = Fraction(0)
    for i in range(j):
        s += Fraction(math.comb(j + 1, i)) * _bernoulli(i)
    return -s / (j + 1)


def _power_sum_to(n: int, j: int) -> int:
    """Exact sum of l^j for l = 1..n (0 for n <= 0), via Faulhaber's formula."""
    if n <= 0:
        return 0
    total = Fraction(0)
    for i in range(j + 1):
        b = _bernoulli(i)
        if i == 1:
            b = -b  # the inclusive upper sum uses B_1 = +1/2
        total += Fraction(math.comb(j + 1, i)) * b * Fraction(n) ** (j + 1 - i)
    total /= j + 1
    assert total.denominator == 1
    return int(total)


def prefix_power_sum(lo: int, hi: int, j: int) -> float:
    """Exact sum of l^j over integers l in [lo, hi], computed in integer arithmetic."""
    if lo > hi:
        raise ValueError("lo must be <= hi")
    if j < 0:
        raise ValueError("j must be >= 0")
    return float(_power_sum_to(hi, j) - _power_sum_to(lo - 1, j))


def discrete_test_nonneg(coeffs, J: DiscreteInterval, alpha: float | None = None) -> int | None:
    """Find an integer i in J with p(i) < 0, or None if p >= 0 on all of J.

    Locates the approximate real roots of p (to precision 1/4 after mapping J
    onto [-1, 1]) and evaluates p at the integers within distance 3 of each
    root plus the endpoints; p cannot change sign between consecutive roots,
    so a negative point is always caught.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
    lo, hi = J.lo, J.hi
    if hi - lo <= 64:
        candidates = np.arange(lo, hi + 1)
    else:
        scale = (hi - lo) / 2.0
        shift = (hi + lo) / 2.0
        canon = affine_compose(coeffs, scale, shift)
        amax = max(float(np.max(np.abs(canon))), 1.0)
        prec = 0.25 / scale
        report = approx_real_roots(canon, prec * amax / 2.0, prec)
        pts = {lo, hi}
        for r in report.approx_roots:
            center = r * scale + shift
            base = int(math.floor(center))
            for off in range(-3, 5):
                i = base + off
                if lo <= i <= hi:
                    pts.add(i)
        candidates = np.array(sorted(pts))
    vals = np.atleast_1d(poly_eval(coeffs, candidates.astype(np.float64)))
    i = int(np.argmin(vals))
    if vals[i] < 0:
        return int(candidates[i])
    return None


# ---------------------------------------------------------------------------
# merging over [N]
# ---------------------------------------------------------------------------


def _span_int_bounds(eng: _Engine, starts, ends):
    """First and last integer point covered by each span.

    A span opening with an interior gap excludes the sample at its left
    coordinate (the gap is open there); likewise on the right.  Boundary
    gaps touch the domain endpoints inclusively.
    """
    starts = np.asarray(starts)
    ends = np.asarray(ends)
    c0 = starts + eng.off
    c1 = ends - 1 + eng.off
    left = np.where(c0 == 0, eng.a, eng.u[np.maximum((c0 - 1) // 2, 0)])
    right = np.where(c1 == 2 * eng.m, eng.b, eng.u[np.minimum(c1 // 2, eng.m - 1)])
    l_at = (c0 % 2 == 1) | (starts == 0)
    r_at = (c1 % 2 == 1) | (ends == eng.n_elem)
    lp = np.where(l_at, left, left + 1.0)
    rp = np.where(r_at, right, right - 1.0)
    return lp, rp


class DiscreteHistogramOracles(_StartEndPair):
    """Flattening over integer points, exact discrete A1-error."""

    degree = 0

    def batch_errors(self, eng: _Engine, starts, ends, eta_call: float) -> np.ndarray:
        lp, rp = _span_int_bounds(eng, starts, ends)
        lo = (np.asarray(starts) + eng.off) // 2
        hi = (np.asarray(ends) + eng.off) // 2
        return _kernels.a1_errors_batch_discrete(lo, hi, lp, rp, eng.u, eng.cumw)

    def fit_piece(self, eng: _Engine, e0: int, e1: int, eta_call: float) -> np.ndarray:
        mass = float(eng.span_mass(e0, e1))
        lp, rp = _span_int_bounds(eng, np.array([e0]), np.array([e1]))
        width = float(rp[0] - lp[0]) + 1.0
        if width <= 0:
            return np.zeros(1)
        return np.array([mass / width])


class DiscreteLinearOracles(_StartEndPair):
    """Degree-<=1 pair over [N]: gap weights are exact power sums.

    Same cutting-plane solver as the continuous fast path, with the
    gap-integral sequence replaced by sums of p over the integer gaps; for
    degree <= 1 nonnegativity on an integer interval is the two endpoint
    constraints, so the canonical wedge still applies.
    """

    def __init__(self, degree: int, rank_quality: float = 0.25, fit_quality: float = 0.05):
        if degree > 1:
            raise ValueError("discrete polynomial fitting supports degree <= 1")
        self.degree = degree
        self.k = degree + 1
        self.rank_quality = rank_quality
        self.fit_quality = fit_quality

    def _solve(self, eng: _Engine, e0: int, e1: int, eta_call: float, quality: float):
        lo_u, hi_u = eng.span_u_range(e0, e1)
        mass = eng.cumw[hi_u] - eng.cumw[lo_u]
        lp, rp = _span_int_bounds(eng, np.array([e0]), np.array([e1]))
        lp, rp = float(lp[0]), float(rp[0])
        scale = max((rp - lp) / 2.0, 0.5)
        shift = (rp + lp) / 2.0
        xs = eng.u[lo_u:hi_u]
        us = (xs - shift) / scale
        tot = eng.emp.cum_counts[hi_u] - eng.emp.cum_counts[lo_u]
        ws = (eng.emp.counts[lo_u:hi_u] / tot).astype(np.float64)
        # integer gaps between consecutive sample values (and the boundary runs)
        ga = np.concatenate(([lp], xs + 1.0))
        gb = np.concatenate((xs - 1.0, [rp]))
        cnt = np.maximum(gb - ga + 1.0, 0.0)
        ssum = np.where(cnt > 0, (ga + gb) * cnt / 2.0, 0.0)
        gap_su = (ssum - cnt * shift) / scale
        eta_c = eta_call / mass
        s = hi_u - lo_u
        tol = min(eta_c, max(quality * math.sqrt((self.k + 1.0) / s), 1e-7))
        rbox = coeff_bound(self.degree, 2.0)
        c, v, gap, rounds = _kernels.kelley_project_discrete(
            np.ascontiguousarray(us), ws, cnt, gap_su, self.degree, self.k, tol, rbox, 100
        )
        return c, float(v) * mass, scale, shift

    def batch_errors(self, eng: _Engine, starts, ends, eta_call: float) -> np.ndarray:
        masses = eng.span_mass(starts, ends)
        errors = np.asarray(masses, dtype=np.float64).copy()
        solve = np.nonzero(masses > eta_call)[0]
        for i in solve:
            _, err, _, _ = self._solve(eng, int(starts[i]), int(ends[i]), eta_call, self.rank_quality)
            errors[i] = err
        return errors

    def fit_piece(self, eng: _Engine, e0: int, e1: int, eta_call: float) -> np.ndarray:
        mass = float(eng.span_mass(e0, e1))
        if mass <= 0:
            return np.zeros(self.degree + 1)
        c, _, scale, shift = self._solve(eng, e0, e1, eta_call, self.fit_quality)
        c = np.asarray(c, dtype=np.float64).copy()
        if c.size > 1 and abs(c[1]) - c[0] > 0:
            c[0] += abs(c[1]) - c[0]
        elif c.size == 1 and c[0] < 0:
            c[0] = 0.0
        cc = affine_compose(c, 1.0 / scale, -shift / scale)
        return cc * (mass / scale)


def fit_discrete(samples, N: int, cfg: MergeConfig) -> PiecewiseHypothesis:
    """Merge over the ordered support [1, N]; values in the output are pmf values."""
    samples = np.asarray(samples)
    ints = np.sort(samples.astype(np.int64))
    if ints.size and (ints[0] < 1 or ints[-1] > N):
        raise ValueError("discrete samples must lie in [1, N]")
    emp = EmpiricalDistribution(ints.astype(np.float64), Interval(1.0, float(N)))
    if cfg.degree == 0:
        pair = DiscreteHistogramOracles()
    elif cfg.degree == 1:
        pair = DiscreteLinearOracles(cfg.degree)
    else:
        raise NotImplementedError("discrete mode supports degree <= 1")
    eng = _Engine(emp)
    bnd = _merge_loop(eng, cfg, pair)
    eta_call = cfg.epsilon / (2.0 * cfg.alpha * cfg.t)
    pieces = []
    for i in range(bnd.size - 1):
        e0, e1 = int(bnd[i]), int(bnd[i + 1])
        ivl = eng.span_interval(e0, e1)
        if ivl.is_singleton:
            pieces.append(HypothesisPiece(ivl, np.array([float(eng.span_mass(e0, e1))])))
        else:
            pieces.append(HypothesisPiece(ivl, np.asarray(pair.fit_piece(eng, e0, e1, eta_call))))
    return PiecewiseHypothesis(pieces, emp.domain, cfg.degree, emp.n)
