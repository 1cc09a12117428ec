"""Ak-norms of signed sequences and the Ak-distance polynomial-vs-empirical.

The continuous distance between a (nearly nonnegative) polynomial and an
empirical distribution over an interval reduces exactly, up to 2*mu, to a
discrete problem on an alternating sequence of gap integrals and atom
masses; the discrete problem is solved exactly by iterative minimum-weight
merging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import collapse_runs, dak_merge, selection_value
from .empirical import EmpiricalDistribution
from .intervals import Interval
from .poly import Polynomial, antiderivative, poly_eval

_BRUTE_FORCE_LIMIT = 24


@dataclass
class IntervalSelection:
    """Disjoint 1-based index intervals of a sequence and their total |weight|.

    ``value`` is always recomputed from the raw entries of the selection, so
    it matches sum |w(I)| to machine precision by construction.
    """

    intervals: list[tuple[int, int]]
    value: float


def _selection_from_kernel(weights: np.ndarray, cnt: int, sel_lo, sel_hi) -> IntervalSelection:
    ivls = [(int(sel_lo[i]) + 1, int(sel_hi[i]) + 1) for i in range(cnt)]
    value = float(selection_value(weights, cnt, sel_lo, sel_hi))
    return IntervalSelection(ivls, value)


def discrete_ak(weights, k: int) -> IntervalSelection:
    """Exact optimum of sum |w(I)| over <= k disjoint index intervals.

    Same-sign runs are collapsed first (zero entries attach to the run on
    their right), then the minimum-|weight| interval is repeatedly merged
    with its neighbours, keeping the best top-k snapshot.  Ties in the
    minimum go to the smallest index.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("need a nonempty 1-d weight sequence")
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite")
    if k < 1:
        raise ValueError("k must be >= 1")
    run_w, run_lo, run_hi = collapse_runs(weights)
    _, cnt, sel_lo, sel_hi = dak_merge(run_w, run_lo, run_hi, k)
    return _selection_from_kernel(weights, cnt, sel_lo, sel_hi)


def brute_force_ak(weights, k: int) -> IntervalSelection:
    """Exhaustive dynamic program over all <= k disjoint interval selections.

    Test oracle; guarded to short sequences.
    """
    weights = np.asarray(weights, dtype=np.float64)
    r = weights.size
    if r == 0:
        raise ValueError("empty sequence")
    if r > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to r <= {_BRUTE_FORCE_LIMIT}")
    if k < 1:
        raise ValueError("k must be >= 1")
    # dp[j][i]: best value over the first i entries using <= j intervals,
    # with parent pointers for reconstruction.
    kk = min(k, r)
    NEG = -1.0
    dp = np.zeros((kk + 1, r + 1))
    choice = np.zeros((kk + 1, r + 1), dtype=np.int64)  # 0: skip, >0: interval [a, i]
    for j in range(1, kk + 1):
        for i in range(1, r + 1):
            dp[j][i] = dp[j][i - 1]
            choice[j][i] = 0
            s = 0.0
            for a in range(i, 0, -1):
                s += weights[a - 1]
                cand = dp[j - 1][a - 1] + abs(s)
                if cand > dp[j][i]:
                    dp[j][i] = cand
                    choice[j][i] = a
    ivls = []
    j, i = kk, r
    while j > 0 and i > 0:
        a = choice[j][i]
        if a == 0:
            i -= 1
        else:
            ivls.append((int(a), int(i)))
            i = a - 1
            j -= 1
    ivls.reverse()
    value = sum(abs(float(np.sum(weights[a - 1 : b]))) for a, b in ivls)
    return IntervalSelection(ivls, float(value))


def _restrict(emp: EmpiricalDistribution, J: Interval):
    """Unique sample positions and multiplicities of emp inside J."""
    lo = np.searchsorted(emp.unique, J.left, side="left" if J.left_closed else "right")
    hi = np.searchsorted(emp.unique, J.right, side="right" if J.right_closed else "left")
    return emp.unique[lo:hi], emp.counts[lo:hi]


def build_discrete_sequence(p: Polynomial, emp: EmpiricalDistribution, J: Interval) -> np.ndarray:
    """Alternating sequence of gap integrals of p and negated atom masses on J.

    Length 2s+1 for s distinct sample positions in J: entries at even 0-based
    positions are exact antiderivative differences P(x_{l+1}) - P(x_l) over
    the gaps (with J's endpoints closing the ends), odd positions carry
    -(multiplicity)/n.
    """
    xs, cnt = _restrict(emp, J)
    P = antiderivative(p.coeffs)
    pts = np.concatenate(([J.left], xs, [J.right]))
    Pv = np.atleast_1d(poly_eval(P, pts))
    gaps = np.diff(Pv)
    s = xs.size
    seq = np.empty(2 * s + 1)
    seq[0::2] = gaps
    if s:
        seq[1::2] = -cnt / emp.n
    return seq


@dataclass
class AkResult:
    """Value plus the achieving continuous intervals and their signed discrepancies."""

    value: float
    intervals: list[Interval]
    signed: list[float]


def compute_ak(p: Polynomial, emp: EmpiricalDistribution, J: Interval, k: int, mu: float) -> AkResult:
    """Ak-distance between p and the empirical distribution on J, within 2*mu.

    Requires p >= -mu on J (the caller guarantees this via the non-negativity
    test).  Runs the discrete reduction, solves it exactly, and maps the
    selected index intervals back to continuous intervals: an endpoint that
    is an atom entry includes the sample point, a gap entry excludes it.
    """
    seq = build_discrete_sequence(p, emp, J)
    xs, cnt = _restrict(emp, J)
    run_w, run_lo, run_hi = collapse_runs(seq)
    _, cntk, sel_lo, sel_hi = dak_merge(run_w, run_lo, run_hi, k)
    nseq = seq.size
    value = 0.0
    intervals: list[Interval] = []
    signed: list[float] = []
    for i in range(cntk):
        a_e, b_e = int(sel_lo[i]), int(sel_hi[i])
        ssum = float(np.sum(seq[a_e : b_e + 1]))
        if a_e % 2 == 1:
            left, lclosed = float(xs[(a_e - 1) // 2]), True
        else:
            left = J.left if a_e == 0 else float(xs[a_e // 2 - 1])
            lclosed = False
        if b_e % 2 == 1:
            right, rclosed = float(xs[(b_e - 1) // 2]), True
        else:
            right = J.right if b_e == nseq - 1 else float(xs[b_e // 2])
            rclosed = False
        if left == right:
            # empty boundary gap or a single atom: report a closed singleton
            lclosed = rclosed = True
        intervals.append(Interval(left, right, lclosed, rclosed))
        signed.append(ssum)
        value += abs(ssum)
    return AkResult(value, intervals, signed)
