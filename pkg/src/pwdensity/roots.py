"""Approximate real-root location on [-1, 1] and the approximate non-negativity tester.

Root location uses Sturm-sequence counting plus interval subdivision down to
the requested precision.  This meets the same contract as asymptotically
faster root finders (every real root of the truncated polynomial lies within
the precision of some reported point) and is robust at the degrees used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import poly_eval, derivative

_REM_TINY = 1e-13


@dataclass
class RootReport:
    """Approximate roots plus the precision they were located to."""

    approx_roots: np.ndarray
    precision: float

    def __iter__(self):
        return iter(self.approx_roots)


def _strip(coeffs: np.ndarray) -> np.ndarray:
    """Drop exact-zero leading-degree coefficients."""
    nz = np.nonzero(coeffs)[0]
    if nz.size == 0:
        return np.zeros(1)
    return coeffs[: nz[-1] + 1]


def truncate(coeffs, nu: float) -> np.ndarray:
    """Drop leading terms whose coefficients fall below nu / (2d).

    The dropped tail changes the polynomial by at most nu/4 in sup-norm on
    [-1, 1].  If every coefficient is tiny the zero polynomial is returned.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
    d = max(coeffs.size - 1, 1)
    keep = np.nonzero(np.abs(coeffs) >= nu / (2 * d))[0]
    if keep.size == 0:
        return np.zeros(1)
    return coeffs[: keep[-1] + 1].copy()


def _sturm_chain(coeffs: np.ndarray) -> list[np.ndarray]:
    """Sturm chain p, p', -rem(...), each member scaled to unit max-norm.

    Near-zero remainders terminate the chain (the previous member is then a
    numerical gcd, which still counts distinct roots correctly).
    """
    p0 = _strip(np.asarray(coeffs, dtype=np.float64))
    if p0.size == 1:
        return [p0]
    chain = [p0 / np.max(np.abs(p0))]
    p1 = _strip(derivative(chain[0]))
    if np.max(np.abs(p1)) == 0.0:
        return chain
    chain.append(p1 / np.max(np.abs(p1)))
    while chain[-1].size > 1:
        a, b = chain[-2], chain[-1]
        # long division in descending order
        rem = np.polydiv(a[::-1], b[::-1])[1][::-1]
        rem = _strip(np.asarray(rem, dtype=np.float64))
        scale = np.max(np.abs(rem))
        if scale < _REM_TINY:
            break
        chain.append(-rem / scale)
    return chain


def _variations(chain: list[np.ndarray], x: float) -> int:
    count = 0
    prev = 0.0
    for c in chain:
        v = poly_eval(c, x)
        if v == 0.0:
            continue
        if prev != 0.0 and (v > 0) != (prev > 0):
            count += 1
        prev = v
    return count


def _count_roots(chain, a: float, b: float) -> int:
    """Number of distinct real roots in (a, b]."""
    return _variations(chain, a) - _variations(chain, b)


def approx_real_roots(coeffs, nu: float, mu: float) -> RootReport:
    """Locate the real roots of the nu-truncated polynomial on [-1, 1].

    Every real root of the truncation in [-1, 1] lies within mu of some
    reported point.  Clustered or multiple roots may share one report.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    q = truncate(coeffs, nu)
    if q.size == 1:
        return RootReport(np.empty(0), mu)  # constant: no roots (zero poly degenerate)
    chain = _sturm_chain(q)
    lo, hi = -1.0 - mu, 1.0 + mu
    # widen the left end slightly so a root exactly at lo is counted by (a, b]
    active = [(lo - mu * 0.5, hi)]
    roots: list[float] = []
    while active:
        nxt = []
        for a, b in active:
            if _count_roots(chain, a, b) == 0:
                continue
            if b - a <= mu:
                roots.append((a + b) / 2)
                continue
            m = (a + b) / 2
            nxt.append((a, m))
            nxt.append((m, b))
        active = nxt
    roots = [r for r in sorted(roots) if -1.0 - mu <= r <= 1.0 + mu]
    return RootReport(np.asarray(roots), mu)


def test_nonneg(coeffs, mu: float, alpha: float | None = None) -> float | None:
    """Approximate non-negativity test on [-1, 1].

    Returns None ("OK") or a witness x with p(x) < -mu/2.  Whenever some
    point has p < -mu, a witness is returned.  Works by locating the
    critical points of p (roots of p') and evaluating p there and at the
    interval endpoints.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
    d = max(coeffs.size - 1, 1)
    if alpha is None:
        alpha = max(float(np.max(np.abs(coeffs))), 1.0)
    nu_p = mu / (4.0 * alpha * d * (d + 1))
    dp = derivative(coeffs)
    report = approx_real_roots(dp, nu_p, nu_p)
    pts = [-1.0, 1.0]
    pts.extend(float(np.clip(r, -1.0, 1.0)) for r in report.approx_roots)
    pts = np.asarray(pts)
    vals = poly_eval(coeffs, pts)
    vals = np.atleast_1d(vals)
    i = int(np.argmin(vals))
    if vals[i] < -mu / 2:
        return float(pts[i])
    return None
