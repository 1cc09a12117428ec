"""Polynomials in the monomial basis with an attached domain interval.

Everything here sticks to the monomial basis on a canonical [-1, 1] domain;
conditioning is acceptable because all fits in this package use degree <= ~8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intervals import Interval
from .empirical import EmpiricalDistribution

SQRT2P1 = np.sqrt(2.0) + 1.0

# Per-point Horner is exact and cache friendly; the subproduct-tree path only
# pays off far beyond desk-scale sizes.
_SUBPRODUCT_THRESHOLD = 512


@dataclass(frozen=True)
class AffineMap:
    """x = scale * u + shift, with scale > 0 (maps canonical u to original x)."""

    scale: float
    shift: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("affine map must have positive scale")

    def forward(self, u):
        return self.scale * np.asarray(u) + self.shift

    def inverse(self, x):
        return (np.asarray(x) - self.shift) / self.scale


class Polynomial:
    """Coefficients c_0..c_d (ascending) plus the interval the fit lives on."""

    def __init__(self, coeffs, domain: Interval):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
        if coeffs.size == 0:
            coeffs = np.zeros(1)
        self.coeffs = coeffs
        self.domain = domain

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return poly_eval(self.coeffs, x)

    def antiderivative(self) -> "Polynomial":
        return Polynomial(antiderivative(self.coeffs), self.domain)

    def integrate(self, a: float, b: float) -> float:
        return integrate(self.coeffs, a, b)

    def derivative(self) -> "Polynomial":
        return Polynomial(derivative(self.coeffs), self.domain)

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()}, domain={self.domain})"


def poly_eval(coeffs, x):
    """Horner evaluation; exact for degree 0."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, coeffs[-1], dtype=np.float64)
    for c in coeffs[-2::-1]:
        out = out * x + c
    if out.ndim == 0:
        return float(out)
    return out


def _subproduct_eval(coeffs, xs):
    # Build the subproduct tree of (x - x_i), then push the polynomial down by
    # taking remainders; leaves hold the values.
    pts = [np.array([-x, 1.0]) for x in xs]
    tree = [pts]
    while len(tree[-1]) > 1:
        level = tree[-1]
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(np.convolve(level[i], level[i + 1]))
        if len(level) % 2:
            nxt.append(level[-1])
        tree.append(nxt)

    def rem(p, q):
        r = np.polydiv(p[::-1], q[::-1])[1][::-1]
        out = np.zeros(max(q.size - 1, 1))
        out[: r.size] = r
        return out

    rems = [np.asarray(coeffs, dtype=np.float64)]
    for level in tree[-2::-1]:
        new = []
        k = 0
        parent = 0
        while k < len(level):
            if k + 1 < len(level):
                new.append(rem(rems[parent], level[k]))
                new.append(rem(rems[parent], level[k + 1]))
                k += 2
            else:
                new.append(rems[parent])
                k += 1
            parent += 1
        rems = new
    return np.array([r[0] for r in rems])


def multipoint_eval(coeffs, xs) -> np.ndarray:
    """Evaluate at many points; switches to a subproduct tree on very large inputs."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size > _SUBPRODUCT_THRESHOLD and coeffs.size > _SUBPRODUCT_THRESHOLD:
        return _subproduct_eval(coeffs, xs)
    return np.atleast_1d(poly_eval(coeffs, xs))


def antiderivative(coeffs) -> np.ndarray:
    """P(x) = sum c_i x^{i+1} / (i+1), constant term zero."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return np.concatenate(([0.0], coeffs / np.arange(1, coeffs.size + 1)))


def derivative(coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.size <= 1:
        return np.zeros(1)
    return coeffs[1:] * np.arange(1, coeffs.size)


def integrate(coeffs, a: float, b: float) -> float:
    P = antiderivative(coeffs)
    return float(poly_eval(P, b) - poly_eval(P, a))


def coeff_bound(d: int, alpha: float) -> float:
    """|c_i| <= alpha * (d+1)^2 * (sqrt(2)+1)^d for nonnegative p with integral <= alpha.

    Sizes the ball that encloses every feasible coefficient vector.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return alpha * (d + 1) ** 2 * SQRT2P1**d


def affine_compose(coeffs, scale: float, shift: float) -> np.ndarray:
    """Coefficients of q(u) = p(scale * u + shift)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros(1)
    # Horner in the composed argument: q = c_d, then q*(scale*u + shift) + c_i.
    for c in coeffs[::-1]:
        out = np.convolve(out, np.array([shift, scale]))
        out = out[: coeffs.size]
        out[0] += c
    return out


def rescale_to_canonical(emp: EmpiricalDistribution, J: Interval):
    """Map the samples of J onto [-1, 1] with unit total mass.

    Returns (canonical empirical distribution, AffineMap with x = scale*u + shift,
    mass factor).  Ak-distances transform by the mass factor: for a polynomial
    q on the canonical domain, dist_original = mass_factor * dist_canonical.
    """
    m = emp.mass(J)
    if m <= 0:
        raise ValueError("zero mass on J: treat as the empty-interval case (zero hypothesis)")
    if J.length <= 0:
        raise ValueError("cannot rescale a singleton interval")
    scale = J.length / 2.0
    shift = (J.left + J.right) / 2.0
    amap = AffineMap(scale, shift)
    lo = emp.count_lt(J.left) if J.left_closed else emp.count_le(J.left)
    hi = emp.count_le(J.right) if J.right_closed else emp.count_lt(J.right)
    u = amap.inverse(emp.samples[lo:hi])
    u = np.clip(u, -1.0, 1.0)
    canon = EmpiricalDistribution(u, Interval(-1.0, 1.0))
    return canon, amap, m


def poly_from_canonical(coeffs, amap: AffineMap, mass_factor: float, J: Interval) -> Polynomial:
    """Undo rescale_to_canonical on fitted canonical coefficients.

    p(x) = (mass_factor / scale) * q((x - shift) / scale), so that masses over
    subintervals transform consistently with the empirical rescaling.
    """
    c = affine_compose(coeffs, 1.0 / amap.scale, -amap.shift / amap.scale)
    return Polynomial(c * (mass_factor / amap.scale), J)


def poly_to_canonical(p: Polynomial, amap: AffineMap, mass_factor: float) -> np.ndarray:
    """Inverse of poly_from_canonical, for pushing a hypothesis into canonical coordinates."""
    c = affine_compose(p.coeffs, amap.scale, amap.shift)
    return c * (amap.scale / mass_factor)
