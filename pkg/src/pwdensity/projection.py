"""Ak-projection onto nonnegative polynomials via cutting planes.

The feasible set C_tau (coefficients of nonnegative polynomials within
Ak-distance tau of the canonical empirical distribution) is convex; a
mu-approximate separation oracle tests nonnegativity first and the
Ak-distance second, and the feasibility problem is solved with the ellipsoid
method.  A binary search over tau turns feasibility into projection.

All of this operates on the canonical domain [-1, 1] with unit empirical
mass; `projection_oracle` / `computation_oracle` wrap the rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aknorm import compute_ak
from .empirical import EmpiricalDistribution
from .intervals import Interval
from .poly import Polynomial, coeff_bound, poly_from_canonical, poly_to_canonical, rescale_to_canonical
from .roots import test_nonneg

_CANONICAL = Interval(-1.0, 1.0)
LOG2_SQRT2P1 = math.log2(math.sqrt(2.0) + 1.0)


class IterationCapExceeded(RuntimeError):
    """The solver hit its worst-case iteration cap; indicates a misconfiguration."""


@dataclass(frozen=True)
class FeasibilityParams:
    """Geometry of one feasibility solve: target distance and ball exponents."""

    tau: float
    d: int
    k: int
    eta_prime: float

    @property
    def L_u(self) -> float:
        return self.d * LOG2_SQRT2P1 + 1.5 * math.log2(max(self.d, 1)) + 2.0

    @property
    def L_l(self) -> float:
        return math.log2(4.0 * (self.d + 1) / (2.0 * self.eta_prime))

    @property
    def L(self) -> float:
        return max(self.L_u, self.L_l)


@dataclass
class SepResult:
    """Either "yes" (approximately feasible) or a separating hyperplane normal.

    feasible=False with hyperplane=None certifies that the feasible set is
    empty: the maximizing selection consisted of atoms alone, whose
    discrepancy exceeds tau for every polynomial.
    """

    feasible: bool
    hyperplane: np.ndarray | None = None


def ak_separator(c, tau: float, k: int, emp_c: EmpiricalDistribution, mu: float) -> SepResult:
    """Ak-distance part of the separation oracle.

    Requires p_c >= -mu on [-1, 1].  Says yes when the computed distance is
    at most tau; otherwise emits the hyperplane whose j-th coefficient is
    sum_i sigma_i (b_i^{j+1} - a_i^{j+1}) / (j+1) over the maximizing
    intervals, which separates c from every tau-feasible vector.
    """
    c = np.asarray(c, dtype=np.float64)
    res = compute_ak(Polynomial(c, _CANONICAL), emp_c, _CANONICAL, k, mu)
    if res.value <= tau:
        return SepResult(True)
    d = c.size - 1
    y = np.zeros(d + 1)
    for ivl, s in zip(res.intervals, res.signed):
        sg = 1.0 if s >= 0 else -1.0
        powers_b = ivl.right ** np.arange(1, d + 2)
        powers_a = ivl.left ** np.arange(1, d + 2)
        y += sg * (powers_b - powers_a) / np.arange(1, d + 2)
    if np.max(np.abs(y)) == 0.0:
        # atom-only maximizer: its discrepancy is the same for every
        # polynomial, so no coefficient vector can reach distance tau
        return SepResult(False, None)
    return SepResult(False, y)


def sep_oracle(
    c,
    tau: float,
    k: int,
    emp_c: EmpiricalDistribution,
    mu: float,
    alpha: float | None = None,
) -> SepResult:
    """mu-approximate separation oracle for the tau-feasible polynomials.

    Runs the non-negativity tester first; a witness x yields the hyperplane
    -(1, x, ..., x^d).  Otherwise the Ak separator decides.
    """
    c = np.asarray(c, dtype=np.float64)
    witness = test_nonneg(c, mu, alpha)
    if witness is not None:
        d = c.size - 1
        return SepResult(False, -(witness ** np.arange(d + 1)))
    return ak_separator(c, tau, k, emp_c, mu)


def _ellipsoid_iteration_cap(dim: int, L: float) -> tuple[int, float]:
    """Worst-case iteration count from the exact per-step determinant drop."""
    if dim == 1:
        return int(math.ceil(4 * L)) + 16, 0.0
    n = dim
    drop = -(n * math.log(n * n / (n * n - 1.0)) + math.log((n - 1.0) / (n + 1.0)))
    cap = int(math.ceil(4.0 * n * L * math.log(2.0) / drop)) + 16
    return cap, drop


def cutting_plane_solve(oracle, L: float, dim: int, on_cut=None):
    """Canonical separation-oracle method (ellipsoid; bisection in dimension 1).

    Returns the first query point the oracle accepts, or None once the
    enclosing volume certifies that no ball of radius 2^-L fits inside the
    feasible set.  `on_cut(query, hyperplane)` observes every emitted cut.
    """
    R = 2.0**L
    if dim == 1:
        lo, hi = -R, R
        cap, _ = _ellipsoid_iteration_cap(1, L)
        for _ in range(cap):
            if hi - lo < 2.0 * 2.0**-L:
                return None
            x = np.array([(lo + hi) / 2.0])
            res = oracle(x)
            if res.feasible:
                return x
            y = res.hyperplane
            if y is None:
                return None  # certified empty
            if on_cut is not None:
                on_cut(x.copy(), np.asarray(y, dtype=np.float64).copy())
            if y[0] > 0:
                hi = x[0]
            elif y[0] < 0:
                lo = x[0]
            else:
                raise ValueError("zero hyperplane from separation oracle")
        raise IterationCapExceeded("bisection exceeded its iteration cap")

    n = dim
    x = np.zeros(n)
    P = np.eye(n) * R * R
    logdet = 2.0 * n * L * math.log(2.0)
    floor = -2.0 * n * L * math.log(2.0)
    cap, drop = _ellipsoid_iteration_cap(n, L)
    scale = n * n / (n * n - 1.0)
    for _ in range(cap):
        res = oracle(x)
        if res.feasible:
            return x
        if res.hyperplane is None:
            return None  # certified empty
        g = np.asarray(res.hyperplane, dtype=np.float64)
        if on_cut is not None:
            on_cut(x.copy(), g.copy())
        Pg = P @ g
        gPg = float(g @ Pg)
        if not (gPg > 0.0) or not np.isfinite(gPg):
            return None  # ellipsoid degenerate: numerically empty
        gn = Pg / math.sqrt(gPg)
        x = x - gn / (n + 1.0)
        P = scale * (P - (2.0 / (n + 1.0)) * np.outer(gn, gn))
        P = 0.5 * (P + P.T)
        logdet -= drop
        if logdet <= floor:
            return None
    raise IterationCapExceeded("ellipsoid exceeded its iteration cap")


def find_polynomial(
    d: int, k: int, emp_c: EmpiricalDistribution, eta: float, on_cut=None, trace=None
) -> np.ndarray:
    """Coefficients of a nonnegative degree-d polynomial within eta of the
    optimal Ak-distance to the canonical empirical distribution.

    Binary search over the target distance with step eta/15, querying
    feasibility at tau_m + 2*eta', a final solve at tau_u + 10*eta', and a
    constant-term lift of eta' to make the output truly nonnegative.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    eta_p = eta / 15.0
    params = FeasibilityParams(0.0, d, k, eta_p)
    L = params.L
    dim = d + 1

    def solve_at(tau: float):
        def oracle(c):
            return sep_oracle(c, tau, k, emp_c, eta_p)

        return cutting_plane_solve(oracle, L, dim, on_cut=on_cut)

    tau_l, tau_u = 0.0, 1.0
    while tau_u - tau_l >= eta_p:
        tau_m = (tau_l + tau_u) / 2.0
        if solve_at(tau_m + 2.0 * eta_p) is not None:
            tau_u = tau_m
        else:
            # C at tau_m' holds no 2^-L ball, so C at tau_m is empty
            tau_l = tau_m
        if trace is not None:
            trace.append((tau_l, tau_u))
    c = solve_at(tau_u + 10.0 * eta_p)
    if c is None:
        # guaranteed nonempty in exact arithmetic; retry once with slack
        c = solve_at(tau_u + 12.0 * eta_p)
        if c is None:
            raise RuntimeError("final feasibility solve failed despite guaranteed slack")
    c = np.asarray(c, dtype=np.float64).copy()
    c[0] += eta_p
    return c


def projection_oracle(
    emp: EmpiricalDistribution,
    J: Interval,
    degree: int,
    eta: float,
    k: int | None = None,
    on_cut=None,
) -> Polynomial:
    """eta-approximate Ak-projection: the best nonnegative degree-d fit on J.

    Rescales J to the canonical domain (distances scale by the mass factor,
    so the canonical solve runs at eta / mass), runs the tolerance search,
    and maps the coefficients back.  Zero-mass intervals yield the zero
    polynomial.
    """
    if k is None:
        k = degree + 1
    if J.length <= 0:
        raise ValueError("projection needs an interval of positive length")
    if emp.mass(J) <= 0:
        return Polynomial(np.zeros(degree + 1), J)
    canon, amap, m = rescale_to_canonical(emp, J)
    c = find_polynomial(degree, k, canon, eta / m, on_cut=on_cut)
    return poly_from_canonical(c, amap, m, J)


def computation_oracle(
    emp: EmpiricalDistribution,
    h_J: Polynomial,
    J: Interval,
    eta: float,
    k: int | None = None,
) -> float:
    """eta-approximate Ak-distance between a nonnegative piece and the empirical on J."""
    if k is None:
        k = h_J.degree + 1
    if J.length <= 0:
        raise ValueError("computation oracle needs an interval of positive length")
    if emp.mass(J) <= 0:
        return abs(h_J.integrate(J.left, J.right))
    canon, amap, m = rescale_to_canonical(emp, J)
    q = poly_to_canonical(h_J, amap, m)
    res = compute_ak(Polynomial(q, _CANONICAL), canon, _CANONICAL, k, (eta / m) / 2.0)
    return m * res.value
