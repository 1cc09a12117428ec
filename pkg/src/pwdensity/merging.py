"""Greedy interval merging: histogram construction and its oracle-driven generalization.

The loop starts from the finest sample-aligned partition, repeatedly pairs
consecutive intervals, scores each candidate union through a computation
oracle, keeps the highest-error pairs intact, and merges the rest.  Scores
for piecewise-constant fits are exact A1-errors; for polynomial pieces they
come from an Ak-projection / Ak-computation oracle pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .empirical import EmpiricalDistribution
from .intervals import Interval
from .poly import Polynomial, coeff_bound, poly_eval, affine_compose
from .projection import computation_oracle, projection_oracle


@dataclass(frozen=True)
class MergeConfig:
    """Knobs of one merging run.

    t is the target piece count (the output has at most 2*alpha*t pieces),
    alpha > 2 trades approximation constant against pieces, epsilon the
    accuracy the sample size was chosen for, delta the failure probability.
    """

    t: int
    epsilon: float
    delta: float = 0.1
    alpha: float = 4.0
    degree: int = 0

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")
        if not (0 < self.epsilon < 1) or not (0 < self.delta < 1):
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")


def required_samples(cfg: MergeConfig, c_vc: float = 1.0) -> int:
    """Sample budget ceil(C * ((2a+1)(d+1)t + ln(1/delta)) / eps^2)."""
    k_vc = (2 * cfg.alpha + 1) * (cfg.degree + 1) * cfg.t
    return int(math.ceil(c_vc * (k_vc + math.log(1.0 / cfg.delta)) / cfg.epsilon**2))


# ---------------------------------------------------------------------------
# hypotheses
# ---------------------------------------------------------------------------


@dataclass
class HypothesisPiece:
    """One partition cell: a polynomial density on an interval, or an atom.

    Atoms come from singleton cells (left == right) and carry plain
    probability mass; ``coeffs`` then holds the single value [mass].
    """

    interval: Interval
    coeffs: np.ndarray

    @property
    def is_atom(self) -> bool:
        return self.interval.is_singleton

    @property
    def atom_mass(self) -> float:
        return float(self.coeffs[0]) if self.is_atom else 0.0

    def density(self, x):
        return poly_eval(self.coeffs, x)

    def mass(self) -> float:
        if self.is_atom:
            return self.atom_mass
        p = Polynomial(self.coeffs, self.interval)
        return p.integrate(self.interval.left, self.interval.right)


class PiecewiseHypothesis:
    """A partition of the domain plus one piece function per cell."""

    def __init__(self, pieces: list[HypothesisPiece], domain: Interval, degree: int, n: int = 0):
        self.pieces = pieces
        self.domain = domain
        self.degree = degree
        self.n = n

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def total_mass(self) -> float:
        return float(sum(p.mass() for p in self.pieces))

    def pdf(self, x):
        """Density part of the hypothesis (atoms excluded), vectorized."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros_like(x)
        for p in self.pieces:
            if p.is_atom:
                continue
            mask = (x >= p.interval.left) & (x <= p.interval.right)
            if np.any(mask):
                out[mask] = poly_eval(p.coeffs, x[mask])
        return out

    def atoms(self) -> list[tuple[float, float]]:
        return [(p.interval.left, p.atom_mass) for p in self.pieces if p.is_atom]

    def to_json(self) -> str:
        obj = {
            "domain": [float(self.domain.left), float(self.domain.right)],
            "degree": self.degree,
            "n": self.n,
            "pieces": [
                {
                    "left": float(p.interval.left),
                    "right": float(p.interval.right),
                    "coeffs": p.coeffs.tolist(),
                }
                for p in self.pieces
            ],
        }
        return json.dumps(obj, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseHypothesis":
        # Endpoint inclusion is not serialized (it is measure-zero for every
        # consumer); cells are reconstructed right-closed.
        obj = json.loads(text)
        dom = Interval(float(obj["domain"][0]), float(obj["domain"][1]))
        pieces = []
        for i, p in enumerate(obj["pieces"]):
            left, right = float(p["left"]), float(p["right"])
            if left == right:
                ivl = Interval(left, right)
            else:
                ivl = Interval(left, right, i == 0, True)
            pieces.append(HypothesisPiece(ivl, np.asarray(p["coeffs"], dtype=np.float64)))
        return cls(pieces, dom, int(obj["degree"]), int(obj.get("n", 0)))


# ---------------------------------------------------------------------------
# the merging engine: elementary pieces as flat arrays
# ---------------------------------------------------------------------------


class _Engine:
    """The finest partition of one empirical distribution, in index form.

    Elementary cells conceptually alternate gap_0, atom_0, gap_1, ...,
    atom_{m-1}, gap_m over the m unique sample positions (a boundary gap is
    dropped when a sample sits exactly on a domain endpoint; ``off`` is 1
    when the left gap was dropped).  Cell geometry is derived from the index
    arithmetic, so the merge loop only ever touches the unique positions,
    the prefix-mass table, and the boundary array.

    For conceptual index c: atoms are odd, a cell covers unique indices
    [c//2, (c+1)//2), its left coordinate is u[(c-1)//2] (the domain's left
    end at c = 0) and its right coordinate is u[c//2] (the domain's right
    end at c = 2m).
    """

    def __init__(self, emp: EmpiricalDistribution):
        self.emp = emp
        u = emp.unique
        m = u.size
        a, b = emp.domain.left, emp.domain.right
        self.u = u
        self.m = m
        self.a = a
        self.b = b
        self.cumw = emp.cum_mass
        if a == b:
            self.off = 1  # the single atom is conceptual cell 1
            self.n_elem = 1
            return
        drop_left = 1 if u[0] == a else 0
        drop_right = 1 if u[m - 1] == b else 0
        self.off = drop_left
        self.n_elem = 2 * m + 1 - drop_left - drop_right

    # -- scalar accessors ----------------------------------------------------

    def span_u_range(self, e0: int, e1: int) -> tuple[int, int]:
        c0 = e0 + self.off
        c1 = e1 - 1 + self.off
        return c0 // 2, (c1 + 1) // 2

    def span_coords(self, e0: int, e1: int) -> tuple[float, float]:
        c0 = e0 + self.off
        c1 = e1 - 1 + self.off
        left = self.a if c0 == 0 else float(self.u[(c0 - 1) // 2])
        right = self.b if c1 == 2 * self.m else float(self.u[c1 // 2])
        return left, right

    def span_is_atom(self, e: int) -> bool:
        return (e + self.off) % 2 == 1

    def span_interval(self, e0: int, e1: int) -> Interval:
        left, right = self.span_coords(e0, e1)
        lclosed = self.span_is_atom(e0) or e0 == 0
        rclosed = self.span_is_atom(e1 - 1) or e1 == self.n_elem
        return Interval(left, right, lclosed, rclosed)

    # -- vectorized mass -----------------------------------------------------

    def span_mass(self, e0, e1):
        lo = (np.asarray(e0) + self.off) // 2
        hi = (np.asarray(e1) + self.off) // 2  # == (c1 + 1) // 2 with c1 = e1 - 1 + off
        return self.cumw[hi] - self.cumw[lo]


# ---------------------------------------------------------------------------
# oracle pairs
# ---------------------------------------------------------------------------


class HistogramOracles:
    """Flattening as the projection, exact A1-error as the computation."""

    degree = 0

    def __init__(self):
        self._err_buf = None

    def batch_errors_bnd(self, eng: _Engine, bnd, P, eta_call: float) -> np.ndarray:
        if self._err_buf is None or self._err_buf.size < P:
            self._err_buf = np.empty(max(P, 16), dtype=np.float64)
        return _kernels.a1_errors_bnd(
            bnd, P, eng.off, 2 * eng.m, eng.a, eng.b, eng.u, eng.cumw, self._err_buf
        )

    def fit_piece(self, eng: _Engine, e0: int, e1: int, eta_call: float) -> np.ndarray:
        ivl = eng.span_interval(e0, e1)
        mass = float(eng.span_mass(e0, e1))
        return np.array([mass / ivl.length])


class _StartEndPair:
    """Mixin turning a bnd-based batch call into a starts/ends one."""

    def batch_errors_bnd(self, eng: _Engine, bnd, P, eta_call: float) -> np.ndarray:
        starts = bnd[0 : 2 * P : 2]
        ends = bnd[2 : 2 * P + 2 : 2]
        return self.batch_errors(eng, starts, ends, eta_call)


class PolynomialOracles(_StartEndPair):
    """Ak-projection / Ak-computation pair for nonnegative degree-d pieces.

    method "fast" (degree <= 1) evaluates candidates with an exact
    cutting-plane solver specialized to the polyhedral nonnegativity wedge;
    "cutting-plane" routes every candidate through the generic tolerance
    search with the ellipsoid method.  "auto" picks "fast" when available.

    Candidates whose empirical mass is at most the per-call tolerance are
    answered with the zero polynomial and their exact distance (= the mass),
    which satisfies both oracle contracts at that tolerance.
    """

    def __init__(self, degree: int, method: str = "auto", rank_quality: float = 0.25, fit_quality: float = 0.05):
        if method == "auto":
            method = "fast" if degree <= 1 else "cutting-plane"
        if method == "fast" and degree > 1:
            raise ValueError("the fast solver supports degree <= 1 only")
        if method not in ("fast", "cutting-plane"):
            raise ValueError(f"unknown method: {method}")
        self.degree = degree
        self.k = degree + 1
        self.method = method
        self.rank_quality = rank_quality
        self.fit_quality = fit_quality
        self.gap_misses = 0  # fast solves that hit the round cap

    # -- fast path ---------------------------------------------------------

    def _fast_solve(self, eng: _Engine, e0: int, e1: int, eta_call: float, quality: float):
        lo, hi = eng.span_u_range(e0, e1)
        mass = eng.cumw[hi] - eng.cumw[lo]
        left, right = eng.span_coords(e0, e1)
        scale = (right - left) / 2.0
        shift = (right + left) / 2.0
        us = (eng.u[lo:hi] - shift) / scale
        tot = eng.emp.cum_counts[hi] - eng.emp.cum_counts[lo]
        ws = (eng.emp.counts[lo:hi] / tot).astype(np.float64)
        eta_c = eta_call / mass
        s = hi - lo
        tol = min(eta_c, max(quality * math.sqrt((self.k + 1.0) / s), 1e-7))
        rbox = coeff_bound(self.degree, 2.0)
        c, v, gap, rounds = _kernels.kelley_project(
            np.ascontiguousarray(us), ws, self.degree, self.k, tol, rbox, 100
        )
        if gap > tol * 1.01:
            self.gap_misses += 1
        return c, float(v) * mass, scale, shift

    def _fast_coeffs_original(self, c_canon, scale, shift, mass):
        c_canon = np.asarray(c_canon, dtype=np.float64).copy()
        if c_canon.size > 1:
            # LP feasibility slack can leave p a hair below zero at an endpoint
            deficit = abs(c_canon[1]) - c_canon[0]
            if deficit > 0:
                c_canon[0] += deficit
        elif c_canon[0] < 0:
            c_canon[0] = 0.0
        c = affine_compose(c_canon, 1.0 / scale, -shift / scale)
        return c * (mass / scale)

    # -- generic spec path --------------------------------------------------

    def _generic_solve(self, eng: _Engine, e0: int, e1: int, eta_call: float):
        ivl = eng.span_interval(e0, e1)
        h = projection_oracle(eng.emp, ivl, self.degree, eta_call, self.k)
        err = computation_oracle(eng.emp, h, ivl, eta_call, self.k)
        return h, err

    # -- oracle-pair interface ----------------------------------------------

    def batch_errors(self, eng: _Engine, starts, ends, eta_call: float) -> np.ndarray:
        masses = eng.span_mass(starts, ends)
        errors = np.asarray(masses, dtype=np.float64).copy()
        solve = np.nonzero(masses > eta_call)[0]
        for i in solve:
            e0, e1 = int(starts[i]), int(ends[i])
            if self.method == "fast":
                _, err, _, _ = self._fast_solve(eng, e0, e1, eta_call, self.rank_quality)
            else:
                _, err = self._generic_solve(eng, e0, e1, eta_call)
            errors[i] = err
        return errors

    def fit_piece(self, eng: _Engine, e0: int, e1: int, eta_call: float) -> np.ndarray:
        mass = float(eng.span_mass(e0, e1))
        if mass <= 0:
            return np.zeros(self.degree + 1)
        if self.method == "fast":
            c, _, scale, shift = self._fast_solve(eng, e0, e1, eta_call, self.fit_quality)
            return self._fast_coeffs_original(c, scale, shift, mass)
        h, _ = self._generic_solve(eng, e0, e1, eta_call)
        return h.coeffs


class FunctionOraclePair(_StartEndPair):
    """Adapter for plain (projection, computation) oracle callables.

    ``project(emp, J, eta) -> Polynomial`` and
    ``compute(emp, h, J, eta) -> float`` are called per candidate.
    """

    def __init__(self, degree: int, project, compute):
        self.degree = degree
        self.project = project
        self.compute = compute

    def batch_errors(self, eng: _Engine, starts, ends, eta_call: float) -> np.ndarray:
        out = np.empty(starts.size)
        for i in range(starts.size):
            ivl = eng.span_interval(int(starts[i]), int(ends[i]))
            h = self.project(eng.emp, ivl, eta_call)
            out[i] = self.compute(eng.emp, h, ivl, eta_call)
        return out

    def fit_piece(self, eng: _Engine, e0: int, e1: int, eta_call: float) -> np.ndarray:
        h = self.project(eng.emp, eng.span_interval(e0, e1), eta_call)
        return np.asarray(h.coeffs, dtype=np.float64)


# ---------------------------------------------------------------------------
# the merging loop
# ---------------------------------------------------------------------------


def _ceil_count(x: float) -> int:
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return int(math.ceil(x))


def _merge_loop(eng: _Engine, cfg: MergeConfig, pair) -> np.ndarray:
    """Run the pairing/merging iterations; returns the final cell boundaries."""
    eta_call = cfg.epsilon / (2.0 * cfg.alpha * cfg.t)
    bnd = np.arange(eng.n_elem + 1, dtype=np.int64)
    size = bnd.size
    keep_target = _ceil_count(cfg.alpha * cfg.t)
    budget = 2.0 * cfg.alpha * cfg.t
    max_iters = int(math.ceil(math.log(max(eng.n_elem, 2)) / math.log(4.0 / 3.0))) + 8
    iters = 0
    while size - 1 > budget + 1e-9:
        s_j = size - 1
        P = s_j // 2
        errors = pair.batch_errors_bnd(eng, bnd[:size], P, eta_call)
        # keep at most ceil(alpha*t) pairs (largest errors, ties to the lower
        # index, zero-error pairs always merge) and always merge at least one
        # so the loop terminates once s_j hovers just above the budget
        k_eff = min(keep_target, P - 1)
        keep_mask = _kernels.top_k_pairs(np.ascontiguousarray(errors), k_eff)
        size = int(_kernels.rebuild_bnd_inplace(bnd, size, keep_mask))
        s_next = size - 1
        assert s_next == s_j - (P - int(np.sum(keep_mask))), "merge bookkeeping out of sync"
        assert s_next < s_j, "merging must make progress"
        iters += 1
        if iters > max_iters:
            raise RuntimeError("merging exceeded its iteration bound")
    return bnd[:size]


def _build_hypothesis(eng: _Engine, cfg: MergeConfig, pair, bnd: np.ndarray) -> PiecewiseHypothesis:
    eta_call = cfg.epsilon / (2.0 * cfg.alpha * cfg.t)
    pieces = []
    for i in range(bnd.size - 1):
        e0, e1 = int(bnd[i]), int(bnd[i + 1])
        ivl = eng.span_interval(e0, e1)
        if ivl.is_singleton:
            mass = float(eng.span_mass(e0, e1))
            pieces.append(HypothesisPiece(ivl, np.array([mass])))
        else:
            coeffs = pair.fit_piece(eng, e0, e1, eta_call)
            pieces.append(HypothesisPiece(ivl, np.asarray(coeffs, dtype=np.float64)))
    return PiecewiseHypothesis(pieces, eng.emp.domain, pair.degree, eng.emp.n)


def general_merging(emp: EmpiricalDistribution, cfg: MergeConfig, oracles) -> PiecewiseHypothesis:
    """Greedy merging driven by an Ak-projection / Ak-computation oracle pair.

    ``oracles`` is an oracle-pair object (HistogramOracles, PolynomialOracles,
    FunctionOraclePair) or a plain (project, compute) tuple of callables.
    Oracle calls run at tolerance epsilon / (2 alpha t) with k = degree + 1;
    the output has at most 2*alpha*t pieces, each fitted by the projection.
    """
    if isinstance(oracles, tuple):
        oracles = FunctionOraclePair(cfg.degree, *oracles)
    eng = _Engine(emp)
    bnd = _merge_loop(eng, cfg, oracles)
    return _build_hypothesis(eng, cfg, oracles, bnd)


def construct_histogram(emp: EmpiricalDistribution, cfg: MergeConfig) -> PiecewiseHypothesis:
    """Histogram merging: exact A1-errors decide merges, flattenings fit pieces."""
    return general_merging(emp, cfg, HistogramOracles())
