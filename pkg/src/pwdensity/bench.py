"""Synthetic mixture densities and the estimation sweep harness.

Provides ground-truth densities (Gaussian/Beta/Gamma/Uniform/piecewise-linear
mixtures), reproducible sampling, L1 evaluation of fitted hypotheses against
the truth, and a sweep runner that records fit time and learning error over
a grid of sample sizes, emitting CSV and optional figures.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .empirical import build_empirical
from .intervals import Interval
from .merging import (
    MergeConfig,
    PiecewiseHypothesis,
    PolynomialOracles,
    construct_histogram,
    general_merging,
)

_FAMILIES = ("gaussian", "beta", "gamma", "uniform", "piecewise_linear")


@dataclass
class Component:
    weight: float
    family: str
    params: dict

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family: {self.family}")
        if self.weight < 0:
            raise ValueError("component weights must be nonnegative")


class _PiecewiseLinear:
    """Normalized piecewise-linear density on fixed knots, with exact sampling."""

    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.size != ys.size or xs.size < 2 or np.any(np.diff(xs) <= 0) or np.any(ys < 0):
            raise ValueError("need increasing knots and nonnegative values")
        z = np.trapezoid(ys, xs) if hasattr(np, "trapezoid") else np.trapz(ys, xs)
        if z <= 0:
            raise ValueError("piecewise-linear density must have positive mass")
        self.xs = xs
        self.ys = ys / z
        seg = 0.5 * (self.ys[1:] + self.ys[:-1]) * np.diff(xs)
        self.cum = np.concatenate(([0.0], np.cumsum(seg)))

    def pdf(self, x):
        return np.interp(x, self.xs, self.ys, left=0.0, right=0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        i = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.xs.size - 2)
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        t = np.clip(x - x0, 0.0, x1 - x0)
        b = (y1 - y0) / (x1 - x0)
        out = self.cum[i] + y0 * t + 0.5 * b * t * t
        return np.clip(np.where(x < self.xs[0], 0.0, np.where(x >= self.xs[-1], 1.0, out)), 0.0, 1.0)

    def sample(self, rng, size):
        u = rng.random(size)
        i = np.clip(np.searchsorted(self.cum, u, side="right") - 1, 0, self.xs.size - 2)
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        r = u - self.cum[i]
        b = (y1 - y0) / (x1 - x0)
        lin = np.abs(b) < 1e-14
        t = np.where(
            lin,
            r / np.where(y0 > 0, y0, 1.0),
            (-y0 + np.sqrt(np.maximum(y0 * y0 + 2.0 * b * r, 0.0))) / np.where(lin, 1.0, b),
        )
        return x0 + np.clip(t, 0.0, x1 - x0)


def _frozen(comp: Component):
    p = comp.params
    if comp.family == "gaussian":
        return stats.norm(loc=p["mean"], scale=p["std"])
    if comp.family == "beta":
        return stats.beta(p["a"], p["b"])
    if comp.family == "gamma":
        return stats.gamma(p["shape"], scale=p["scale"])
    if comp.family == "uniform":
        return stats.uniform(loc=p["low"], scale=p["high"] - p["low"])
    return _PiecewiseLinear(p["xs"], p["ys"])


def _scalar_pdf(comp: Component, dist):
    """A cheap scalar pdf closure (quadrature calls it tens of thousands of times)."""
    p = comp.params
    if comp.family == "gaussian":
        mu, sd = p["mean"], p["std"]
        norm = 1.0 / (sd * math.sqrt(2.0 * math.pi))

        return lambda x: norm * math.exp(-0.5 * ((x - mu) / sd) ** 2)
    if comp.family == "beta":
        a, b = p["a"], p["b"]
        lognorm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)

        def beta_pdf(x):
            if x <= 0.0 or x >= 1.0:
                return 0.0
            return math.exp(lognorm + (a - 1) * math.log(x) + (b - 1) * math.log(1 - x))

        return beta_pdf
    if comp.family == "gamma":
        k, th = p["shape"], p["scale"]
        lognorm = -math.lgamma(k) - k * math.log(th)

        def gamma_pdf(x):
            if x <= 0.0:
                return 0.0
            return math.exp(lognorm + (k - 1) * math.log(x) - x / th)

        return gamma_pdf
    if comp.family == "uniform":
        lo, hi = p["low"], p["high"]
        v = 1.0 / (hi - lo)
        return lambda x: v if lo <= x <= hi else 0.0
    return lambda x: float(dist.pdf(x))


class MixtureDensity:
    """Weighted mixture of parametric components; weights must sum to 1."""

    def __init__(self, components: list[Component]):
        total = sum(c.weight for c in components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("component weights must sum to 1")
        self.components = components
        self._dists = [_frozen(c) for c in components]
        scalars = [(c.weight, _scalar_pdf(c, d)) for c, d in zip(components, self._dists)]

        def pdf_scalar(x: float) -> float:
            return sum(w * f(x) for w, f in scalars)

        self.pdf_scalar = pdf_scalar

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c, d in zip(self.components, self._dists):
            out = out + c.weight * d.pdf(x)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c, d in zip(self.components, self._dists):
            out = out + c.weight * d.cdf(x)
        return out

    def sample(self, n: int, seed) -> np.ndarray:
        """n i.i.d. draws; a fixed seed fixes the stream bit for bit."""
        rng = np.random.default_rng(seed)
        which = rng.choice(len(self.components), size=n, p=[c.weight for c in self.components])
        out = np.empty(n)
        for i, (c, d) in enumerate(zip(self.components, self._dists)):
            idx = np.nonzero(which == i)[0]
            if idx.size == 0:
                continue
            if c.family == "piecewise_linear":
                out[idx] = d.sample(rng, idx.size)
            elif c.family == "gaussian":
                out[idx] = rng.normal(c.params["mean"], c.params["std"], idx.size)
            elif c.family == "beta":
                out[idx] = rng.beta(c.params["a"], c.params["b"], idx.size)
            elif c.family == "gamma":
                out[idx] = rng.gamma(c.params["shape"], c.params["scale"], idx.size)
            else:
                out[idx] = rng.uniform(c.params["low"], c.params["high"], idx.size)
        return out

    def check_normalization(self, tol=1e-6) -> float:
        """Quadrature check that the mixture pdf integrates to 1.

        Each component is integrated over its own effective support so that
        narrow bumps are never missed.
        """
        total = 0.0
        for c, d in zip(self.components, self._dists):
            if c.weight == 0.0:
                continue
            if isinstance(d, _PiecewiseLinear):
                lo, hi = float(d.xs[0]), float(d.xs[-1])
            else:
                lo, hi = float(d.ppf(1e-12)), float(d.ppf(1.0 - 1e-12))
            part, _ = integrate.quad(lambda x: float(d.pdf(x)), lo, hi, limit=400)
            total += c.weight * part
        if abs(total - 1.0) > tol:
            raise ValueError(f"mixture integrates to {total}, not 1")
        return total


# The experiment densities.  Shape parameters are project defaults (the
# originals behind the reference plots are unspecified): a bimodal 2-GMM,
# a bimodal Beta pair on [0, 1], and two overlapping Gammas.
PRESETS = {
    "gmm2": [
        Component(0.5, "gaussian", {"mean": -0.6, "std": 0.3}),
        Component(0.5, "gaussian", {"mean": 0.5, "std": 0.2}),
    ],
    "beta2": [
        Component(0.5, "beta", {"a": 2.0, "b": 6.0}),
        Component(0.5, "beta", {"a": 7.0, "b": 3.0}),
    ],
    "gamma2": [
        Component(0.5, "gamma", {"shape": 2.0, "scale": 3.0}),
        Component(0.5, "gamma", {"shape": 7.5, "scale": 2.0}),
    ],
    "uniform": [Component(1.0, "uniform", {"low": 0.0, "high": 1.0})],
}


def make_density(spec) -> MixtureDensity:
    """Build a mixture from a preset name or a {"components": [...]} mapping."""
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ValueError(f"unknown density preset: {spec} (have {sorted(PRESETS)})")
        return MixtureDensity(PRESETS[spec])
    if isinstance(spec, MixtureDensity):
        return spec
    comps = [Component(c["weight"], c["family"], c["params"]) for c in spec["components"]]
    return MixtureDensity(comps)


# ---------------------------------------------------------------------------
# L1 evaluation
# ---------------------------------------------------------------------------


def l1_error(h: PiecewiseHypothesis, density: MixtureDensity) -> float:
    """L1 distance between the hypothesis and the true density over the real line.

    Adaptive quadrature piece by piece; atoms contribute their full mass, and
    so does the true density's tail mass outside the hypothesis domain.
    """
    pdf = getattr(density, "pdf_scalar", None) or (lambda x: float(density.pdf(x)))
    total = 0.0
    for p in h.pieces:
        if p.is_atom:
            total += p.atom_mass
            continue
        a, b = p.interval.left, p.interval.right
        rev = p.coeffs[::-1]

        def f(x):
            return abs(float(np.polyval(rev, x)) - pdf(x))

        val, err = integrate.quad(f, a, b, limit=200, epsabs=1e-8, epsrel=1e-5)
        if not np.isfinite(val):
            raise RuntimeError("quadrature failed on a hypothesis piece")
        total += val
    a, b = h.domain.left, h.domain.right
    total += float(density.cdf(a)) + (1.0 - float(density.cdf(b)))
    return total


def exact_l1_piecewise_linear(h: PiecewiseHypothesis, pl: _PiecewiseLinear) -> float:
    """Exact L1 between a degree-<=1 hypothesis and a piecewise-linear density."""
    if h.degree > 1:
        raise ValueError("exact path needs a degree <= 1 hypothesis")
    cuts = set(pl.xs.tolist())
    for p in h.pieces:
        cuts.add(p.interval.left)
        cuts.add(p.interval.right)
    cuts = sorted(cuts)
    total = 0.0
    for p in h.pieces:
        if p.is_atom:
            total += p.atom_mass
    for x0, x1 in zip(cuts, cuts[1:]):
        if x1 <= x0:
            continue
        mid = 0.5 * (x0 + x1)
        hv0 = hv1 = 0.0
        for p in h.pieces:
            if p.is_atom:
                continue
            if p.interval.left <= mid <= p.interval.right:
                c = p.coeffs
                hv0 = float(np.polyval(c[::-1], x0))
                hv1 = float(np.polyval(c[::-1], x1))
                break
        f0 = float(pl.pdf(x0)) - hv0
        f1 = float(pl.pdf(x1)) - hv1
        # integral of |linear| with a sign-change split
        if f0 * f1 >= 0:
            total += 0.5 * abs(f0 + f1) * (x1 - x0)
        else:
            xc = x0 + (x1 - x0) * abs(f0) / (abs(f0) + abs(f1))
            total += 0.5 * abs(f0) * (xc - x0) + 0.5 * abs(f1) * (x1 - xc)
    # mass of the density outside the union of hypothesis pieces
    a = min(p.interval.left for p in h.pieces)
    b = max(p.interval.right for p in h.pieces)
    total += float(pl.cdf(a)) + (1.0 - float(pl.cdf(b)))
    return total


# ---------------------------------------------------------------------------
# sweep harness
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("n", "seed", "pieces", "degree", "fit_ms", "l1_error")


@dataclass
class SweepResult:
    rows: list[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r["n"],
                    r["seed"],
                    r["pieces"],
                    r["degree"],
                    format(r["fit_ms"], ".3f"),
                    format(r["l1_error"], ".8e"),
                ]
            )
        return buf.getvalue()

    def medians(self, key: str) -> dict[int, float]:
        by_n: dict[int, list[float]] = {}
        for r in self.rows:
            by_n.setdefault(r["n"], []).append(r[key])
        return {n: float(np.median(v)) for n, v in sorted(by_n.items())}


def auto_epsilon(n: int, t: int, degree: int, alpha: float, delta: float) -> float:
    """Invert the sample-size rule: the accuracy a budget of n samples buys."""
    k_vc = (2 * alpha + 1) * (degree + 1) * t
    return math.sqrt((k_vc + math.log(1.0 / delta)) / n)


def pieces_to_t(pieces: int, alpha: float) -> int:
    """Map an output piece budget (= 2 alpha t) back to the target t."""
    t = int(round(pieces / (2.0 * alpha)))
    return max(t, 1)


def fit_once(samples: np.ndarray, pieces: int, degree: int, alpha: float = 4.0, delta: float = 0.1,
             epsilon: float | None = None, method: str = "auto"):
    """Sort, fit, and time one hypothesis.  Returns (hypothesis, fit_seconds).

    Timing starts after sorting, matching how the estimator would be fed
    pre-sorted data.
    """
    samples = np.sort(np.asarray(samples, dtype=np.float64))
    t = pieces_to_t(pieces, alpha)
    eps = epsilon if epsilon is not None else auto_epsilon(samples.size, t, degree, alpha, delta)
    eps = min(max(eps, 1e-9), 0.999)
    cfg = MergeConfig(t=t, epsilon=eps, delta=delta, alpha=alpha, degree=degree)
    t0 = time.perf_counter()
    emp = build_empirical(samples)
    if degree == 0:
        h = construct_histogram(emp, cfg)
    else:
        h = general_merging(emp, cfg, PolynomialOracles(degree, method=method))
    dt = time.perf_counter() - t0
    return h, dt


def _one_trial(density_spec, n, seed, pieces, degree, alpha, delta):
    density = make_density(density_spec)
    samples = density.sample(n, seed=[seed, n])
    h, dt = fit_once(samples, pieces, degree, alpha, delta)
    # the fit is deterministic; rerun it and keep the fastest timing so
    # scheduler hiccups on shared machines do not pollute the scaling curves
    for _ in range(2):
        _, dt2 = fit_once(samples, pieces, degree, alpha, delta)
        dt = min(dt, dt2)
    err = l1_error(h, density)
    return {
        "n": n,
        "seed": seed,
        "pieces": len(h),
        "degree": degree,
        "fit_ms": dt * 1e3,
        "l1_error": err,
    }


def warmup():
    """Compile the JIT kernels so the first timed fit is not polluted."""
    rng = np.random.default_rng(0)
    xs = np.sort(rng.random(512))
    fit_once(xs, pieces=8, degree=0)
    fit_once(xs, pieces=8, degree=1)


def run_sweep(config: dict) -> SweepResult:
    """Run the (n, seed) grid described by a config mapping.

    Keys: density (preset name or components spec), pieces, degree,
    n_grid (list of ints), seeds (count or list), alpha, delta, workers.
    """
    density_spec = config.get("density", "gmm2")
    make_density(density_spec)  # validate early
    pieces = int(config.get("pieces", 80))
    degree = int(config.get("degree", 0))
    alpha = float(config.get("alpha", 4.0))
    delta = float(config.get("delta", 0.1))
    n_grid = [int(x) for x in config["n_grid"]]
    seeds = config.get("seeds", 10)
    seed_list = list(range(int(seeds))) if isinstance(seeds, (int, float)) else [int(s) for s in seeds]
    workers = int(config.get("workers", 1))

    # seed-major order interleaves sample sizes over wall-clock time, so a
    # transient slowdown of the machine cannot inflate a single grid point's
    # timing median coherently
    jobs = [(density_spec, n, s, pieces, degree, alpha, delta) for s in seed_list for n in n_grid]
    warmup()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_one_trial, *zip(*jobs)))
    else:
        rows = [_one_trial(*j) for j in jobs]
    rows.sort(key=lambda r: (r["n"], r["seed"]))
    return SweepResult(rows)


def render_figures(result: SweepResult, outdir, label: str = "sweep"):
    """Render learning-error and timing curves from sweep rows to PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    err = result.medians("l1_error")
    tms = result.medians("fit_ms")
    ns = list(err)
    paths = []
    for key, series, ylabel in (
        ("error", err, "L1 error (median)"),
        ("time", tms, "fit time, ms (median)"),
    ):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(ns, [series[n] for n in ns], "o-")
        ax.set_xlabel("samples n")
        ax.set_ylabel(ylabel)
        ax.grid(True, which="both", ls=":", lw=0.5)
        fig.tight_layout()
        path = outdir / f"{label}_{key}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
