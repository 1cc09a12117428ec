"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The sweep-backed criteria (6-8) share module-scoped fixtures; expect a few
minutes of wall time for the full module.
"""

import math
import time

import numpy as np
import pytest

from pwdensity import (
    Interval,
    MergeConfig,
    Polynomial,
    brute_force_ak,
    build_empirical,
    compute_ak,
    construct_histogram,
    cutting_plane_solve,
    find_polynomial,
    general_merging,
    prefix_power_sum,
)
from pwdensity import bench
from pwdensity._kernels import dak_exactness_trial
from pwdensity.discrete import DiscreteInterval, discrete_test_nonneg, _power_sum_to
from pwdensity.empirical import a1_error, flatten
from pwdensity.merging import FunctionOraclePair, HistogramOracles
from pwdensity.poly import poly_eval
from pwdensity.projection import sep_oracle
from pwdensity.roots import test_nonneg as nonneg_witness

CANON = Interval(-1, 1)

GRID = [10_000, 20_000, 40_000, 80_000, 160_000, 320_000, 640_000, 1_000_000]
SEEDS = 30


def _report(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def sweep_linear():
    return bench.run_sweep(
        {"density": "gmm2", "pieces": 40, "degree": 1, "n_grid": GRID, "seeds": SEEDS, "workers": 2}
    )


@pytest.fixture(scope="module")
def sweep_hist():
    return bench.run_sweep(
        {"density": "gmm2", "pieces": 80, "degree": 0, "n_grid": GRID, "seeds": SEEDS, "workers": 2}
    )


def test_criterion_01_discrete_ak_exactness():
    rng = np.random.default_rng(2026)
    ncase = 100_000
    lens = rng.integers(1, 15, ncase).astype(np.int64)
    seqs = rng.choice(np.array([-1.0, -0.5, 0.0, 0.5, 1.0]), size=int(lens.sum()))
    t0 = time.perf_counter()
    worst = float(dak_exactness_trial(seqs, lens, 7))
    dt = time.perf_counter() - t0
    _report(1, worst == 0.0 and dt < 60.0, f"max |merge - DP| = {worst} over {ncase} sequences, k <= 7, in {dt:.1f}s")


def _continuous_brute_force(p, emp, J, k):
    from pwdensity.poly import antiderivative

    xs = np.unique(emp.samples[(emp.samples >= J.left) & (emp.samples <= J.right)])
    pts = np.unique(np.concatenate(([J.left], xs, [J.right])))
    P = antiderivative(p.coeffs)
    cells = []
    for i, u in enumerate(pts):
        for v in pts[i:]:
            for lc in (False, True):
                for rc in (False, True):
                    if u == v and not (lc and rc):
                        continue
                    ivl = Interval(float(u), float(v), lc, rc)
                    val = (poly_eval(P, v) - poly_eval(P, u)) - emp.mass(ivl)
                    cells.append((u, v, lc, rc, val))

    def disjoint(a, b):
        return a[1] < b[0] or (a[1] == b[0] and not (a[3] and b[2]))

    order = sorted(range(len(cells)), key=lambda i: (cells[i][0], cells[i][1]))
    best = 0.0

    def rec(last, used, acc):
        nonlocal best
        best = max(best, acc)
        if used == k:
            return
        for j in order:
            c = cells[j]
            if last is not None:
                if (c[0], c[1]) < (last[0], last[1]) or not disjoint(last, c):
                    continue
            rec(c, used + 1, acc + abs(c[4]))

    rec(None, 0, 0.0)
    return best


def test_criterion_02_continuous_ak_oracle():
    rng = np.random.default_rng(7)
    mu = 1e-6
    worst = 0.0
    for _ in range(500):
        s = int(rng.integers(1, 6))
        xs = np.sort(rng.uniform(-0.95, 0.95, s))
        emp = build_empirical(xs, CANON)
        q = rng.uniform(-1.0, 1.0, int(rng.integers(1, 3)))
        c = np.convolve(q, q)  # nonnegative, degree <= 2
        p = Polynomial(c, CANON)
        k = int(rng.integers(1, 4))
        got = compute_ak(p, emp, CANON, k, mu).value
        want = _continuous_brute_force(p, emp, CANON, k)
        worst = max(worst, abs(got - want))
    _report(2, worst <= 2 * mu, f"max |compute_ak - brute force| = {worst:.3g} <= 2 mu = {2*mu:.1g}")


def test_criterion_03_nonneg_tester():
    rng = np.random.default_rng(11)
    mu = 1e-3
    grid = np.linspace(-1, 1, 100_001)
    completeness_failures = 0
    witness_failures = 0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        p = rng.uniform(-1, 1, d + 1)
        w = nonneg_witness(p, mu)
        gmin = float(np.min(poly_eval(p, grid)))
        if w is None:
            if gmin < -mu:
                completeness_failures += 1
        else:
            if not (-1 <= w <= 1) or not poly_eval(p, float(w)) < -mu / 2:
                witness_failures += 1
    ok = completeness_failures == 0 and witness_failures == 0
    _report(3, ok, f"completeness failures {completeness_failures}, witness failures {witness_failures} / 1000")


def _d0_distance(c0, emp, k):
    return compute_ak(Polynomial(np.array([c0]), CANON), emp, CANON, k, 1e-12).value


def test_criterion_04_projection_optimality_d0():
    rng = np.random.default_rng(13)
    eta = 1e-2
    step = 2e-3
    grid = np.arange(0.0, 1.5 + step, step)
    worst_excess = -np.inf
    for _ in range(200):
        s = int(rng.integers(1, 21))
        xs = np.sort(rng.uniform(-0.98, 0.98, s))
        emp = build_empirical(xs, CANON)
        k = int(rng.integers(1, 4))
        c = find_polynomial(0, k, emp, eta)
        got = _d0_distance(float(c[0]), emp, k)
        opt = min(_d0_distance(g, emp, k) for g in grid)
        worst_excess = max(worst_excess, got - opt)
    # grid resolution: distance is 2-Lipschitz in c0, so the grid minimum is
    # within 2 * step/2 of the true optimum
    bound = eta + 2 * step
    _report(4, worst_excess <= bound, f"worst excess over grid optimum = {worst_excess:.4f} <= {bound:.4f}")


def test_criterion_05_hyperplane_validity():
    rng = np.random.default_rng(17)
    runs = 200
    checked = 0
    violations = 0
    vacuous = 0
    for run in range(runs):
        s = int(rng.integers(2, 21))
        xs = np.sort(rng.uniform(-0.95, 0.95, s))
        emp = build_empirical(xs, CANON)
        d = int(rng.integers(0, 2))
        k = d + 1
        step = 0.01
        if d == 0:
            anchors = [(g,) for g in np.arange(0.0, 1.3, step)]
        else:
            anchors = [(g, b) for g in np.arange(0.0, 1.3, 0.05) for b in np.arange(-0.5, 0.55, 0.1)]
        feas_d = lambda cc: compute_ak(Polynomial(np.array(cc), CANON), emp, CANON, k, 1e-12).value
        opt = min(feas_d(a) for a in anchors if a[0] >= abs(a[-1]) or d == 0)
        tau = opt + 0.05
        cuts = []
        mu = 1e-4

        def oracle(c):
            return sep_oracle(c, tau, k, emp, mu)

        cutting_plane_solve(oracle, 6.0, d + 1, on_cut=lambda q, y: cuts.append((q, y)))
        # rejection-sample feasible coefficient vectors
        feasible = []
        tries = 0
        while len(feasible) < 100 and tries < 4000:
            tries += 1
            c0 = rng.uniform(0.0, 1.3)
            if d == 0:
                cand = np.array([c0])
                nonneg = cand[0] >= 0
            else:
                c1 = rng.uniform(-c0, c0) if c0 > 0 else 0.0
                cand = np.array([c0, c1])
                nonneg = cand[0] >= abs(cand[1])
            if not nonneg:
                continue
            if feas_d(tuple(cand)) <= tau:
                feasible.append(cand)
        if not feasible:
            vacuous += 1
            continue
        for q, y in cuts:
            for cand in feasible:
                checked += 1
                if float(y @ cand) > float(y @ q) + 1e-9:
                    violations += 1
    ok = violations == 0 and vacuous < runs // 2
    _report(5, ok, f"{violations} violations over {checked} (cut, feasible-point) checks; {vacuous} vacuous runs")


def test_criterion_06_histogram_end_to_end():
    t, alpha, n = 4, 4.0, 100_000
    eps_emp = math.sqrt((2 * alpha + 1) * t * math.log(20.0) / n)
    bound = 4 * eps_emp + eps_emp
    uniform = bench.make_density("uniform")
    errors = []
    slow = 0
    for seed in range(20):
        xs = uniform.sample(n, seed=[seed, n])
        h, dt = bench.fit_once(xs, pieces=int(2 * alpha * t), degree=0, alpha=alpha)
        if dt >= 1.0:
            slow += 1
        errors.append(bench.l1_error(h, uniform))
    med = float(np.median(errors))
    ok = med <= bound and slow == 0
    _report(6, ok, f"median L1 = {med:.4f} <= {bound:.4f}; {slow} trials over 1s")


def test_criterion_07_paper_numbers(sweep_linear):
    med = sweep_linear.medians("l1_error")
    final = med[1_000_000]
    ns = np.array(sorted(med))
    errs = np.array([med[n] for n in ns])
    slope = float(np.polyfit(np.log10(ns), np.log10(errs), 1)[0])
    ok = 0.005 <= final <= 0.02 and -0.55 <= slope <= -0.40
    _report(7, ok, f"median L1(n=1e6) = {final:.5f} in [0.005, 0.02]; log-log slope = {slope:.3f} in [-0.55, -0.40]")


def test_criterion_08_near_linear_scaling(sweep_linear, sweep_hist):
    msgs = []
    ok = True
    for label, sweep in (("linear", sweep_linear), ("hist", sweep_hist)):
        tms = sweep.medians("fit_ms")
        ns = sorted(tms)
        for n1, n2 in zip(ns, ns[1:]):
            bound = 2.5 ** math.log2(n2 / n1)
            ratio = tms[n2] / tms[n1]
            if ratio > bound:
                ok = False
            msgs.append(f"{label} {n1}->{n2}: x{ratio:.2f} (<= {bound:.2f})")
    _report(8, ok, "; ".join(msgs))


def test_criterion_07b_monotone_medians(sweep_linear):
    # learning curve is nonincreasing in n up to slack 1.1 (OPT floor slack)
    med = sweep_linear.medians("l1_error")
    ns = sorted(med)
    ok = all(med[n2] <= 1.1 * med[n1] for n1, n2 in zip(ns, ns[1:]))
    _report("7b", ok, f"medians {['%.4f' % med[n] for n in ns]}")


def test_criterion_09_oracle_substitution_bit_identical():
    mismatches = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        if seed % 2:
            xs = rng.normal(0.0, 1.0, 400)
        else:
            xs = rng.uniform(0.0, 1.0, 400)
        emp = build_empirical(np.sort(xs))
        cfg = MergeConfig(t=3, epsilon=0.08, alpha=4.0)
        h_direct = construct_histogram(emp, cfg)
        h_pair = general_merging(emp, cfg, HistogramOracles())
        project = lambda e, J, eta: Polynomial(np.array([flatten(e, J)]), J)
        computef = lambda e, h, J, eta: a1_error(e, J)
        h_fun = general_merging(emp, cfg, FunctionOraclePair(0, project, computef))
        if not (h_direct.to_json() == h_pair.to_json() == h_fun.to_json()):
            mismatches += 1
    _report(9, mismatches == 0, f"{mismatches} mismatches over 50 seeded inputs")


def test_criterion_10_discrete_mode():
    rng = np.random.default_rng(23)
    bad_sums = 0
    for i in range(10_000):
        lo = int(rng.integers(1, 2000))
        width = int(rng.integers(0, 512)) if i % 300 else int(rng.integers(0, 65_536))
        hi = lo + width
        j = int(rng.integers(0, 9))
        direct = 0
        for l in range(lo, hi + 1):
            direct += l**j
        if _power_sum_to(hi, j) - _power_sum_to(lo - 1, j) != direct:
            bad_sums += 1
        if prefix_power_sum(lo, hi, j) != float(direct):
            bad_sums += 1
    disagreements = 0
    for _ in range(500):
        N = int(rng.integers(5, 1001))
        d = int(rng.integers(0, 6))
        coeffs = rng.uniform(-1, 1, d + 1)
        pts = np.arange(1, N + 1, dtype=np.float64)
        has_neg = bool(np.min(poly_eval(coeffs, pts)) < 0)
        w = discrete_test_nonneg(coeffs, DiscreteInterval(1, N))
        if (w is not None) != has_neg:
            disagreements += 1
        elif w is not None and not poly_eval(coeffs, float(w)) < 0:
            disagreements += 1
    ok = bad_sums == 0 and disagreements == 0
    _report(10, ok, f"power-sum mismatches {bad_sums} / 10000; nonneg-scan disagreements {disagreements} / 500")
