import numpy as np
import pytest

from pwdensity import (
    FeasibilityParams,
    Interval,
    Polynomial,
    SepResult,
    ak_separator,
    build_empirical,
    compute_ak,
    computation_oracle,
    cutting_plane_solve,
    find_polynomial,
    projection_oracle,
    sep_oracle,
)
from pwdensity.empirical import a1_error, flatten
from pwdensity.poly import poly_eval
from pwdensity.projection import IterationCapExceeded

CANON = Interval(-1, 1)


def _canonical_emp(rng, s):
    xs = np.sort(rng.uniform(-0.95, 0.95, s))
    return build_empirical(xs, CANON)


def _dist(c, emp, k):
    return compute_ak(Polynomial(np.atleast_1d(c), CANON), emp, CANON, k, 1e-12).value


def _grid_opt_d0(emp, k, step=0.002):
    grid = np.arange(0.0, 1.5 + step, step)
    vals = [_dist([g], emp, k) for g in grid]
    i = int(np.argmin(vals))
    return vals[i], grid[i]


def test_feasibility_params():
    p = FeasibilityParams(0.1, 2, 3, 0.01)
    assert p.L_u == pytest.approx(2 * np.log2(np.sqrt(2) + 1) + 1.5 * np.log2(2) + 2)
    assert p.L_l == pytest.approx(np.log2(4 * 3 / 0.02))
    assert p.L == max(p.L_u, p.L_l)


def test_sep_oracle_negative_constant(rng):
    emp = _canonical_emp(rng, 10)
    res = sep_oracle(np.array([-1.0, 0.0]), 0.5, 2, emp, 0.01)
    assert not res.feasible
    # hyperplane from a witness x: y = -(1, x); y . c = 1 > 0 >= y . c' for
    # any nonnegative p_c'
    y = res.hyperplane
    assert y @ np.array([-1.0, 0.0]) >= 1.0 - 1e-9
    for _ in range(50):
        c2 = rng.uniform(0, 1, 2)
        c2[1] = min(c2[1], c2[0])  # nonneg on [-1, 1]
        assert y @ c2 <= 1e-12


def test_sep_oracle_accepts_good_constant(rng):
    emp = _canonical_emp(rng, 60)
    opt, c0 = _grid_opt_d0(emp, 1)
    res = sep_oracle(np.array([c0]), opt + 0.01, 1, emp, 1e-6)
    assert res.feasible


def test_ak_separator_yes_when_tau_large(rng):
    emp = _canonical_emp(rng, 20)
    assert ak_separator(np.array([0.5]), 2.0, 1, emp, 1e-9).feasible


def test_ak_separator_hyperplane_formula(rng):
    emp = _canonical_emp(rng, 20)
    c = np.array([1.0])
    tau = 0.05
    res = ak_separator(c, tau, 1, emp, 1e-9)
    assert not res.feasible
    # recompute the eq-(12) coefficients from the maximizing intervals
    ak = compute_ak(Polynomial(c, CANON), emp, CANON, 1, 1e-9)
    y = np.zeros(1)
    rhs = tau
    for ivl, s in zip(ak.intervals, ak.signed):
        sg = 1.0 if s >= 0 else -1.0
        y[0] += sg * (ivl.right - ivl.left)
        rhs += sg * emp.mass(ivl)
    np.testing.assert_allclose(res.hyperplane, y)
    assert y @ c > rhs  # the violated inequality


def test_ak_separator_validated_against_feasible(rng):
    emp = _canonical_emp(rng, 15)
    opt, c_star = _grid_opt_d0(emp, 2)
    tau = opt + 0.05
    c_bad = np.array([1.4])
    res = ak_separator(c_bad, tau, 2, emp, 1e-9)
    if res.feasible:
        pytest.skip("query accidentally feasible")
    found = 0
    for _ in range(800):
        c2 = np.array([max(0.0, c_star + rng.uniform(-0.1, 0.1))])
        if _dist(c2, emp, 2) <= tau:
            found += 1
            assert res.hyperplane @ c2 <= res.hyperplane @ c_bad + 1e-10
    assert found >= 100


def test_cutting_plane_always_yes():
    calls = []

    def oracle(c):
        calls.append(c.copy())
        return SepResult(True)

    for dim in (1, 2, 3):
        out = cutting_plane_solve(oracle, 4.0, dim)
        assert out is not None and out.size == dim


def test_cutting_plane_halfspace_1d():
    def oracle(c):
        if c[0] >= 0.5:
            return SepResult(True)
        return SepResult(False, np.array([-1.0]))  # feasible set is to the right

    out = cutting_plane_solve(oracle, 6.0, 1)
    assert out is not None and out[0] >= 0.5 - 2.0**-6


def test_cutting_plane_halfspace_2d():
    def oracle(c):
        if c[0] >= 0.5:
            return SepResult(True)
        return SepResult(False, np.array([-1.0, 0.0]))

    out = cutting_plane_solve(oracle, 6.0, 2)
    assert out is not None and out[0] >= 0.5 - 1e-9


def test_cutting_plane_empty_set():
    def oracle(c):
        return SepResult(False, np.array([1.0, 0.0]) if c.size == 2 else np.array([1.0]))

    assert cutting_plane_solve(oracle, 5.0, 2) is None
    assert cutting_plane_solve(oracle, 5.0, 1) is None


def test_find_polynomial_uniform_constant(rng):
    emp = _canonical_emp(rng, 200)
    c = find_polynomial(0, 1, emp, 0.05)
    assert abs(c[0] - 0.5) < 0.15
    opt, _ = _grid_opt_d0(emp, 1)
    assert _dist(c, emp, 1) <= opt + 0.05 + 0.005


def test_find_polynomial_single_atom():
    emp = build_empirical([0.0], CANON)
    eta = 0.1
    c = find_polynomial(0, 1, emp, eta)
    opt, _ = _grid_opt_d0(emp, 1)
    assert _dist(c, emp, 1) <= opt + eta + 0.005
    assert c[0] >= 0


def test_find_polynomial_monotone_quality(rng):
    emp = _canonical_emp(rng, 40)
    d1 = _dist(find_polynomial(0, 1, emp, 0.2), emp, 1)
    d2 = _dist(find_polynomial(0, 1, emp, 0.1), emp, 1)
    opt, _ = _grid_opt_d0(emp, 1)
    assert d1 <= opt + 0.2 + 0.005
    assert d2 <= opt + 0.1 + 0.005


def test_find_polynomial_loop_invariant(rng):
    emp = _canonical_emp(rng, 30)
    trace = []
    find_polynomial(0, 1, emp, 0.05, trace=trace)
    opt, _ = _grid_opt_d0(emp, 1, step=0.001)
    for tau_l, tau_u in trace:
        assert tau_l <= opt + 1e-9


def test_find_polynomial_nonneg_output(rng):
    for d in (0, 1, 2):
        emp = _canonical_emp(rng, 25)
        c = find_polynomial(d, d + 1, emp, 0.1)
        grid = np.linspace(-1, 1, 2001)
        assert np.min(poly_eval(c, grid)) >= -1e-9


def test_projection_oracle_zero_mass():
    emp = build_empirical([5.0], Interval(0, 10))
    p = projection_oracle(emp, Interval(0, 1), 1, 0.1)
    assert p.coeffs.tolist() == [0.0, 0.0]


def test_projection_oracle_d0_matches_grid(rng):
    xs = np.sort(rng.uniform(2, 4, 50))
    emp = build_empirical(xs, Interval(0, 6))
    J = Interval(2, 4)
    eta = 0.02
    p = projection_oracle(emp, J, 0, eta)
    err = computation_oracle(emp, p, J, 1e-4)
    # grid search over constants in original coordinates
    best = np.inf
    for g in np.linspace(0, 1.2, 400):
        q = Polynomial(np.array([g]), J)
        best = min(best, computation_oracle(emp, q, J, 1e-6, k=1))
    assert err <= best + eta + 0.01


def test_computation_oracle_matches_a1_error(rng):
    xs = np.sort(rng.uniform(0, 1, 80))
    emp = build_empirical(xs, Interval(0, 1))
    J = Interval(0.2, 0.8, True, True)
    h = Polynomial(np.array([flatten(emp, J)]), J)
    eta = 0.05
    xi = computation_oracle(emp, h, J, eta, k=1)
    assert abs(xi - a1_error(emp, J)) <= eta


def test_iteration_cap_is_config_error(monkeypatch):
    # valid cuts always shrink the volume, so the cap only fires on a
    # misconfiguration; force one by shrinking the cap itself
    import pwdensity.projection as proj

    monkeypatch.setattr(proj, "_ellipsoid_iteration_cap", lambda dim, L: (3, 0.0))

    def oracle(c):
        return SepResult(False, np.array([1.0]))

    with pytest.raises(IterationCapExceeded):
        proj.cutting_plane_solve(oracle, 8.0, 1)


def test_yes_results_are_post_hoc_feasible(rng):
    """Every "yes" satisfies the 2*mu-approximate contract when re-verified."""
    from pwdensity.roots import test_nonneg as nonneg_witness

    mu = 1e-4
    for _ in range(30):
        emp = _canonical_emp(rng, int(rng.integers(3, 25)))
        d = int(rng.integers(0, 2))
        k = d + 1
        c = np.zeros(d + 1)
        c[0] = rng.uniform(0.3, 0.7)
        tau = _dist(c, emp, k) + rng.uniform(0, 0.2)
        res = sep_oracle(c, tau, k, emp, mu)
        if res.feasible:
            assert _dist(c, emp, k) <= tau + 2 * mu
            w = nonneg_witness(c, mu)
            assert w is None or poly_eval(c, w) >= -mu


def test_projection_oracle_degree_2(rng):
    # full generic stack in dimension 3: Sturm tester + ellipsoid + binary search
    xs = np.sort(np.concatenate([rng.normal(0.55, 0.12, 60), rng.uniform(0, 1, 20)]))
    xs = xs[(xs > 0) & (xs < 1)]
    emp = build_empirical(xs, Interval(0, 1))
    J = Interval(0, 1)
    eta = 0.1
    p = projection_oracle(emp, J, 2, eta)
    assert p.degree == 2
    grid = np.linspace(0, 1, 1001)
    assert np.min(poly_eval(p.coeffs, grid)) >= -1e-9
    err = computation_oracle(emp, p, J, 1e-3)
    # no worse than the best constant fit plus the tolerance
    best_const = min(
        computation_oracle(emp, Polynomial(np.array([g]), J), J, 1e-4, k=3)
        for g in np.linspace(0.5, 1.5, 60)
    )
    assert err <= best_const + eta + 0.01
