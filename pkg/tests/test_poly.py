import numpy as np
import pytest

from pwdensity import Interval, Polynomial, build_empirical, coeff_bound, rescale_to_canonical
from pwdensity.poly import (
    _subproduct_eval,
    affine_compose,
    antiderivative,
    integrate,
    multipoint_eval,
    poly_eval,
    poly_from_canonical,
    poly_to_canonical,
)


def test_eval_examples():
    assert poly_eval([3.0], 7.0) == 3.0
    assert poly_eval([1.0, 2.0, 1.0], -1.0) == 0.0
    assert poly_eval([0.0, 1.0], 0.5) == 0.5


def test_multipoint_constant_and_square():
    assert multipoint_eval([1.0], np.arange(5.0)).tolist() == [1.0] * 5
    assert multipoint_eval([0.0, 0.0, 1.0], [-1.0, 0.0, 2.0]).tolist() == [1.0, 0.0, 4.0]


def test_multipoint_matches_horner(rng):
    c = rng.standard_normal(9)
    xs = np.sort(rng.uniform(-1, 1, 64))
    got = multipoint_eval(c, xs)
    want = np.array([poly_eval(c, x) for x in xs])
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_subproduct_tree_path(rng):
    # the tree path itself, below its activation threshold
    c = rng.standard_normal(6)
    xs = np.sort(rng.uniform(-1, 1, 33))
    np.testing.assert_allclose(_subproduct_eval(c, xs), poly_eval(c, xs), rtol=1e-9, atol=1e-12)


def test_antiderivative_examples():
    assert antiderivative([1.0]).tolist() == [0.0, 1.0]
    assert antiderivative([0.0, 2.0]).tolist() == [0.0, 0.0, 1.0]
    assert integrate([1.0, 1.0], 0.0, 1.0) == pytest.approx(1.5)


def test_antiderivative_matches_quadrature(rng):
    from scipy.integrate import quad

    for _ in range(10):
        c = rng.standard_normal(rng.integers(1, 10))
        a, b = sorted(rng.uniform(-1, 1, 2))
        want, _ = quad(lambda x: poly_eval(c, x), a, b)
        assert integrate(c, a, b) == pytest.approx(want, abs=1e-8)


def test_rescale_example():
    emp = build_empirical([0.5, 1.5, 3.0, 4.0], Interval(0, 5))
    canon, amap, m = rescale_to_canonical(emp, Interval(0, 2))
    assert m == pytest.approx(0.5)
    assert canon.samples.tolist() == [-0.5, 0.5]
    assert canon.mass(Interval(-1, 1)) == 1.0
    # identity map case
    emp2 = build_empirical([-0.5, 0.5], Interval(-1, 1))
    _, amap2, m2 = rescale_to_canonical(emp2, Interval(-1, 1))
    assert (amap2.scale, amap2.shift, m2) == (1.0, 0.0, 1.0)


def test_rescale_round_trip_positions(rng):
    xs = rng.uniform(2.0, 9.0, 30)
    emp = build_empirical(xs, Interval(0, 10))
    J = Interval(2.0, 9.0)
    canon, amap, _ = rescale_to_canonical(emp, J)
    back = amap.forward(canon.samples)
    np.testing.assert_allclose(np.sort(back), np.sort(xs), atol=1e-12)


def test_poly_round_trip_integrals(rng):
    J = Interval(3.0, 7.0)
    emp = build_empirical(rng.uniform(3, 7, 40), Interval(0, 10))
    canon, amap, m = rescale_to_canonical(emp, J)
    q = rng.standard_normal(4)
    p = poly_from_canonical(q, amap, m, J)
    for _ in range(10):
        a, b = sorted(rng.uniform(3, 7, 2))
        want = m * integrate(q, amap.inverse(a), amap.inverse(b))
        assert p.integrate(a, b) == pytest.approx(want, abs=1e-10)
    # inverse transform is the identity on coefficients
    np.testing.assert_allclose(poly_to_canonical(p, amap, m), q, atol=1e-10)


def test_affine_compose(rng):
    c = rng.standard_normal(5)
    comp = affine_compose(c, 2.0, -1.0)
    for u in np.linspace(-1, 1, 7):
        assert poly_eval(comp, u) == pytest.approx(poly_eval(c, 2.0 * u - 1.0), rel=1e-12)


def test_coeff_bound_values():
    assert coeff_bound(0, 2.0) == 2.0
    assert coeff_bound(1, 2.0) == pytest.approx(2 * 4 * (np.sqrt(2) + 1), rel=1e-12)


def test_coeff_bound_holds_for_random_nonneg(rng):
    # squared random quadratics, normalized to integral <= 2
    for _ in range(1000):
        q = rng.standard_normal(3)
        p = np.convolve(q, q)
        total = integrate(p, -1.0, 1.0)
        if total <= 0:
            continue
        p = p * (2.0 / total)
        d = p.size - 1
        assert np.max(np.abs(p)) <= coeff_bound(d, 2.0) + 1e-9


def test_polynomial_type():
    p = Polynomial([1.0, 0.0, 1.0], Interval(-1, 1))
    assert p.degree == 2
    assert p(2.0) == 5.0
    assert p.derivative().coeffs.tolist() == [0.0, 2.0]
