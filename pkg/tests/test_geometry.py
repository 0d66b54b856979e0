import math

import numpy as np
import pytest

from hypnls.geometry import (
    AdmissiblePair,
    Geometry,
    RadialGrid,
    delta_exponent,
    distance_derivative,
    hyperbolic_distance,
    log_reduction_weight,
    r_coth_r,
    reduction_weight,
    sinhc,
    strichartz_weight,
    volume_weight,
)


def test_geometry_from_name():
    assert Geometry.from_name("hyperbolic3") is Geometry.HYPERBOLIC3
    assert Geometry.from_name("  Euclidean3 ") is Geometry.EUCLIDEAN3
    with pytest.raises(ValueError, match="unknown geometry"):
        Geometry.from_name("minkowski")


def test_sinhc_matches_direct_quotient():
    r = np.geomspace(1e-3, 30.0, 50)
    np.testing.assert_allclose(sinhc(r), np.sinh(r) / r, rtol=1e-14)


def test_sinhc_taylor_branch():
    # below the series cutoff the direct quotient itself is still accurate
    # enough in double precision to serve as the oracle
    for r in (1e-5, 5e-5, 9.9e-5):
        assert sinhc(r) == pytest.approx(math.sinh(r) / r, rel=1e-13)
    assert sinhc(0.0) == 1.0
    # continuity across the branch switch
    assert sinhc(1.0000001e-4) == pytest.approx(sinhc(0.9999999e-4), rel=1e-12)


def test_r_coth_r_values():
    assert r_coth_r(0.0) == 1.0
    assert r_coth_r(1.0) == pytest.approx(1.0 / math.tanh(1.0), rel=1e-14)
    assert r_coth_r(1e-6) == pytest.approx(1.0 + 1e-12 / 3.0, rel=1e-14)
    # large radius: coth -> 1
    assert r_coth_r(50.0) == pytest.approx(50.0, rel=1e-15)
    r = np.array([0.5, 2.0, 10.0])
    np.testing.assert_allclose(r_coth_r(r), r / np.tanh(r), rtol=1e-14)


def test_weights_match_definitions():
    r = np.linspace(0.1, 20.0, 40)
    np.testing.assert_allclose(
        volume_weight(Geometry.HYPERBOLIC3, r), np.sinh(r) ** 2, rtol=1e-14
    )
    np.testing.assert_allclose(volume_weight(Geometry.EUCLIDEAN3, r), r * r, rtol=0)
    np.testing.assert_allclose(
        reduction_weight(Geometry.HYPERBOLIC3, r), np.sinh(r), rtol=1e-14
    )
    np.testing.assert_allclose(reduction_weight(Geometry.EUCLIDEAN3, r), r, rtol=0)


def test_reduction_weight_overflow_is_inf_and_silent():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        w = reduction_weight(Geometry.HYPERBOLIC3, np.array([1.0, 800.0]))
        w2 = volume_weight(Geometry.HYPERBOLIC3, np.array([400.0]))
    assert math.isinf(w[1]) and w[1] > 0
    assert math.isinf(w2[0])


def test_log_reduction_weight():
    r = np.geomspace(0.01, 300.0, 60)
    np.testing.assert_allclose(
        log_reduction_weight(Geometry.HYPERBOLIC3, r), np.log(np.sinh(r)), rtol=1e-13
    )
    np.testing.assert_allclose(
        log_reduction_weight(Geometry.EUCLIDEAN3, r), np.log(r), rtol=1e-15
    )
    # far beyond the sinh overflow horizon: log sinh r = r - log 2 exactly
    assert log_reduction_weight(Geometry.HYPERBOLIC3, 5000.0) == pytest.approx(
        5000.0 - math.log(2.0), rel=1e-15
    )


def test_strichartz_weight():
    r = np.linspace(0.0, 12.0, 25)
    np.testing.assert_allclose(strichartz_weight(3, r), sinhc(r), rtol=0)
    np.testing.assert_allclose(
        strichartz_weight(2, r), np.sqrt(sinhc(r) / (1.0 + r)), rtol=1e-14
    )
    assert strichartz_weight(2, 10.0) == pytest.approx(
        math.sqrt(math.sinh(10.0) / (10.0 * 11.0)), rel=1e-14
    )
    with pytest.raises(ValueError):
        strichartz_weight(4, 1.0)


def test_hyperbolic_distance_collinear():
    # x = 1: same direction, distance |r - r2|; x = -1: antipodal, r + r2
    assert hyperbolic_distance(3.0, 1.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert hyperbolic_distance(3.0, 1.0, -1.0) == pytest.approx(4.0, rel=1e-14)
    assert hyperbolic_distance(2.5, 2.5, 1.0) == 0.0


def test_hyperbolic_distance_symmetry_and_validation():
    r, r2, x = 1.3, 4.1, 0.27
    assert hyperbolic_distance(r, r2, x) == pytest.approx(
        hyperbolic_distance(r2, r, x), rel=1e-15
    )
    with pytest.raises(ValueError, match="cosine"):
        hyperbolic_distance(1.0, 1.0, 1.5)


def test_hyperbolic_distance_law_of_cosines():
    # independent check through the half-angle form:
    # cosh a = cosh(r-r2) + (1-x) sinh r sinh r2
    rng = np.random.default_rng(7)
    r = rng.uniform(0.1, 8.0, 100)
    r2 = rng.uniform(0.1, 8.0, 100)
    x = rng.uniform(-1.0, 1.0, 100)
    a = hyperbolic_distance(r, r2, x)
    expected = np.arccosh(np.cosh(r - r2) + (1.0 - x) * np.sinh(r) * np.sinh(r2))
    np.testing.assert_allclose(a, expected, rtol=1e-12, atol=1e-12)


def test_distance_derivative_finite_difference():
    eps = 1e-6
    for r, r2, x in [(1.0, 2.0, 0.3), (4.0, 0.7, -0.8), (2.0, 2.0, 0.1)]:
        fd = (
            hyperbolic_distance(r + eps, r2, x) - hyperbolic_distance(r - eps, r2, x)
        ) / (2 * eps)
        assert distance_derivative(r, r2, x) == pytest.approx(fd, rel=1e-8)


def test_distance_derivative_collinear():
    # along the ray (x=1) with r > r2 the distance is r - r2, slope 1
    assert distance_derivative(3.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    # exactly coincident points: not defined
    assert math.isnan(distance_derivative(0.0, 0.0, 0.5))


def test_grid_layout():
    grid = RadialGrid(R=10.0, N=8)
    assert grid.h == pytest.approx(1.25)
    assert grid.size == 7
    np.testing.assert_allclose(grid.nodes, 1.25 * np.arange(1, 8))
    np.testing.assert_allclose(grid.frequencies, (np.pi / 10.0) * np.arange(1, 8))


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(R=0.0, N=16)
    with pytest.raises(ValueError):
        RadialGrid(R=-1.0, N=16)
    with pytest.raises(ValueError):
        RadialGrid(R=10.0, N=3)
    with pytest.raises(ValueError):
        RadialGrid(R=float("inf"), N=16)


def test_delta_exponent():
    assert delta_exponent(2.0) == 0.0
    assert delta_exponent(4.0) == pytest.approx(0.75)
    assert delta_exponent(6.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        delta_exponent(1.5)


def test_admissible_pairs():
    pair = AdmissiblePair.from_q(3, 4.0)
    assert pair.p == pytest.approx(8.0 / 3.0)
    assert pair.delta == pytest.approx(0.75)
    assert AdmissiblePair.from_q(3, 6.0).p == pytest.approx(2.0)
    assert AdmissiblePair.from_q(2, 4.0).p == pytest.approx(4.0)
    with pytest.raises(ValueError, match="admissible"):
        AdmissiblePair(d=3, p=4.0, q=4.0)
    # q = inf forces p = 4/d < 2 in dimension 3, and in dimension 2 it is
    # the forbidden endpoint: never admissible here
    with pytest.raises(ValueError):
        AdmissiblePair.from_q(3, math.inf)
    with pytest.raises(ValueError):
        AdmissiblePair(d=2, p=2.0, q=math.inf)
    with pytest.raises(ValueError):
        AdmissiblePair.from_q(3, 1.0)
