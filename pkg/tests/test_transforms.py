import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from hypnls.geometry import Geometry, RadialGrid
from hypnls.transforms import (
    FOUR_PI,
    RadialField,
    SpectralField,
    continuum_transform,
    field_from_reduced,
    forward_transform,
    inverse_transform,
    l2_norm,
    lq_norm,
    mass,
    reduced_derivative,
    reduced_values,
    sobolev_norm,
    spectral_mass,
    tail_mass_fraction,
    transform_at_zero,
)

GRID = RadialGrid(R=40.0, N=512)
GEOMETRIES = (Geometry.HYPERBOLIC3, Geometry.EUCLIDEAN3)


def random_field(grid, geometry, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    return field_from_reduced(grid, geometry, v)


def gaussian(grid, geometry, center=5.0, width=1.0, amplitude=1.0):
    u = amplitude * np.exp(-(((grid.nodes - center) / width) ** 2))
    return RadialField(grid, geometry, u)


def test_roundtrip_and_plancherel():
    for geometry in GEOMETRIES:
        for seed in range(8):
            f = random_field(GRID, geometry, seed)
            F = forward_transform(f)
            back = inverse_transform(F)
            err = np.max(np.abs(back.reduced - f.reduced)) / np.max(np.abs(f.reduced))
            assert err < 1e-13
            assert spectral_mass(F) == pytest.approx(mass(f), rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.booleans())
def test_roundtrip_property(seed, hyperbolic):
    geometry = Geometry.HYPERBOLIC3 if hyperbolic else Geometry.EUCLIDEAN3
    grid = RadialGrid(R=17.0, N=64)
    f = random_field(grid, geometry, seed)
    back = inverse_transform(forward_transform(f))
    np.testing.assert_allclose(back.reduced, f.reduced, rtol=0, atol=1e-12)


def test_single_mode_concentrates():
    k = 11
    v = np.sin(GRID.frequencies[k - 1] * GRID.nodes)
    f = field_from_reduced(GRID, Geometry.HYPERBOLIC3, v)
    F = forward_transform(f)
    coeffs = np.abs(F.coeffs)
    assert np.argmax(coeffs) == k - 1
    others = np.delete(coeffs, k - 1)
    assert np.max(others) < 1e-12 * coeffs[k - 1]


def test_mass_against_dense_quadrature():
    # oracle: adaptive quadrature of 4*pi int |u(r)|^2 m(r)^2 dr; the domain
    # is truncated to the effective support of the bump (the tail past r=16
    # contributes < 1e-20 relative) so quad's error estimate stays sharp
    for geometry, weight in (
        (Geometry.HYPERBOLIC3, lambda r: np.sinh(r) ** 2),
        (Geometry.EUCLIDEAN3, lambda r: r**2),
    ):
        f = gaussian(GRID, geometry, center=4.0, width=1.5)
        integrand = lambda r: np.exp(-2 * ((r - 4.0) / 1.5) ** 2) * weight(r)
        oracle, err = scipy.integrate.quad(integrand, 0.0, 16.0, limit=200)
        assert err < 1e-8 * oracle
        assert mass(f) == pytest.approx(FOUR_PI * oracle, rel=1e-9)


def test_lq_norm_against_dense_quadrature():
    q = 4.0
    for geometry, weight in (
        (Geometry.HYPERBOLIC3, lambda r: np.sinh(r) ** 2),
        (Geometry.EUCLIDEAN3, lambda r: r**2),
    ):
        f = gaussian(GRID, geometry, center=4.0, width=1.5)
        integrand = lambda r: np.exp(-q * ((r - 4.0) / 1.5) ** 2) * weight(r)
        oracle, err = scipy.integrate.quad(integrand, 0.0, 16.0, limit=200)
        assert err < 1e-8 * oracle
        assert lq_norm(f, q) == pytest.approx((FOUR_PI * oracle) ** (1 / q), rel=1e-9)


def test_lq_norm_guards_and_l2_consistency():
    f = gaussian(GRID, Geometry.HYPERBOLIC3)
    assert lq_norm(f, 2.0) == pytest.approx(l2_norm(f), rel=1e-14)
    with pytest.raises(ValueError, match="q >= 2"):
        lq_norm(f, 1.5)


def test_lq_norm_on_overflowing_box():
    # the density |v|^q m^{2-q} must be assembled without ever forming
    # sinh(r) itself, which is inf over most of this grid
    grid = RadialGrid(R=2000.0, N=2048)
    v = np.exp(-((grid.nodes - 5.0) ** 2))
    f = field_from_reduced(grid, Geometry.HYPERBOLIC3, v)
    val = lq_norm(f, 4.0)
    assert np.isfinite(val) and val > 0


def test_sobolev_norm_single_mode():
    k = 9
    for geometry in GEOMETRIES:
        v = np.sin(GRID.frequencies[k - 1] * GRID.nodes)
        f = field_from_reduced(GRID, geometry, v)
        lam = GRID.frequencies[k - 1]
        # the multiplier is the shifted one in both geometries
        expected = (1.0 + lam * lam) ** 0.75 * l2_norm(f)
        assert sobolev_norm(f, 1.5) == pytest.approx(expected, rel=1e-12)
    assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-14)
    with pytest.raises(ValueError):
        sobolev_norm(f, 3.5)


def test_continuum_transform_against_quadrature():
    # oracle: fhat(lambda) = sqrt(2/pi) / lambda * int sin(lambda r) v(r) dr
    # by adaptive quadrature on the exact reduced profile
    grid = RadialGrid(R=40.0, N=2048)
    center, width = 5.0, 1.0

    def v_exact(r):
        return np.exp(-(((r - center) / width) ** 2)) * np.sinh(r)

    f = RadialField(grid, Geometry.HYPERBOLIC3, np.exp(-(((grid.nodes - center) / width) ** 2)))
    lam, fhat = continuum_transform(forward_transform(f))
    for k in (3, 20, 77):
        # the dedicated oscillatory rule keeps the estimate sharp for the
        # high mode, whose value is tiny compared to the integrand scale
        oracle, err = scipy.integrate.quad(
            v_exact, 0.0, 14.0, weight="sin", wvar=lam[k], limit=400
        )
        oracle *= np.sqrt(2.0 / np.pi) / lam[k]
        assert err < 1e-5 * abs(oracle)
        assert fhat[k] == pytest.approx(oracle, rel=1e-9)


def test_transform_at_zero_is_small_lambda_limit():
    grid = RadialGrid(R=40.0, N=4096)
    f = gaussian(grid, Geometry.HYPERBOLIC3, center=3.0, width=0.8)
    lam, fhat = continuum_transform(forward_transform(f))
    zero = transform_at_zero(f)
    # fhat is even in lambda with fhat(lam) = fhat(0) + O(lam^2); the
    # quadratic-kill extrapolation through the first two modes leaves O(lam^4)
    assert abs(fhat[0] - zero) < 0.05 * abs(zero)
    extrapolated = (4.0 * fhat[0] - fhat[1]) / 3.0
    assert abs(extrapolated - zero) < 0.05 * abs(fhat[0] - zero)


def test_reduced_derivative_single_mode_exact():
    k = 13
    lam = GRID.frequencies[k - 1]
    f = field_from_reduced(GRID, Geometry.HYPERBOLIC3, np.sin(lam * GRID.nodes))
    dv = reduced_derivative(f)
    np.testing.assert_allclose(dv, lam * np.cos(lam * GRID.nodes), rtol=0, atol=1e-12)


def test_reduced_derivative_matches_finite_differences():
    grid = RadialGrid(R=40.0, N=4096)
    f = gaussian(grid, Geometry.HYPERBOLIC3, center=6.0, width=1.2)
    dv = reduced_derivative(f)
    v = reduced_values(f)
    fd = (v[2:] - v[:-2]) / (2.0 * grid.h)
    # centered differences are O(h^2); compare against the largest slope
    err = np.max(np.abs(dv[1:-1] - fd))
    assert err < 1e-4 * np.max(np.abs(fd))


def test_tail_mass_fraction():
    near_origin = gaussian(GRID, Geometry.HYPERBOLIC3, center=4.0, width=0.5)
    near_wall = gaussian(GRID, Geometry.HYPERBOLIC3, center=38.0, width=0.5)
    assert tail_mass_fraction(near_origin) < 1e-15
    assert tail_mass_fraction(near_wall) > 0.99
    # a wider margin captures more of an intermediate bump
    mid = gaussian(GRID, Geometry.HYPERBOLIC3, center=30.0, width=1.0)
    assert tail_mass_fraction(mid, margin=15.0) > tail_mass_fraction(mid, margin=5.0)


def test_field_requires_matching_shape_and_finiteness():
    with pytest.raises(ValueError, match="values"):
        RadialField(GRID, Geometry.HYPERBOLIC3, np.zeros(GRID.size - 1))
    bad = np.zeros(GRID.size)
    bad[3] = np.nan
    with pytest.raises(ValueError, match="finite"):
        RadialField(GRID, Geometry.HYPERBOLIC3, bad)
    with pytest.raises(ValueError, match="coefficients"):
        SpectralField(GRID, Geometry.HYPERBOLIC3, np.full(GRID.size, np.inf))


def test_field_construction_beyond_overflow_horizon():
    # sinh overflows past r ~ 710; pointwise data there must be zero, and a
    # nonzero value is rejected rather than silently corrupted
    grid = RadialGrid(R=1600.0, N=2048)
    u = np.exp(-((grid.nodes - 10.0) ** 2))
    f = RadialField(grid, Geometry.HYPERBOLIC3, u)
    assert np.all(np.isfinite(f.reduced))
    bad = u.copy()
    bad[-1] = 1e-300
    with pytest.raises(ValueError, match="reduced"):
        RadialField(grid, Geometry.HYPERBOLIC3, bad)
    # the reduced-value constructor covers the same box without restriction
    v = np.exp(-((grid.nodes - 1000.0) ** 2))
    g = field_from_reduced(grid, Geometry.HYPERBOLIC3, v)
    assert np.all(g.values[grid.nodes > 1400.0] == 0)
    assert l2_norm(g) > 0


def test_field_from_reduced_roundtrip():
    f = random_field(GRID, Geometry.EUCLIDEAN3, seed=3)
    v = reduced_values(f)
    g = field_from_reduced(GRID, Geometry.EUCLIDEAN3, v)
    np.testing.assert_allclose(g.values, f.values, rtol=1e-14)
    # reduced_values hands out a copy: mutating it must not touch the field
    v[:] = 0.0
    assert np.max(np.abs(f.reduced)) > 0
