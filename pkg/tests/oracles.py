"""Independent reference implementations used by the tests.

Everything here is deliberately written from the defining formulas, not by
calling back into the package: derivatives are finite differences on the
pointwise values, angular integrals are graded Gauss-Legendre panels over
the angle cosine, and the pair sum is a plain double loop (blocked only for
memory).  Slow but transparent.
"""

import numpy as np

# panels graded toward x = 1, where the pair distance degenerates on the
# diagonal; deliberately a different layout than the one the package uses
_PANELS = (-1.0, 0.0, 0.5, 0.8, 0.95, 0.99, 0.998, 0.9996, 1.0)


def angle_quadrature(nodes_per_panel=16):
    gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    xs, ws = [], []
    for a, b in zip(_PANELS[:-1], _PANELS[1:]):
        xs.append(0.5 * (b - a) * (gx + 1.0) + a)
        ws.append(0.5 * (b - a) * gw)
    return np.concatenate(xs), np.concatenate(ws)


def pair_distance_r_derivative(r, rho, x):
    """d a / d r from the hyperbolic law of cosines, coded independently."""
    c = np.cosh(r) * np.cosh(rho) - x * np.sinh(r) * np.sinh(rho)
    a = np.arccosh(np.maximum(c, 1.0))
    num = np.sinh(r) * np.cosh(rho) - x * np.cosh(r) * np.sinh(rho)
    return num / np.sinh(np.where(a == 0.0, np.inf, a))


def angular_kernel_numeric(r, rho, nodes_per_panel=24):
    """int_{-1}^{1} (d a / d r) dx by graded panels."""
    x, w = angle_quadrature(nodes_per_panel)
    vals = pair_distance_r_derivative(
        np.asarray(r, dtype=float)[..., None],
        np.asarray(rho, dtype=float)[..., None],
        x,
    )
    return vals @ w


def five_point_derivative(values, h):
    """O(h^4) centered first derivative; one-sided O(h) at the edges.

    Fine for fields that vanish near both ends of the grid, which is the
    only place the low-order edge stencils contribute.
    """
    out = np.empty_like(values)
    out[2:-2] = (
        -values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]
    ) / (12.0 * h)
    out[0] = (values[1] - values[0]) / h
    out[1] = (values[2] - values[0]) / (2.0 * h)
    out[-2] = (values[-1] - values[-3]) / (2.0 * h)
    out[-1] = (values[-1] - values[-2]) / h
    return out


def brute_force_momentum(f, nodes_per_panel=16, block=64):
    """Two-point interaction momentum straight from its definition.

    M = 2 Im int int |u(y)|^2 (d a / d r_x) u'(r_x) conj(u(r_x)) dV(y) dV(x),
    reduced over the two spheres (a pair integral of a function of the angle
    cosine is 8 pi^2 times its x-integral) and evaluated as a full double
    sum over node pairs with the numeric angular factor.
    """
    grid = f.grid
    r = grid.nodes
    u = f.values
    du = five_point_derivative(u, grid.h)
    s2 = np.sinh(r) ** 2
    p = np.imag(du * np.conj(u)) * s2
    q = np.abs(u) ** 2 * s2
    x, w = angle_quadrature(nodes_per_panel)
    total = 0.0
    for start in range(0, grid.size, block):
        rj = r[start : start + block]
        da = pair_distance_r_derivative(
            rj[:, None, None], r[None, :, None], x[None, None, :]
        )
        k_block = da @ w
        total += float(p[start : start + block] @ k_block @ q)
    return 16.0 * np.pi**2 * grid.h**2 * total
