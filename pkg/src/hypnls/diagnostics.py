"""Scattering, virial and interaction-functional diagnostics.

Everything in this module consumes trajectories or fields produced by the
integrator and reduces them to the scalar quantities the dispersive theory
makes claims about: scattering profiles and their Cauchy defects, the
pairing that detects long-range nonlinear effects, weighted space-time
norms, the two-point interaction momentum whose monotonicity is the
Morawetz estimate, the Galilean-type operator J(t) and the weighted
Gagliardo-Nirenberg quotient it controls, and the pseudo-conformal virial
balance.

Conventions: inner products are <f, g> = int f conj(g) dV with
dV = 4 pi m(r)^2 dr, matching `transforms.mass`; all spectral norms carry
the same 4 pi factor, so L^2 quantities computed on either side of the
transform agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Geometry,
    distance_derivative,
    log_reduction_weight,
    r_coth_r,
)
from .propagators import free_evolve, propagation_symbol
from .transforms import (
    FOUR_PI,
    SpectralField,
    field_from_reduced,
    forward_transform,
    inverse_transform,
    l2_norm,
    lq_norm,
    reduced_derivative,
    reduced_values,
    sobolev_norm,
)


class ResolutionError(ValueError):
    """A diagnostic was asked to integrate data it cannot resolve."""


class DegenerateDataError(ValueError):
    """A quotient diagnostic was fed data with a vanishing denominator."""


# ---------------------------------------------------------------------------
# scattering
# ---------------------------------------------------------------------------


def scattering_profile(f, t):
    """Pull the solution at time t back along the free flow: U(-t) u(t).

    For a scattering solution these profiles converge as t grows; their
    Cauchy differences (`scattering_defect`) measure how much nonlinear
    interaction happens after a given time.

    Args:
        f: RadialField (solution snapshot at time t) or SpectralField.
        t: the time the snapshot was taken at.

    Returns:
        SpectralField of the profile.
    """
    F = f if isinstance(f, SpectralField) else forward_transform(f)
    mu = propagation_symbol(F.geometry, F.grid)
    return SpectralField(F.grid, F.geometry, F.coeffs * np.exp(1j * t * mu))


def scattering_defect(traj, t1, t2):
    """L^2 distance between the scattering profiles at two snapshot times."""
    p1 = scattering_profile(traj.field_at(t1), t1)
    p2 = scattering_profile(traj.field_at(t2), t2)
    diff = p2.coeffs - p1.coeffs
    return float(np.sqrt(FOUR_PI * traj.grid.h * np.sum(np.abs(diff) ** 2)))


@dataclass(frozen=True)
class ScatteringReport:
    """Summary of profile convergence along a trajectory.

    Attributes:
        probe_times: the times the profiles were compared at.
        defects: symmetric matrix of pairwise profile distances.
        exponent: fitted power of the consecutive defects D(T_i, T_{i+1})
            against T_i (log-log least squares).
        exponent_band: (lo, hi) two-standard-error band of the fit.
        final_profile: RadialField obtained from the profile at the last
            probe time — the numerical scattering state.
    """

    probe_times: tuple
    defects: np.ndarray
    exponent: float
    exponent_band: tuple
    final_profile: RadialField


def fit_power_law(times, values):
    """Least-squares exponent of values ~ C * t^alpha, with a 2-SE band.

    Args:
        times: positive abscissae.
        values: positive data.

    Returns:
        (alpha, (lo, hi)).
    """
    x = np.log(np.asarray(times, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points to fit a power law")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(x.size - 2, 1)
    se = np.sqrt(np.sum(resid**2) / dof / np.sum((x - x.mean()) ** 2))
    return float(slope), (float(slope - 2 * se), float(slope + 2 * se))


def scattering_report(traj, probe_times):
    """Compare scattering profiles along a trajectory.

    Args:
        traj: Trajectory whose snapshots contain every probe time.
        probe_times: increasing times (at least two).

    Returns:
        ScatteringReport.
    """
    probes = tuple(float(t) for t in probe_times)
    if len(probes) < 2 or list(probes) != sorted(probes):
        raise ValueError("probe_times must be at least two increasing times")
    n = len(probes)
    defects = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = scattering_defect(traj, probes[i], probes[j])
            defects[i, j] = defects[j, i] = d
    consecutive = np.array([defects[i, i + 1] for i in range(n - 1)])
    if np.all(consecutive > 0):
        exponent, band = fit_power_law(probes[:-1], consecutive)
    else:
        exponent, band = float("-inf"), (float("-inf"), float("-inf"))
    final = inverse_transform(scattering_profile(traj.field_at(probes[-1]), probes[-1]))
    return ScatteringReport(probes, defects, exponent, band, final)


def nonlinear_pairing(traj, psi, t):
    """Pairing <U(t) psi, |u|^{2 sigma} u(t)> against a fixed test datum.

    Its modulus decays like t^{-sigma d} for short-range scattering data;
    the fitted exponent is the quantitative long-range/short-range
    discriminator.

    Args:
        traj: Trajectory (supplies u(t) and sigma).
        psi: RadialField test datum at time 0.
        t: snapshot time.

    Returns:
        Complex pairing value.
    """
    u = traj.field_at(t)
    probe = free_evolve(psi, t)
    sigma = traj.config.sigma
    # The volume element m^2 cancels against the reduction weights of the
    # two paired fields, leaving the bounded modulus factor |u|^{2 sigma}
    # = (|v| e^{-log m})^{2 sigma}; nothing here overflows on large boxes.
    v = reduced_values(u)
    logm = log_reduction_weight(u.geometry, u.grid.nodes)
    amp = (np.abs(v) * np.exp(-logm)) ** (2.0 * sigma)
    return complex(
        FOUR_PI * u.grid.h * np.sum(reduced_values(probe) * np.conj(v) * amp)
    )


def _weighted_lq_norm(f, q):
    """||w3^{1-2/q} u||_{L^q(dV)} without forming u or the weight.

    The weight powers cancel against the volume element: the density
    |w3^{1-2/q} u|^q m^2 equals |v|^q r^{2-q} exactly, in both geometries
    (on the Euclidean grid w3 = 1 and m = r give the same expression).
    The cancellation matters because sinh r overflows past r ~ 710 while
    the reduced form stays finite on arbitrarily large boxes.
    """
    dens = np.abs(reduced_values(f)) ** q * f.grid.nodes ** (2.0 - q)
    return float((FOUR_PI * f.grid.h * np.sum(dens)) ** (1.0 / q))


def spacetime_norm(traj, p, q, weighted=False):
    """Space-time norm ( int ||u(t)||_{L^q}^p dt )^{1/p} over the snapshots.

    The time integral uses the trapezoid rule on the snapshot times, which
    is only meaningful on a reasonably dense ladder: fewer than 16
    snapshots raises ResolutionError.  With `weighted=True` the spatial
    norm is ||w3^{1-2/q} u||_{L^q(dV)}, the hyperbolic weighted version
    (on the Euclidean grid the weight degenerates to one and the two
    variants coincide).

    Args:
        traj: Trajectory.
        p: temporal exponent, >= 1.
        q: spatial exponent, >= 2.
        weighted: include the dispersive weight w3^{1-2/q}.
    """
    if p < 1 or q < 2:
        raise ValueError("spacetime_norm needs p >= 1 and q >= 2")
    times = np.asarray(traj.times)
    if times.size < 16:
        raise ResolutionError(
            f"spacetime_norm needs at least 16 snapshots, got {times.size}"
        )
    norms = []
    for _, f in traj.snapshots:
        norms.append(_weighted_lq_norm(f, q) if weighted else lq_norm(f, q))
    norms = np.asarray(norms)
    return float(np.trapezoid(norms**p, times) ** (1.0 / p))


# ---------------------------------------------------------------------------
# interaction momentum (Morawetz)
# ---------------------------------------------------------------------------


def _angular_kernel(r, rp):
    """K(r, r') = int_{-1}^{1} (d a / d r)(r, r', x) dx in closed form.

    Substituting the distance a for the angle cosine turns the integral
    into an elementary one:

        K = [cosh r (sinh(r+r') - sinh|r-r'|) - 2 min(r, r') cosh r']
            / (sinh^2 r sinh r'),

    which evaluates to 2 cosh^2 r / sinh^2 r - 2 r' cosh r'/(sinh r' sinh^2 r)
    for r >= r' and 2 cosh r' (cosh r sinh r - r)/(sinh^2 r sinh r') for
    r < r'.  K is continuous across the diagonal and tends to 2 as r grows
    — the constant that ultimately feeds the Morawetz lower bound.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    # coth and 1/sinh^2 forms stay finite where cosh/sinh overflow
    with np.errstate(over="ignore"):
        inv_sinh2 = 1.0 / np.sinh(r) ** 2
    coth_r = 1.0 / np.tanh(r)
    coth_rp = 1.0 / np.tanh(rp)
    ge = r >= rp
    out = np.where(
        ge,
        2.0 * coth_r**2 - 2.0 * rp * coth_rp * inv_sinh2,
        2.0 * coth_rp * (coth_r - r * inv_sinh2),
    )
    return out


# graded Gauss-Legendre panels on [-1, 1], refined toward x = 1 where the
# distance degenerates on the diagonal
_X_PANELS = (-1.0, 0.0, 0.75, 0.9375, 0.984375, 0.99609375, 0.9990234375, 1.0)


def _x_quadrature(nodes_per_panel):
    xs, ws = [], []
    gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    for a, b in zip(_X_PANELS[:-1], _X_PANELS[1:]):
        xs.append(0.5 * (b - a) * (gx + 1.0) + a)
        ws.append(0.5 * (b - a) * gw)
    return np.concatenate(xs), np.concatenate(ws)


def interaction_momentum(f, method="exact", x_nodes=8, block=64):
    """Two-point radial interaction momentum M_a of a field.

        M_a = 2 Im  int int  |u(y)|^2  (grad_x a)(x, y) . grad u(x)  conj(u(x))
                    dV(y) dV(x),

    with a the pairwise hyperbolic distance.  After the angular reduction
    (the sphere-pair integral of a function of the angle contributes
    8 pi^2 times its x-integral) this is

        M_a = 16 pi^2 h^2 sum_{j,l} P_j Q_l K(r_j, r_l),

    with P = Im(v' conj(v)), Q = |v|^2 and K the angular kernel.  Along a
    defocusing trajectory t -> M_a(u(t)) grows at least as fast as twice
    the time integral of ||u||_{L^4(dV)}^4 (see `morawetz_check`).

    Args:
        f: RadialField on Hyperbolic3.
        method: "exact" uses the closed-form angular kernel and prefix sums
            (O(N)); "gauss" re-derives the kernel by graded Gauss-Legendre
            panels in the angle variable (O(N^2 x_nodes), validation only).
        x_nodes: Gauss nodes per panel for method="gauss".
        block: row blocking for method="gauss".

    Returns:
        Real value of M_a.
    """
    if f.geometry is not Geometry.HYPERBOLIC3:
        raise ValueError("interaction momentum is defined on Hyperbolic3")
    grid = f.grid
    v = reduced_values(f)
    dv = reduced_derivative(f)
    p = np.imag(dv * np.conj(v))
    q = np.abs(v) ** 2
    r = grid.nodes
    scale = 16.0 * np.pi**2 * grid.h**2

    if method == "exact":
        coth = 1.0 / np.tanh(r)                    # overflow-free, unlike cosh/sinh
        with np.errstate(over="ignore"):
            inv_sinh2 = 1.0 / np.sinh(r) ** 2      # 0 once sinh overflows
        a_pref = np.cumsum(q)                      # sum_{l <= j} Q_l
        b_pref = np.cumsum(q * r * coth)           # sum_{l <= j} Q_l r_l coth r_l
        c_all = np.sum(q * coth)
        c_suff = c_all - np.cumsum(q * coth)       # sum_{l > j} Q_l coth r_l
        rows = (
            2.0 * coth**2 * a_pref
            - 2.0 * inv_sinh2 * b_pref
            + 2.0 * (coth - r * inv_sinh2) * c_suff
        )
        return float(scale * np.sum(p * rows))

    if method == "gauss":
        x, w = _x_quadrature(x_nodes)
        total = 0.0
        for start in range(0, grid.size, block):
            rj = r[start : start + block]
            # (j, l, x) block of da/dr, contracted against the x weights
            da = distance_derivative(
                rj[:, None, None], r[None, :, None], x[None, None, :]
            )
            k_block = np.einsum("jlx,x->jl", da, w)
            total += float(p[start : start + block] @ k_block @ q)
        return float(scale * total)

    raise ValueError(f"unknown method {method!r}; use 'exact' or 'gauss'")


def morawetz_check(traj):
    """Interaction-momentum balance along a defocusing trajectory.

    Compares the growth of M_a across the run with twice the time integral
    of ||u(t)||_{L^4(dV)}^4 (trapezoid on the snapshot ladder; at least 16
    snapshots required).  For defocusing runs the growth dominates the
    integral, so `margin` should only be negative by quadrature noise.

    Returns:
        dict with keys: lhs (momentum growth), rhs (twice the L^4 time
        integral), margin (lhs - rhs), h1_sup, momentum_begin, momentum_end.
    """
    times = np.asarray(traj.times)
    if times.size < 16:
        raise ResolutionError(
            f"morawetz_check needs at least 16 snapshots, got {times.size}"
        )
    if traj.config.kappa != 1:
        raise ValueError("the interaction-momentum bound is a defocusing statement")
    m_begin = interaction_momentum(traj.snapshots[0][1])
    m_end = interaction_momentum(traj.snapshots[-1][1])
    l4 = np.array([lq_norm(f, 4) ** 4 for _, f in traj.snapshots])
    rhs = 2.0 * float(np.trapezoid(l4, times))
    h1_sup = max(sobolev_norm(f, 1) for _, f in traj.snapshots)
    lhs = m_end - m_begin
    return {
        "lhs": lhs,
        "rhs": rhs,
        "margin": lhs - rhs,
        "h1_sup": float(h1_sup),
        "momentum_begin": m_begin,
        "momentum_end": m_end,
    }


# ---------------------------------------------------------------------------
# Galilean operator, weighted Gagliardo-Nirenberg, pseudo-conformal balance
# ---------------------------------------------------------------------------


def galilean_apply(f, t):
    """Apply J(t) = e^{i t Laplacian} r e^{-i t Laplacian}-type operator.

    In factorised form J(t)u = e^{i r^2/4t} (2 i t / sinh r) d/dr
    (e^{-i r^2/4t} sinh(r) u); expanding the phase derivative analytically
    gives the equivalent expression actually evaluated,

        J(t) u = r u + 2 i t (d/dr v) / sinh r,      v = sinh(r) u,

    where dv/dr is the exact derivative of the sine interpolant.  At t = 0
    the operator is plain multiplication by r.  Along the free flow the
    L^2 norm of J(t) U(t) u0 is conserved (Heisenberg-type identity), which
    is what the tests pin it against.

    Args:
        f: RadialField on Hyperbolic3.
        t: time.

    Returns:
        RadialField J(t) f.  The result genuinely behaves like 1/r at the
        origin for t != 0 (finite L^2(dV) norm, unbounded values).
    """
    if f.geometry is not Geometry.HYPERBOLIC3:
        raise ValueError("the Galilean operator is implemented on Hyperbolic3")
    r = f.grid.nodes
    # In reduced form the operator is exact and overflow-free:
    # m * (r u + 2it v'/m) = r v + 2it v'.
    v_out = r * reduced_values(f)
    if t != 0:
        v_out = v_out + 2j * t * reduced_derivative(f)
    return field_from_reduced(f.grid, f.geometry, v_out)


def galilean_norm(jf):
    """L^2 norm of a Galilean-transformed field, origin endpoint included.

    Plain `l2_norm` sums over interior nodes only, which is exact (to
    O(h^2)) for fields whose reduced values vanish at r = 0.  J(t)f is the
    one field class that breaks this: its reduced values tend to
    2it v'(0) != 0 at the origin, and dropping that endpoint loses an O(h)
    slice of norm -- enough to make the conserved ||J(t)u(t)|| drift
    visibly.  Restoring the trapezoid endpoint (h/2)|g(0)|^2, with g(0)
    extrapolated through the first two nodes (g is even in r, so a
    zero-slope parabola is O(h^4) accurate), makes the Heisenberg identity
    hold to machine precision.

    Args:
        jf: RadialField, typically the output of `galilean_apply`.

    Returns:
        float norm.
    """
    g = reduced_values(jf)
    g0 = (4.0 * g[0] - g[1]) / 3.0
    endpoint = FOUR_PI * (jf.grid.h / 2.0) * abs(g0) ** 2
    return float(np.sqrt(l2_norm(jf) ** 2 + endpoint))


def weighted_gn_ratio(f, jf, t, q):
    """Weighted Gagliardo-Nirenberg quotient controlled by J(t).

        ||w3^{1-2/q} f||_{L^q(dV)} * |t|^{delta(q)}
        / ( ||f||_{L^2}^{1-delta} ||J f||_{L^2}^{delta} ),


    with delta(q) = 3 (1/2 - 1/q), for 2 <= q < 6.  At q = 2 the quotient
    is identically 1; along a free evolution it stays bounded uniformly in
    time, which is the practical content of the weighted interpolation
    inequality.

    Args:
        f: RadialField.
        jf: J(t) applied to f (see `galilean_apply`).
        t: the time J was taken at.
        q: spatial exponent in [2, 6).

    Raises:
        DegenerateDataError: if either denominator norm vanishes.
    """
    if not 2.0 <= q < 6.0:
        raise ValueError("weighted_gn_ratio needs q in [2, 6)")
    delta = 3.0 * (0.5 - 1.0 / q)
    nf = l2_norm(f)
    nj = galilean_norm(jf)
    if nf == 0.0 or (delta > 0 and nj == 0.0):
        raise DegenerateDataError("weighted_gn_ratio needs nonzero f and J f")
    num = _weighted_lq_norm(f, q)
    return float(num * abs(t) ** delta / (nf ** (1.0 - delta) * nj**delta))


def pseudo_conformal(f, jf, t, sigma):
    """Pseudo-conformal virial quantities at one time.

        Q(t)   = ||J(t) u||^2 + (4 t^2/(sigma+1)) int |u|^{2 sigma + 2} dV
        dQ/dt  = (4 t/(sigma+1)) int (2 - sigma - 2 sigma r coth r)
                 |u|^{2 sigma + 2} dV

    On hyperbolic space r coth r >= 1, so for sigma > 2/3 the reported
    rate is strictly negative for t > 0: the virial quantity decays, which
    encodes the accelerated decay of the nonlinear solution.

    Args:
        f: solution snapshot u(t) on Hyperbolic3.
        jf: J(t) u(t).
        t: snapshot time.
        sigma: nonlinearity power.

    Returns:
        dict with keys 'virial' (Q) and 'rate' (the dQ/dt value above).
    """
    if f.geometry is not Geometry.HYPERBOLIC3:
        raise ValueError("the pseudo-conformal balance is implemented on Hyperbolic3")
    r = f.grid.nodes
    # |u|^{2 sigma + 2} sinh^2 r = |v|^2 (|v| e^{-log m})^{2 sigma}: the
    # volume element cancels two reduction weights, and the remainder only
    # involves the bounded modulus |u| -- safe on boxes where sinh r
    # overflows.
    v = reduced_values(f)
    logm = log_reduction_weight(f.geometry, r)
    dens = np.abs(v) ** 2 * (np.abs(v) * np.exp(-logm)) ** (2.0 * sigma)
    integral = FOUR_PI * f.grid.h * float(np.sum(dens))
    virial = galilean_norm(jf) ** 2 + 4.0 * t * t / (sigma + 1.0) * integral
    coeff = 2.0 - sigma - 2.0 * sigma * r_coth_r(r)
    rate_integral = FOUR_PI * f.grid.h * float(np.sum(coeff * dens))
    rate = 4.0 * t / (sigma + 1.0) * rate_integral
    return {"virial": virial, "rate": rate}
