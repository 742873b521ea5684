"""Deterministic quadrature over spheres, radial annuli and decaying R^3 integrands.

Surface rules are product rules: Gauss-Legendre in cos(theta) times a uniform
azimuthal grid.  A rule of declared degree D integrates every polynomial of
total degree <= D over the unit sphere exactly (up to roundoff).  Radial rules
are geometric panels with fixed-order Gauss-Legendre on each panel, so that
integrands varying on a log-r scale are resolved uniformly per octave.

All error estimates come from degree/resolution halving, never from embedded
pairs, so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import TailNotDecaying

FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# sphere rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SphereRule:
    """Node/weight set for integrals over the unit sphere.

    Attributes
    ----------
    degree: declared polynomial exactness degree.
    nodes: (N, 3) unit vectors.
    weights: (N,) solid-angle weights, summing to 4*pi.
    theta, phi: (N,) spherical angles of the nodes (theta away from +z).
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    def __len__(self):
        return self.nodes.shape[0]

    def to_csv(self, path):
        """Dump nodes and weights as x,y,z,weight rows for inspection."""
        with open(path, "w", newline="\n") as fh:
            fh.write("x,y,z,weight\n")
            for p, w in zip(self.nodes, self.weights):
                fh.write(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},{w:.17g}\n")


@lru_cache(maxsize=64)
def make_sphere_rule(degree: int) -> SphereRule:
    """Product Gauss rule on the unit sphere with exactness >= degree.

    The azimuthal grid size is forced even, so odd-parity integrands cancel
    exactly node-by-node.
    """
    if degree < 2 or degree % 2 != 0:
        raise ValueError("sphere rule degree must be an even integer >= 2")
    ntheta = (degree + 2) // 2
    nphi = degree + 2  # even by construction
    ct, wt = leggauss(ntheta)
    phis = 2.0 * math.pi * np.arange(nphi) / nphi
    st = np.sqrt(1.0 - ct**2)

    cosT = np.repeat(ct, nphi)
    sinT = np.repeat(st, nphi)
    phi = np.tile(phis, ntheta)
    nodes = np.stack(
        [sinT * np.cos(phi), sinT * np.sin(phi), cosT], axis=1
    )
    weights = np.repeat(wt, nphi) * (2.0 * math.pi / nphi)
    theta = np.arccos(np.clip(cosT, -1.0, 1.0))
    return SphereRule(degree=degree, nodes=nodes, weights=weights,
                      theta=theta, phi=phi)


def _half_degree(degree: int) -> int:
    half = degree // 2
    return max(2, half - (half % 2))


def integrate_sphere(f, r: float, rule: SphereRule):
    """Integrate f over the coordinate sphere |x| = r.

    f maps an (N, 3) array of points to (N,) or (N, k) values.  Returns
    (value, err) where err is the difference against the half-degree rule.
    """
    if r <= 0:
        raise ValueError("sphere radius must be positive")

    def _eval(rl):
        vals = np.asarray(f(r * rl.nodes), dtype=float)
        return r * r * (rl.weights @ vals)

    value = _eval(rule)
    coarse = _eval(make_sphere_rule(_half_degree(rule.degree)))
    return value, np.abs(value - coarse)


# ---------------------------------------------------------------------------
# radial rules and annuli
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialRule:
    """Panelised Gauss rule on [r_in, r_out], geometric panel boundaries."""

    r_in: float
    r_out: float
    boundaries: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    gauss_order: int
    panels_per_octave: int


def make_radial_rule(r_in: float, r_out: float, panels_per_octave: int = 4,
                     gauss_order: int = 8) -> RadialRule:
    if not (0.0 < r_in < r_out):
        raise ValueError("need 0 < r_in < r_out")
    octaves = math.log2(r_out / r_in)
    n_panels = max(1, math.ceil(octaves * panels_per_octave))
    bounds = np.geomspace(r_in, r_out, n_panels + 1)
    x, w = leggauss(gauss_order)
    lo = bounds[:-1]
    hi = bounds[1:]
    mid = 0.5 * (lo + hi)
    hw = 0.5 * (hi - lo)
    nodes = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    weights = (hw[:, None] * w[None, :]).ravel()
    return RadialRule(r_in=r_in, r_out=r_out, boundaries=bounds, nodes=nodes,
                      weights=weights, gauss_order=gauss_order,
                      panels_per_octave=panels_per_octave)


def _annulus_value(f, sphere_rule: SphereRule, radial_rule: RadialRule):
    S = radial_rule.nodes
    Z = sphere_rule.nodes
    X = (S[:, None, None] * Z[None, :, :]).reshape(-1, 3)
    vals = np.asarray(f(X), dtype=float)
    shape = (len(S), len(Z)) + vals.shape[1:]
    vals = vals.reshape(shape)
    inner = np.tensordot(sphere_rule.weights, vals, axes=([0], [1]))
    # inner has shape (len(S), ...) after contraction over sphere nodes
    inner = np.moveaxis(inner, 0, 0)
    rw = radial_rule.weights * radial_rule.nodes**2
    return np.tensordot(rw, inner, axes=([0], [0]))


def integrate_annulus(f, r_in: float, r_out: float,
                      sphere_rule: SphereRule | None = None,
                      radial_rule: RadialRule | None = None):
    """Integrate f over the annulus r_in <= |x| <= r_out.

    Nested sphere-then-radius quadrature; the error estimate is the change
    under halving both the sphere degree and the radial panel count.
    """
    if not (0.0 < r_in < r_out):
        raise ValueError("need 0 < r_in < r_out")
    if sphere_rule is None:
        sphere_rule = make_sphere_rule(24)
    if radial_rule is None:
        radial_rule = make_radial_rule(r_in, r_out)

    value = _annulus_value(f, sphere_rule, radial_rule)
    coarse_sphere = make_sphere_rule(_half_degree(sphere_rule.degree))
    coarse_radial = make_radial_rule(
        r_in, r_out,
        panels_per_octave=max(1, radial_rule.panels_per_octave // 2),
        gauss_order=radial_rule.gauss_order)
    coarse = _annulus_value(f, coarse_sphere, coarse_radial)
    return value, np.abs(value - coarse)


# ---------------------------------------------------------------------------
# improper integrals of decaying fields
# ---------------------------------------------------------------------------

_CHECK_DIRS = np.array([
    [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1],
    [1, 1, 1], [-1, 1, -1],
]) / np.array([1, 1, 1, 1, 1, 1, math.sqrt(3), math.sqrt(3)])[:, None]


def integrate_r3_decaying(f, r_cut: float, decay_order: int = 4,
                          sphere_rule: SphereRule | None = None,
                          panels_per_octave: int = 4):
    """Integrate f over R^3 given |f| <= C r^-q beyond r_cut.

    Returns (value over the ball B(r_cut), tail_bound) with
    tail_bound >= |integral outside B(r_cut)| computed from the sampled
    decay constant C.  Raises TailNotDecaying when the sampled bound grows.
    """
    q = decay_order
    if q < 4:
        raise ValueError("decay order must be >= 4 for a convergent moment")
    if r_cut <= 0:
        raise ValueError("r_cut must be positive")

    # sample the decay constant on dyadic shells past the cut
    radii = r_cut * 2.0 ** np.arange(0, 7)
    C_samples = np.empty(len(radii))
    for i, s in enumerate(radii):
        vals = np.abs(np.asarray(f(s * _CHECK_DIRS), dtype=float))
        C_samples[i] = float(np.max(vals)) * s**q
    tiny = 1e-300
    tail = C_samples[3:]
    if np.all(np.diff(tail) > 0) and tail[-1] > 2.0 * (C_samples[0] + tiny):
        raise TailNotDecaying(
            f"sampled r^{q}|f| grows from {C_samples[0]:.3e} to "
            f"{C_samples[-1]:.3e} past r_cut={r_cut:g}")
    C = float(np.max(C_samples))

    if sphere_rule is None:
        sphere_rule = make_sphere_rule(24)
    r_lo = r_cut * 2.0**-24
    radial = make_radial_rule(r_lo, r_cut,
                              panels_per_octave=panels_per_octave)
    value, qerr = integrate_annulus(f, r_lo, r_cut, sphere_rule, radial)

    center = np.max(np.abs(np.asarray(f(r_lo * _CHECK_DIRS[:4]), dtype=float)))
    ball_bound = FOUR_PI / 3.0 * r_lo**3 * float(center)
    tail_bound = FOUR_PI * C / ((q - 3) * r_cut ** (q - 3))
    return value, tail_bound + ball_bound + float(np.max(np.atleast_1d(qerr)))


def sphere_monomial_integral(a: int, b: int, c: int) -> float:
    """Exact unit-sphere integral of x^a y^b z^c by the beta-moment recursion.

    Zero unless all exponents are even; otherwise
    4*pi * (a-1)!! (b-1)!! (c-1)!! / (a+b+c+1)!!.
    """
    if a % 2 or b % 2 or c % 2:
        return 0.0

    def dfact(n):
        out = 1
        while n > 1:
            out *= n
            n -= 2
        return out

    return FOUR_PI * dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1)
