"""Center-of-mass flux integrals, ADM mass, curvature moments, limit verdicts.

The flux functional evaluated at radius r is

    c^a(r) = (1/16 pi m) * oint_{|x|=r} [ x^a (g_ij,i - g_ii,j) nu^j
                                          - (h_ia nu^i - h_ii nu^a) ] dS

with h = g - delta.  The metric-adapted version uses the g-unit normal of the
coordinate sphere and the induced g-area element; the flat version uses the
Euclidean normal and area element.  The two differ by O(1/r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MassZero, TooFewSamples
from .geometry import MetricSpec, dmetric_many, metric_many, scalar_curvature_many
from .quadrature import (SphereRule, _half_degree, integrate_annulus,
                         make_radial_rule, make_sphere_rule)

SIXTEEN_PI = 16.0 * math.pi


# ---------------------------------------------------------------------------
# flux integrands
# ---------------------------------------------------------------------------

def _tangent_frame(Z):
    """Deterministic orthonormal tangent pair at each unit vector."""
    a = np.where(np.abs(Z[:, 2:3]) < 0.9,
                 np.array([[0.0, 0.0, 1.0]]),
                 np.array([[1.0, 0.0, 0.0]]))
    e1 = np.cross(a, Z)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(Z, e1)
    return e1, e2


def _flux_vector(spec: MetricSpec, r: float, rule: SphereRule, flat: bool):
    """Unnormalised flux integral (before the 1/16 pi m factor)."""
    Z = rule.nodes
    X = r * Z
    g, ginv, _ = metric_many(spec, X)
    dg = dmetric_many(spec, X)
    h = g - np.eye(3)[None]

    term1 = np.einsum("niij->nj", dg) - np.einsum("njii->nj", dg)
    if flat:
        nu = Z
        dens = np.ones(len(Z))
    else:
        w = np.einsum("nij,nj->ni", ginv, Z)
        norm = np.sqrt(np.einsum("ni,nij,nj->n", w, g, w))
        nu = w / norm[:, None]
        e1, e2 = _tangent_frame(Z)
        g11 = np.einsum("ni,nij,nj->n", e1, g, e1)
        g12 = np.einsum("ni,nij,nj->n", e1, g, e2)
        g22 = np.einsum("ni,nij,nj->n", e2, g, e2)
        dens = np.sqrt(g11 * g22 - g12**2)

    t1 = np.einsum("nj,nj->n", term1, nu)
    trh = np.einsum("nii->n", h)
    term2 = np.einsum("nia,ni->na", h, nu) - trh[:, None] * nu
    integrand = r * Z * t1[:, None] - term2
    return r * r * np.einsum("n,n,na->a", rule.weights, dens, integrand)


def _c_cs_with_err(spec: MetricSpec, r: float, rule: SphereRule,
                   mass: float | None, flat: bool):
    m = spec.m if mass is None else mass
    if m == 0.0:
        raise MassZero("center-of-mass functional undefined for m = 0")
    if r < 4.0 * spec.rho0:
        raise ValueError(f"flux radius r={r:g} below 4*rho0={4 * spec.rho0:g}")
    fine = _flux_vector(spec, r, rule, flat) / (SIXTEEN_PI * m)
    coarse = _flux_vector(spec, r, make_sphere_rule(_half_degree(rule.degree)),
                          flat) / (SIXTEEN_PI * m)
    return fine, np.abs(fine - coarse)


def c_cs_at(spec: MetricSpec, r: float, rule: SphereRule | None = None,
            mass: float | None = None) -> np.ndarray:
    """Center-of-mass flux integral with the g-normal and g-area element."""
    rule = rule or make_sphere_rule(24)
    return _c_cs_with_err(spec, r, rule, mass, flat=False)[0]


def c_cs_flat_at(spec: MetricSpec, r: float, rule: SphereRule | None = None,
                 mass: float | None = None) -> np.ndarray:
    """Same flux integral with the Euclidean normal and area element."""
    rule = rule or make_sphere_rule(24)
    return _c_cs_with_err(spec, r, rule, mass, flat=True)[0]


def adm_mass_at(spec: MetricSpec, r: float,
                rule: SphereRule | None = None) -> float:
    """Mass flux (1/16 pi) oint (g_ij,i - g_ii,j) nu0^j dS0 at radius r."""
    if r < 4.0 * spec.rho0:
        raise ValueError(f"mass radius r={r:g} below 4*rho0={4 * spec.rho0:g}")
    rule = rule or make_sphere_rule(24)
    Z = rule.nodes
    dg = dmetric_many(spec, r * Z)
    term1 = np.einsum("niij->nj", dg) - np.einsum("njii->nj", dg)
    flux = r * r * np.einsum("n,nj,nj->", rule.weights, term1, Z)
    return float(flux / SIXTEEN_PI)


def scalar_moment_annulus(spec: MetricSpec, r_in: float, r_out: float,
                          alpha: int, sphere_rule: SphereRule | None = None,
                          radial_rule=None) -> float:
    """integral over the annulus of x^alpha * R_g with the g-volume element."""
    if not (spec.rho0 < r_in < r_out):
        raise ValueError("need rho0 < r_in < r_out")

    def f(X):
        _, _, sqrtdet = metric_many(spec, X)
        return X[:, alpha] * scalar_curvature_many(spec, X) * sqrtdet

    value, _ = integrate_annulus(f, r_in, r_out,
                                 sphere_rule or make_sphere_rule(24),
                                 radial_rule)
    return float(value)


# ---------------------------------------------------------------------------
# radius series and verdicts
# ---------------------------------------------------------------------------

def radius_grid(r_min: float, r_max: float,
                points_per_octave: int = 2) -> np.ndarray:
    """Geometric grid r_k = r_min * 2^(k/points_per_octave) covering [r_min, r_max]."""
    n = math.floor(math.log2(r_max / r_min) * points_per_octave) + 1
    return r_min * 2.0 ** (np.arange(n) / points_per_octave)


@dataclass(eq=False)
class ComSeries:
    """Sampled flux center along a geometric radius grid."""

    radii: np.ndarray            # (K,)
    values: np.ndarray           # (K, 3)
    errors: np.ndarray           # (K, 3) quadrature error estimates
    mass: np.ndarray             # (K,) mass flux at the same radii

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("r,c1,c2,c3,err1,err2,err3,mass\n")
            for k in range(len(self.radii)):
                row = [self.radii[k], *self.values[k], *self.errors[k],
                       self.mass[k]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def com_series(spec: MetricSpec, radii, rule: SphereRule | None = None,
               flat: bool = False, mass: float | None = None,
               executor=None) -> ComSeries:
    """Evaluate the flux center on a radius grid (optionally in parallel).

    Results are collected in grid order, so output is independent of the
    worker count.
    """
    rule = rule or make_sphere_rule(24)
    radii = np.asarray(radii, dtype=float)

    def one(r):
        v, e = _c_cs_with_err(spec, float(r), rule, mass, flat)
        return v, e, adm_mass_at(spec, float(r), rule)

    results = list(executor.map(one, radii)) if executor is not None \
        else [one(r) for r in radii]
    values = np.array([t[0] for t in results])
    errors = np.array([t[1] for t in results])
    masses = np.array([t[2] for t in results])
    return ComSeries(radii=radii, values=values, errors=errors, mass=masses)


@dataclass(eq=False)
class LimitVerdict:
    """Classification of a radius series: Converged / Oscillating / Inconclusive."""

    tag: str
    value: np.ndarray | None = None       # limit or oscillation center
    error_bar: float | None = None
    amplitude: np.ndarray | None = None
    log_period: float | None = None
    reason: str | None = None

    def to_json(self):
        obj = {"tag": self.tag}
        if self.value is not None:
            obj["value"] = [float(v) for v in self.value]
        if self.error_bar is not None:
            obj["errorBar"] = float(self.error_bar)
        if self.amplitude is not None:
            obj["amplitude"] = [float(v) for v in self.amplitude]
        if self.log_period is not None:
            obj["logPeriod"] = float(self.log_period)
        if self.reason is not None:
            obj["reason"] = self.reason
        return obj


def _sinusoid_ssr(L, V, omega):
    M = np.column_stack([np.ones_like(L), np.sin(omega * L),
                         np.cos(omega * L)])
    coef, *_ = np.linalg.lstsq(M, V, rcond=None)
    resid = V - M @ coef
    return float(np.sum(resid**2)), coef


def _golden_min(fun, a, b, tol=1e-6):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = fun(x2)
    return 0.5 * (a + b)


def limit_verdict(series: ComSeries, cauchy_floor: float = 0.01,
                  omega_range=(0.2, 5.0)) -> LimitVerdict:
    """Classify the r -> infinity behaviour of a flux-center series.

    Converged: the top half of the grid passes a Cauchy test at
    3 x quadrature error + cauchy_floor * scale.  Otherwise a sinusoid in
    log r is fitted (grid search over the angular frequency plus a
    golden-section polish); Oscillating needs the fit residual below 10% of
    the amplitude, the amplitude above 5 x the quadrature noise, and at
    least roughly half an oscillation period inside the sampled window.
    """
    r = series.radii
    n = len(r)
    if n < 8:
        raise TooFewSamples(f"need >= 8 samples, got {n}")
    if r[-1] / r[0] < 10.0:
        raise TooFewSamples(
            f"grid spans factor {r[-1] / r[0]:.3g} < 10 in radius")

    top = slice(n // 2, n)
    V = series.values
    scale = max(1.0, float(np.linalg.norm(V[-1])))
    diffs = V[top][:, None, :] - V[top][None, :, :]
    dev = float(np.max(np.linalg.norm(diffs, axis=2)))
    qerr = float(np.max(np.linalg.norm(series.errors[top], axis=1)))
    if dev <= 3.0 * qerr + cauchy_floor * scale:
        center = V[top].mean(axis=0)
        return LimitVerdict(tag="Converged", value=center,
                            error_bar=dev + qerr)

    L = np.log(r)
    grid = np.linspace(omega_range[0], omega_range[1], 97)
    ssr = np.array([_sinusoid_ssr(L, V, w)[0] for w in grid])
    k = int(np.argmin(ssr))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    omega = _golden_min(lambda w: _sinusoid_ssr(L, V, w)[0], lo, hi)
    total_ssr, coef = _sinusoid_ssr(L, V, omega)

    amplitude = np.hypot(coef[1], coef[2])
    A = float(np.linalg.norm(amplitude))
    resid_rms = math.sqrt(total_ssr / V.size)
    noise = float(np.max(np.linalg.norm(series.errors, axis=1)))
    window = float(L[-1] - L[0])

    if A <= 5.0 * noise:
        return LimitVerdict(tag="Inconclusive",
                            reason="fitted amplitude within quadrature noise")
    if omega * window < 0.9 * math.pi:
        return LimitVerdict(
            tag="Inconclusive",
            reason="best-fit period longer than the sampled window")
    if resid_rms >= 0.1 * A:
        return LimitVerdict(
            tag="Inconclusive",
            reason=f"sinusoid fit residual {resid_rms:.3g} >= 10% of "
                   f"amplitude {A:.3g}")
    return LimitVerdict(tag="Oscillating", value=coef[0],
                        amplitude=amplitude, log_period=2.0 * math.pi / omega)
