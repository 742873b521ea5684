"""Asymptotically flat 3-metric families and pointwise curvature evaluation.

A metric spec is either conformally flat, g = u^4 * delta with u from one of
the conformal-factor families, or a Schwarzschild-type base plus an explicit
symmetric perturbation field p_ij = O(r^-2).  Every spec is blended to the
Euclidean metric inside an interior cutoff rho0: with a C^4 profile chi(r)
that vanishes for r <= rho0/2 and equals 1 for r >= rho0,

    g = chi * g_family + (1 - chi) * delta.

All asymptotic functionals are evaluated at radii >= rho0, where the blend is
inactive, so the interior extension never influences reported numbers.

Evaluators are vectorised over point batches of shape (N, 3); the *_at
wrappers expose the single-point contracts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import harmonics
from .errors import NonPositiveDefinite

_EYE = np.eye(3)


# ---------------------------------------------------------------------------
# C^4 polynomial smoothstep and radial blend profiles
# ---------------------------------------------------------------------------

def smoothstep(t):
    """Degree-9 polynomial step: 0 -> 1 on [0, 1], C^4 at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))))


def smoothstep_d1(t):
    tc = np.clip(t, 0.0, 1.0)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 630.0 * tc**4 * (1.0 - tc) ** 4, 0.0)


def smoothstep_d2(t):
    tc = np.clip(t, 0.0, 1.0)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside,
                    2520.0 * tc**3 * (1.0 - tc) ** 3 * (1.0 - 2.0 * tc), 0.0)


def blend01(r, lo, hi, nders=0):
    """smoothstep((r - lo)/(hi - lo)) and optional derivatives in r."""
    s = (np.asarray(r, dtype=float) - lo) / (hi - lo)
    chi = smoothstep(s)
    if nders == 0:
        return chi
    d1 = smoothstep_d1(s) / (hi - lo)
    if nders == 1:
        return chi, d1
    d2 = smoothstep_d2(s) / (hi - lo) ** 2
    return chi, d1, d2


# ---------------------------------------------------------------------------
# radial modulation profiles phi(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhiSpec:
    """Bounded radial modulation profile with O((1+t)^-l) derivative decay.

    The core profile is used verbatim for t >= t0; on [t0/2, t0] it is
    blended (C^4 polynomial step) into the constant core(t0), which also
    covers t <= t0/2.
    """

    kind: str                      # constant | sin-log | sin-log-log | tabulated
    amplitude: float = 1.0
    t0: float = math.e
    log_grid: np.ndarray | None = None
    samples: np.ndarray | None = None

    @classmethod
    def constant(cls, value: float) -> "PhiSpec":
        return cls(kind="constant", amplitude=value, t0=1.0)

    @classmethod
    def sin_log(cls, amplitude: float = 1.0, t0: float = math.e) -> "PhiSpec":
        return cls(kind="sin-log", amplitude=amplitude, t0=t0)

    @classmethod
    def sin_log_log(cls, amplitude: float = 1.0,
                    t0: float = math.e**2) -> "PhiSpec":
        return cls(kind="sin-log-log", amplitude=amplitude, t0=t0)

    @classmethod
    def tabulated(cls, t_grid, values) -> "PhiSpec":
        t_grid = np.asarray(t_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls(kind="tabulated", t0=float(t_grid[0]),
                   log_grid=np.log(t_grid), samples=values)

    @cached_property
    def _spline(self):
        if self.kind != "tabulated":
            return None
        return CubicSpline(self.log_grid, self.samples)

    def _core(self, t):
        """Unblended profile and its first two derivatives."""
        a = self.amplitude
        if self.kind == "constant":
            z = np.zeros_like(t)
            return np.full_like(t, a), z, z.copy()
        if self.kind == "sin-log":
            lt = np.log(t)
            v = a * np.sin(lt)
            d1 = a * np.cos(lt) / t
            d2 = -a * (np.sin(lt) + np.cos(lt)) / t**2
            return v, d1, d2
        if self.kind == "sin-log-log":
            lt = np.log(t)
            L = np.log(lt)
            v = a * np.sin(L)
            d1 = a * np.cos(L) / (t * lt)
            d2 = -a * (np.sin(L) + (1.0 + lt) * np.cos(L)) / (t * lt) ** 2
            return v, d1, d2
        if self.kind == "tabulated":
            sp = self._spline
            x = np.clip(np.log(t), self.log_grid[0], self.log_grid[-1])
            v = sp(x)
            d1 = sp(x, 1) / t
            d2 = (sp(x, 2) - sp(x, 1)) / t**2
            return v, d1, d2
        raise ValueError(f"unknown phi kind {self.kind!r}")

    def eval(self, t, nders: int = 2):
        """phi(t) and derivatives, valid for every t > 0."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo = 0.5 * self.t0
        ts = np.maximum(t, lo)
        v, d1, d2 = self._core(ts)
        k0 = self._core(np.array([self.t0]))[0][0]
        chi, c1, c2 = blend01(t, lo, self.t0, nders=2)
        val = chi * v + (1.0 - chi) * k0
        dd1 = c1 * (v - k0) + chi * d1
        dd2 = c2 * (v - k0) + 2.0 * c1 * d1 + chi * d2
        if nders == 0:
            return val
        if nders == 1:
            return val, dd1
        return val, dd1, dd2

    def to_json(self):
        obj = {"kind": self.kind, "amplitude": self.amplitude, "t0": self.t0}
        if self.kind == "tabulated":
            obj["t"] = list(np.exp(self.log_grid))
            obj["values"] = list(self.samples)
        return obj

    @classmethod
    def from_json(cls, obj) -> "PhiSpec":
        kind = obj["kind"]
        if kind == "tabulated":
            return cls.tabulated(obj["t"], obj["values"])
        defaults = {"constant": 1.0, "sin-log": math.e,
                    "sin-log-log": math.e**2}
        if kind not in defaults:
            raise ValueError(f"unknown phi kind {kind!r}")
        return cls(kind=kind, amplitude=float(obj.get("amplitude", 1.0)),
                   t0=float(obj.get("t0", defaults[kind])))


# ---------------------------------------------------------------------------
# tabulated radial-harmonic potential (output of the conformal solver)
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PotentialTable:
    """Solution table for Delta v = f in radial x spherical-harmonic form.

    Stores, per harmonic index (l, m), the cumulative source integrals

        inner_lm(r) = integral_0^r s^(l+2) f_lm(s) ds
        outer_lm(r) = integral_r^inf s^(1-l) f_lm(s) ds

    from which the potential coefficients and their first two radial
    derivatives follow algebraically:

        v_lm   = -(r^-(l+1) inner + r^l outer) / (2l+1)
        v_lm'  = -(-(l+1) r^-(l-2)... (closed form, no f needed)
        v_lm'' uses spline derivatives of inner/outer, so the Laplacian read
               off the table is independent of the source the solver used.

    Beyond the last node the table extrapolates with the exact multipole far
    field (inner frozen, outer zero); below the first node the coefficients
    are frozen (that region lies inside the metric blend).
    """

    radii: np.ndarray            # (nr,)
    degree: int                  # max harmonic degree L
    inner: np.ndarray            # (nr, nlm)
    outer: np.ndarray            # (nr, nlm)
    mass: float

    @cached_property
    def _t(self):
        return np.log(self.radii)

    @cached_property
    def _sp_inner(self):
        return CubicSpline(self._t, self.inner, axis=0)

    @cached_property
    def _sp_outer(self):
        return CubicSpline(self._t, self.outer, axis=0)

    @cached_property
    def _l(self):
        return harmonics.degree_vector(self.degree)

    def coeffs(self, r, nders: int = 0):
        """Potential coefficients v_lm(r) (and radial derivatives) at radii r."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        t = np.log(np.maximum(r, self.radii[0] * 1e-6))
        tc = np.clip(t, self._t[0], self._t[-1])
        rp = np.exp(np.maximum(t, self._t[0]))[:, None]
        IN = self._sp_inner(tc)
        OUT = self._sp_outer(tc)
        l = self._l[None, :]
        norm = 2.0 * l + 1.0
        v = -(rp ** (-(l + 1)) * IN + rp**l * OUT) / norm
        if nders == 0:
            return v
        below = (t < self._t[0])[:, None]
        v1 = -(-(l + 1) * rp ** (-(l + 2)) * IN + l * rp ** (l - 1) * OUT) / norm
        v1 = np.where(below, 0.0, v1)
        if nders == 1:
            return v, v1
        inside = ((t >= self._t[0]) & (t <= self._t[-1]))[:, None]
        dIN = np.where(inside, self._sp_inner(tc, 1), 0.0) / rp
        dOUT = np.where(inside, self._sp_outer(tc, 1), 0.0) / rp
        v2 = -((l + 1) * (l + 2) * rp ** (-(l + 3)) * IN
               + l * (l - 1) * rp ** (l - 2) * OUT
               - (l + 1) * rp ** (-(l + 2)) * dIN
               + l * rp ** (l - 1) * dOUT) / norm
        v2 = np.where(below, 0.0, v2)
        return v, v1, v2

    def u_and_grad(self, X):
        r, theta, phi = harmonics.sph_coords(X)
        H = harmonics.real_harmonics(self.degree, theta, phi, nders=1)
        v, v1 = self.coeffs(r, nders=1)
        u = 1.0 + np.einsum("kj,kj->k", v, H["Y"])
        rhat, that, phat = harmonics.unit_frame(theta, phi)
        st = np.where(np.abs(np.sin(theta)) < 1e-14, 1e-14, np.sin(theta))
        dr = np.einsum("kj,kj->k", v1, H["Y"])
        dt = np.einsum("kj,kj->k", v, H["Yt"])
        dp = np.einsum("kj,kj->k", v, H["Yp"]) / st
        r_safe = np.maximum(r, self.radii[0])
        grad = (dr[:, None] * rhat
                + (dt[:, None] * that + dp[:, None] * phat) / r_safe[:, None])
        return u, grad

    def laplacian_u(self, X):
        r, theta, phi = harmonics.sph_coords(X)
        H = harmonics.real_harmonics(self.degree, theta, phi, nders=0)
        v, v1, v2 = self.coeffs(r, nders=2)
        r_safe = np.maximum(r, self.radii[0])[:, None]
        l = self._l[None, :]
        rad = v2 + 2.0 * v1 / r_safe - l * (l + 1.0) * v / r_safe**2
        return np.einsum("kj,kj->k", rad, H["Y"])


# ---------------------------------------------------------------------------
# conformal factor families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConformalFactor:
    """Positive conformal factor u with u -> 1 at infinity."""

    family: str                  # schwarzschild | dipole-exact | dipole-modulated | numeric-potential
    m: float = 0.0
    b: np.ndarray | None = None
    phi: PhiSpec | None = None
    table: PotentialTable | None = None

    def u_and_grad(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.family == "numeric-potential":
            return self.table.u_and_grad(X)
        r = np.linalg.norm(X, axis=1)
        u = 1.0 + self.m / (2.0 * r)
        grad = -self.m / (2.0 * r**3)[:, None] * X
        if self.family == "schwarzschild":
            return u, grad
        b = self.b
        bx = X @ b
        if self.family == "dipole-exact":
            u = u + bx / r**3
            grad = grad + b[None, :] / r[:, None] ** 3 \
                - 3.0 * (bx / r**5)[:, None] * X
            return u, grad
        if self.family == "dipole-modulated":
            ph, ph1, _ = self.phi.eval(r, nders=2)
            u = u + ph * bx / r**3
            grad = grad + (ph1 * bx / r**3)[:, None] * (X / r[:, None]) \
                + ph[:, None] * (b[None, :] / r[:, None] ** 3
                                 - 3.0 * (bx / r**5)[:, None] * X)
            return u, grad
        raise ValueError(f"unknown conformal family {self.family!r}")

    def laplacian_u(self, X):
        """Analytic Laplacian of u; valid for |x| >= analytic_t0."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.family == "numeric-potential":
            return self.table.laplacian_u(X)
        r = np.linalg.norm(X, axis=1)
        if self.family in ("schwarzschild", "dipole-exact"):
            return np.zeros_like(r)
        if self.family == "dipole-modulated":
            bx = X @ self.b
            _, ph1, ph2 = self.phi.eval(r, nders=2)
            return (ph2 - 2.0 * ph1 / r) * bx / r**3
        raise ValueError(f"unknown conformal family {self.family!r}")

    @property
    def analytic_t0(self) -> float:
        if self.family == "dipole-modulated":
            return self.phi.t0
        return 0.0


@dataclass(frozen=True, eq=False)
class PerturbationField:
    """Closed-form symmetric perturbation p_ij(x), optionally with gradient."""

    func: Callable[[np.ndarray], np.ndarray]          # (N,3) -> (N,3,3)
    dfunc: Callable[[np.ndarray], np.ndarray] | None = None  # (N,3) -> (N,3,3,3)
    name: str = "custom"


# ---------------------------------------------------------------------------
# metric spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricSpec:
    """A 3-metric on R^3: declared family outside rho0, Euclidean blend inside."""

    kind: str                    # conformal | perturbed
    m: float
    rho0: float = 1.0
    conformal: ConformalFactor | None = None
    perturbation: PerturbationField | None = None

    # -- factories ---------------------------------------------------------
    @classmethod
    def schwarzschild(cls, m: float, rho0: float = 1.0) -> "MetricSpec":
        return cls(kind="conformal", m=m, rho0=rho0,
                   conformal=ConformalFactor(family="schwarzschild", m=m))

    @classmethod
    def flat(cls, rho0: float = 1.0) -> "MetricSpec":
        return cls.schwarzschild(0.0, rho0=rho0)

    @classmethod
    def dipole_exact(cls, m: float, b, rho0: float = 1.0) -> "MetricSpec":
        b = np.asarray(b, dtype=float)
        return cls(kind="conformal", m=m, rho0=rho0,
                   conformal=ConformalFactor(family="dipole-exact", m=m, b=b))

    @classmethod
    def dipole_modulated(cls, m: float, b, phi: PhiSpec,
                         rho0: float = 1.0) -> "MetricSpec":
        b = np.asarray(b, dtype=float)
        return cls(kind="conformal", m=m, rho0=rho0,
                   conformal=ConformalFactor(family="dipole-modulated",
                                             m=m, b=b, phi=phi))

    @classmethod
    def numeric_potential(cls, table: PotentialTable,
                          rho0: float = 1.0) -> "MetricSpec":
        return cls(kind="conformal", m=table.mass, rho0=rho0,
                   conformal=ConformalFactor(family="numeric-potential",
                                             m=table.mass, table=table))

    @classmethod
    def schwarzschild_perturbed(cls, m: float, p: PerturbationField,
                                rho0: float = 1.0) -> "MetricSpec":
        return cls(kind="perturbed", m=m, rho0=rho0, perturbation=p)

    # -- properties ---------------------------------------------------------
    @property
    def family(self) -> str:
        return self.conformal.family if self.kind == "conformal" \
            else "schwarzschild-perturbed"

    @property
    def analytic_r_min(self) -> float:
        """Radius beyond which closed-form derivative branches are valid."""
        extra = self.conformal.analytic_t0 if self.kind == "conformal" else 0.0
        return max(self.rho0, extra)

    def to_json(self):
        obj = {"family": self.family, "m": self.m, "rho0": self.rho0}
        if self.family in ("dipole-exact", "dipole-modulated"):
            obj["b"] = [float(v) for v in self.conformal.b]
        if self.family == "dipole-modulated":
            obj["phi"] = self.conformal.phi.to_json()
        return obj

    @classmethod
    def from_json(cls, obj) -> "MetricSpec":
        fam = obj["family"]
        m = float(obj["m"])
        rho0 = float(obj.get("rho0", 1.0))
        if fam == "schwarzschild":
            return cls.schwarzschild(m, rho0=rho0)
        if fam == "dipole-exact":
            return cls.dipole_exact(m, obj["b"], rho0=rho0)
        if fam == "dipole-modulated":
            return cls.dipole_modulated(m, obj["b"],
                                        PhiSpec.from_json(obj["phi"]),
                                        rho0=rho0)
        raise ValueError(f"cannot build metric family {fam!r} from JSON alone")


# ---------------------------------------------------------------------------
# batched evaluators
# ---------------------------------------------------------------------------

def _blend_profile(spec: MetricSpec, r, nders=0):
    return blend01(r, 0.5 * spec.rho0, spec.rho0, nders=nders)


def _conformal_B(spec: MetricSpec, X, want_grad: bool):
    """B = blended u^4 (so g = B * delta) and optionally its gradient."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = np.linalg.norm(X, axis=1)
    chi, dchi = _blend_profile(spec, r, nders=1)
    B = np.ones_like(r)
    dB = np.zeros_like(X) if want_grad else None
    act = chi > 0.0
    if np.any(act):
        u, du = spec.conformal.u_and_grad(X[act])
        if np.any(u <= 0.0):
            raise NonPositiveDefinite(
                f"conformal factor <= 0 for family {spec.family!r}")
        w = u**4 - 1.0
        B[act] = 1.0 + chi[act] * w
        if want_grad:
            xhat = X[act] / r[act][:, None]
            dB[act] = (dchi[act] * w)[:, None] * xhat \
                + (chi[act] * 4.0 * u**3)[:, None] * du
    if np.any(B <= 0.0):
        raise NonPositiveDefinite("blended conformal metric lost positivity")
    return B, dB


def _schw_bar_u(m, r):
    """Base Schwarzschild factor and radial derivative for perturbed metrics."""
    u = 1.0 + m / (2.0 * r)
    du = -m / (2.0 * r**2)
    return u, du


def metric_many(spec: MetricSpec, X):
    """g, g^-1 and sqrt(det g) at a batch of points; raises on non-PD."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = X.shape[0]
    if spec.kind == "conformal":
        B, _ = _conformal_B(spec, X, want_grad=False)
        g = B[:, None, None] * _EYE[None, :, :]
        ginv = (1.0 / B)[:, None, None] * _EYE[None, :, :]
        sqrtdet = B**1.5
        return g, ginv, sqrtdet

    r = np.linalg.norm(X, axis=1)
    chi = _blend_profile(spec, r)
    g = np.tile(_EYE, (N, 1, 1))
    act = chi > 0.0
    if np.any(act):
        ubar, _ = _schw_bar_u(spec.m, r[act])
        p = np.asarray(spec.perturbation.func(X[act]), dtype=float)
        g[act] = _EYE[None] + (chi[act] * (ubar**4 - 1.0))[:, None, None] \
            * _EYE[None] + chi[act][:, None, None] * p
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("perturbed metric not positive definite") \
            from exc
    ginv = np.linalg.inv(g)
    sqrtdet = np.sqrt(np.linalg.det(g))
    return g, ginv, sqrtdet


def metric_at(spec: MetricSpec, x):
    """Single-point metric: (g, g_inverse, sqrt_det)."""
    g, ginv, sd = metric_many(spec, np.atleast_2d(x))
    return g[0], ginv[0], float(sd[0])


def _dmetric_fd(spec: MetricSpec, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = np.linalg.norm(X, axis=1)
    h = np.maximum(1e-4 * r, 1e-6)
    dg = np.empty((X.shape[0], 3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        gp, _, _ = metric_many(spec, X + h[:, None] * e)
        gm, _, _ = metric_many(spec, X - h[:, None] * e)
        dg[:, k] = (gp - gm) / (2.0 * h)[:, None, None]
    return dg


def dmetric_many(spec: MetricSpec, X, mode: str = "closed"):
    """partial_k g_ij as an (N, 3, 3, 3) array indexed [point, k, i, j].

    mode "closed" uses chain-rule derivatives of the declared family (always
    available for conformal specs); "fd" central-differences metric_many with
    step max(1e-4 |x|, 1e-6).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if mode == "fd":
        return _dmetric_fd(spec, X)
    if spec.kind == "conformal":
        _, dB = _conformal_B(spec, X, want_grad=True)
        return dB[:, :, None, None] * _EYE[None, None, :, :]

    # perturbed: d[(1 + chi (ubar^4 - 1))] delta + d[chi p]
    r = np.linalg.norm(X, axis=1)
    chi, dchi = _blend_profile(spec, r, nders=1)
    N = X.shape[0]
    dg = np.zeros((N, 3, 3, 3))
    act = chi > 0.0
    if not np.any(act):
        return dg
    Xa = X[act]
    ra = r[act]
    xhat = Xa / ra[:, None]
    ubar, dubar = _schw_bar_u(spec.m, ra)
    w = ubar**4 - 1.0
    dB = (dchi[act] * w + chi[act] * 4.0 * ubar**3 * dubar)[:, None] * xhat
    part = dB[:, :, None, None] * _EYE[None, None, :, :]

    p = np.asarray(spec.perturbation.func(Xa), dtype=float)
    if spec.perturbation.dfunc is not None:
        dp = np.asarray(spec.perturbation.dfunc(Xa), dtype=float)
    else:
        h = np.maximum(1e-4 * ra, 1e-6)
        dp = np.empty((Xa.shape[0], 3, 3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            pp = np.asarray(spec.perturbation.func(Xa + h[:, None] * e))
            pm = np.asarray(spec.perturbation.func(Xa - h[:, None] * e))
            dp[:, k] = (pp - pm) / (2.0 * h)[:, None, None]
    part += (dchi[act][:, None] * xhat)[:, :, None, None] * p[:, None, :, :]
    part += chi[act][:, None, None, None] * dp
    dg[act] = part
    return dg


def dmetric_at(spec: MetricSpec, x, mode: str = "closed"):
    return dmetric_many(spec, np.atleast_2d(x), mode=mode)[0]


def christoffel_many(spec: MetricSpec, X, mode: str = "closed"):
    """Levi-Civita symbols Gamma^k_ij, shape (N, 3, 3, 3) = [point, k, i, j]."""
    _, ginv, _ = metric_many(spec, X)
    dg = dmetric_many(spec, X, mode=mode)
    A = dg.transpose(0, 2, 1, 3)          # A[n,s,i,j] = d_i g_sj
    B = A.swapaxes(2, 3)                  # B[n,s,i,j] = d_j g_si
    return 0.5 * np.einsum("nks,nsij->nkij", ginv, A + B - dg)


def christoffel_at(spec: MetricSpec, x, mode: str = "closed"):
    return christoffel_many(spec, np.atleast_2d(x), mode=mode)[0]


def conformal_factor_many(spec: MetricSpec, X):
    """Effective (blended) conformal factor u_eff with g = u_eff^4 delta."""
    if spec.kind != "conformal":
        raise ValueError("conformal factor only defined for conformal specs")
    B, _ = _conformal_B(spec, X, want_grad=False)
    return B**0.25


def _fd_laplacian(func, X, h):
    X = np.atleast_2d(X)
    lap = np.zeros(X.shape[0])
    f0 = func(X)
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        lap += func(X + h[:, None] * e) + func(X - h[:, None] * e)
    return (lap - 6.0 * f0) / h**2


def scalar_curvature_many(spec: MetricSpec, X, route: str = "auto"):
    """Scalar curvature at a batch of points.

    route "closed" (conformal specs): R = -8 u^-5 Laplacian(u), with the
    Laplacian analytic outside the blend region and a finite-difference
    fallback inside.  route "general": contracts the Ricci tensor built from
    finite differences of the Christoffel symbols; works for any spec.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if route == "auto":
        route = "closed" if spec.kind == "conformal" else "general"

    if route == "closed":
        if spec.kind != "conformal":
            raise ValueError("closed curvature route needs a conformal spec")
        r = np.linalg.norm(X, axis=1)
        u = conformal_factor_many(spec, X)
        lap = np.zeros_like(r)
        analytic = r >= spec.analytic_r_min
        if np.any(analytic):
            lap[analytic] = spec.conformal.laplacian_u(X[analytic])
        rest = ~analytic
        if np.any(rest):
            h = np.maximum(3e-3 * r[rest], 3e-5)
            lap[rest] = _fd_laplacian(
                lambda P: conformal_factor_many(spec, P), X[rest], h)
        return -8.0 * lap / u**5

    # general route: R_ij = d_k G^k_ji - d_j G^k_ki + G^k_kl G^l_ji - G^k_jl G^l_ki
    r = np.linalg.norm(X, axis=1)
    h = np.maximum(1e-3 * r, 1e-5)
    dGamma = np.empty((X.shape[0], 3, 3, 3, 3))   # [n, d, k, i, j]
    for d in range(3):
        e = np.zeros(3)
        e[d] = 1.0
        Gp = christoffel_many(spec, X + h[:, None] * e)
        Gm = christoffel_many(spec, X - h[:, None] * e)
        dGamma[:, d] = (Gp - Gm) / (2.0 * h)[:, None, None, None]
    G = christoffel_many(spec, X)
    ric = (np.einsum("nkkij->nij", dGamma)
           - np.einsum("njkki->nij", dGamma)
           + np.einsum("nkkl,nlji->nij", G, G)
           - np.einsum("nkjl,nlki->nij", G, G))
    _, ginv, _ = metric_many(spec, X)
    return np.einsum("nij,nij->n", ginv, ric)


def scalar_curvature_at(spec: MetricSpec, x, route: str = "auto") -> float:
    return float(scalar_curvature_many(spec, np.atleast_2d(x), route=route)[0])
