"""Real orthonormal spherical harmonics with analytic angle derivatives.

Basis ordering is (l, m) with l = 0..L and m = -l..l, so a degree-L set has
(L+1)^2 members.  Normalisation is L^2-orthonormal on the unit sphere:
integral of Y_lm * Y_l'm' over S^2 equals delta.  With this convention the
Cartesian coordinates of a unit vector are sqrt(4*pi/3) * (Y_{1,1}, Y_{1,-1},
Y_{1,0}).

The associated Legendre recursion is carried out on fully normalised values,
which is stable to degrees far beyond anything used here.  Derivative
formulas divide by sin(theta); callers must stay away from the poles (all
quadrature nodes do).
"""

from __future__ import annotations

import math

import numpy as np

SQRT4PI = 2.0 * math.sqrt(math.pi)


def lm_pairs(L: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def lm_index(L: int, l: int, m: int) -> int:
    return l * l + (m + l)


def degree_vector(L: int) -> np.ndarray:
    """Per-basis-function degree l, shape ((L+1)^2,)."""
    return np.array([l for l, _ in lm_pairs(L)], dtype=float)


def _legendre_normalized(L: int, ct: np.ndarray, st: np.ndarray, nders: int):
    """Normalised associated Legendre P_lm(cos theta) and theta-derivatives.

    Returns arrays of shape (K, L+1, L+1) indexed [point, l, m]; entries with
    m > l are zero.
    """
    K = ct.shape[0]
    P = np.zeros((K, L + 1, L + 1))
    P[:, 0, 0] = 1.0 / SQRT4PI
    for m in range(1, L + 1):
        P[:, m, m] = P[:, m - 1, m - 1] * st * math.sqrt((2 * m + 1) / (2.0 * m))
    for m in range(0, L):
        P[:, m + 1, m] = math.sqrt(2 * m + 3.0) * ct * P[:, m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[:, l, m] = a * (ct * P[:, l - 1, m] - b * P[:, l - 2, m])
    if nders == 0:
        return P, None, None

    st_safe = np.where(np.abs(st) < 1e-14, 1e-14, st)
    dP = np.zeros_like(P)
    for m in range(0, L + 1):
        for l in range(m, L + 1):
            if l == 0:
                continue
            c = math.sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0))
            prev = P[:, l - 1, m] if l - 1 >= m else 0.0
            dP[:, l, m] = (l * ct * P[:, l, m] - c * prev) / st_safe
    if nders == 1:
        return P, dP, None

    # second derivative from the associated Legendre ODE
    d2P = np.zeros_like(P)
    cot = ct / st_safe
    for m in range(0, L + 1):
        for l in range(m, L + 1):
            d2P[:, l, m] = (-cot * dP[:, l, m]
                            - (l * (l + 1.0) - (m / st_safe) ** 2) * P[:, l, m])
    return P, dP, d2P


def real_harmonics(L: int, theta: np.ndarray, phi: np.ndarray, nders: int = 0):
    """Evaluate all Y_lm (and optionally theta/phi derivatives) at angles.

    Returns a dict with keys "Y" and, for nders >= 1, "Yt", "Yp", and for
    nders == 2 additionally "Ytt", "Ytp", "Ypp".  Each value has shape
    (K, (L+1)^2).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    K = theta.shape[0]
    ct, st = np.cos(theta), np.sin(theta)
    P, dP, d2P = _legendre_normalized(L, ct, st, nders)

    nlm = (L + 1) ** 2
    out = {"Y": np.zeros((K, nlm))}
    if nders >= 1:
        out["Yt"] = np.zeros((K, nlm))
        out["Yp"] = np.zeros((K, nlm))
    if nders >= 2:
        out["Ytt"] = np.zeros((K, nlm))
        out["Ytp"] = np.zeros((K, nlm))
        out["Ypp"] = np.zeros((K, nlm))

    sqrt2 = math.sqrt(2.0)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            j = lm_index(L, l, m)
            am = abs(m)
            if m == 0:
                tr, dtr = np.ones(K), np.zeros(K)
                s = 1.0
            elif m > 0:
                tr, dtr = np.cos(m * phi), -m * np.sin(m * phi)
                s = sqrt2
            else:
                tr, dtr = np.sin(am * phi), am * np.cos(am * phi)
                s = sqrt2
            out["Y"][:, j] = s * P[:, l, am] * tr
            if nders >= 1:
                out["Yt"][:, j] = s * dP[:, l, am] * tr
                out["Yp"][:, j] = s * P[:, l, am] * dtr
            if nders >= 2:
                out["Ytt"][:, j] = s * d2P[:, l, am] * tr
                out["Ytp"][:, j] = s * dP[:, l, am] * dtr
                out["Ypp"][:, j] = -(am * am) * out["Y"][:, j]
    return out


def sph_coords(X: np.ndarray):
    """Cartesian points (N, 3) -> (r, theta, phi) with pole-safe angles."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = np.linalg.norm(X, axis=1)
    r_safe = np.where(r == 0.0, 1.0, r)
    ct = np.clip(X[:, 2] / r_safe, -1.0, 1.0)
    theta = np.arccos(ct)
    phi = np.arctan2(X[:, 1], X[:, 0])
    return r, theta, phi


def unit_frame(theta: np.ndarray, phi: np.ndarray):
    """Orthonormal spherical frame (radial, theta-hat, phi-hat), each (K, 3)."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    rhat = np.stack([st * cp, st * sp, ct], axis=1)
    that = np.stack([ct * cp, ct * sp, -st], axis=1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
    return rhat, that, phat
