"""Closed-form nonlinear terms of the perturbation equation.

With s = 1 + y, q = 1 + y + v (v = r dy/dr):

    G(y, v)  = 1 - s^(-2 gamma) q^(-gamma)          = gamma (3y + v) + h.o.t.
    H(y)     = s^2 - s^(-2)                          = 4y + h.o.t.
    G_I      = s^(2 - 2 gamma) q^(-gamma - 1) - 1
    G_II0    = -2 gamma v^2 s^(1 - 2 gamma) q^(-gamma - 1)
    G_II1    = s^2 [ (1/gamma) (d_v G2) ((4-3g) y - g v) + G2 ] - H + 4 y s^2
    G_II     = (P/(rho r^2)) G_II0 + (1/((gamma-1) r^3)) G_II1

Everything is evaluated through expm1/log1p compositions so that the
quantities that vanish to first or second order at the origin keep full
relative precision down to |y|, |v| ~ 1e-8 (the eps^-1, eps^-2 rescalings
of the modulation coefficients stay well conditioned).  The second-order
remainders use exact log1p(t)-t and expm1(t)-t kernels instead of
compensated subtraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StateAdmissibilityError
from .operators import lin_operator_rform
from .params import ModelParams

_L1PMX = np.array([(-1.0) ** (k + 1) / k for k in range(2, 30)])
_E1MX_INV = np.array([1.0 / math.factorial(k) for k in range(2, 30)])


def _log1pmx(t):
    """log(1+t) - t, full relative precision (O(t^2) at 0)."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.25
    ts = np.where(small, t, 0.0)
    acc = np.zeros_like(ts)
    for c in _L1PMX[::-1]:
        acc = (acc + c) * ts
    acc *= ts
    direct = np.log1p(np.where(small, 0.0, t)) - np.where(small, 0.0, t)
    out = np.where(small, acc, direct)
    return float(out) if out.ndim == 0 else out


def _expm1mx(t):
    """exp(t) - 1 - t, full relative precision (O(t^2) at 0)."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.25
    ts = np.where(small, t, 0.0)
    acc = np.zeros_like(ts)
    for c in _E1MX_INV[::-1]:
        acc = (acc + c) * ts
    acc *= ts
    td = np.where(small, 0.0, t)
    direct = np.expm1(td) - td
    out = np.where(small, acc, direct)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PerturbationPoint:
    """Admissible perturbation state (y, v) with v = r dy/dr."""

    y: float
    v: float

    def __post_init__(self):
        if not (abs(self.y) + abs(self.v) < 1.0):
            raise StateAdmissibilityError(
                f"|y|+|v| = {abs(self.y)+abs(self.v):.4f} >= 1")


def check_admissible(y, v):
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(1.0 + y <= 0.0) or np.any(1.0 + y + v <= 0.0):
        raise StateAdmissibilityError("1+y or 1+y+v is nonpositive")


# ---------------------------------------------------------------------------
# scalar/array kernels
# ---------------------------------------------------------------------------

def g_func(gamma, y, v):
    """G = 1 - (1+y)^(-2 gamma) (1+y+v)^(-gamma)."""
    return -np.expm1(-gamma * (2.0 * np.log1p(y) + np.log1p(y + v)))


def h_func(y):
    """H = (1+y)^2 - (1+y)^(-2)."""
    L = np.log1p(y)
    return np.expm1(2.0 * L) - np.expm1(-2.0 * L)


def g_partials(gamma, y, v):
    """(dG/dy, dG/dv) in closed form."""
    ly = np.log1p(y)
    lq = np.log1p(y + v)
    dGdy = 2.0 * gamma * np.exp(-(2.0 * gamma + 1.0) * ly - gamma * lq) \
        + gamma * np.exp(-2.0 * gamma * ly - (gamma + 1.0) * lq)
    dGdv = gamma * np.exp(-2.0 * gamma * ly - (gamma + 1.0) * lq)
    return dGdy, dGdv


def g2_func(gamma, y, v):
    """G2 = G - gamma (3y + v); exactly second order at the origin."""
    s2 = -gamma * (2.0 * _log1pmx(y) + _log1pmx(y + v))
    q = -gamma * (3.0 * y + v)
    return -(s2 + _expm1mx(q + s2))


def dg2_dv(gamma, y, v):
    """d_v G2 = gamma [ (1+y)^(-2g) (1+y+v)^(-g-1) - 1 ]; first order."""
    return gamma * np.expm1(-2.0 * gamma * np.log1p(y)
                            - (gamma + 1.0) * np.log1p(y + v))


def dg2_dy(gamma, y, v):
    """d_y G2 = dG/dy - 3 gamma; first order."""
    ly = np.log1p(y)
    lq = np.log1p(y + v)
    return 2.0 * gamma * np.expm1(-(2.0 * gamma + 1.0) * ly - gamma * lq) \
        + gamma * np.expm1(-2.0 * gamma * ly - (gamma + 1.0) * lq)


def d2g2_dvv(gamma, y, v):
    """d^2_v G2 = -gamma (gamma+1) (1+y)^(-2g) (1+y+v)^(-g-2)."""
    return -gamma * (gamma + 1.0) * np.exp(
        -2.0 * gamma * np.log1p(y) - (gamma + 2.0) * np.log1p(y + v))


def g_I(gamma, y, v):
    """G_I = (1+y)^(2-2g) (1+y+v)^(-g-1) - 1; first order at the origin."""
    return np.expm1((2.0 - 2.0 * gamma) * np.log1p(y)
                    - (gamma + 1.0) * np.log1p(y + v))


def dgI_dv(gamma, y, v):
    return -(gamma + 1.0) * np.exp((2.0 - 2.0 * gamma) * np.log1p(y)
                                   - (gamma + 2.0) * np.log1p(y + v))


def g_II0(gamma, y, v):
    """Second order via the explicit v^2 factor."""
    return -2.0 * gamma * v * v * np.exp(
        (1.0 - 2.0 * gamma) * np.log1p(y) - (gamma + 1.0) * np.log1p(y + v))


def dgII0_dv(gamma, y, v):
    e = np.exp((1.0 - 2.0 * gamma) * np.log1p(y)
               - (gamma + 1.0) * np.log1p(y + v))
    return -2.0 * gamma * v * e * (2.0 - (gamma + 1.0) * v / (1.0 + y + v))


def g_II1(gamma, y, v):
    """Second order at the origin, assembled from exact remainders.

    The polynomial block -H + 4y(1+y)^2 reduces to
    7y^2 + 4y^3 + (3y^2 + 2y^3)/(1+y)^2.
    """
    s2 = (1.0 + y) ** 2
    t3 = 7.0 * y * y + 4.0 * y ** 3 + (3.0 * y * y + 2.0 * y ** 3) / s2
    core = (dg2_dv(gamma, y, v) / gamma) * ((4.0 - 3.0 * gamma) * y
                                            - gamma * v) + g2_func(gamma, y, v)
    return s2 * core + t3


def dgII1_dv(gamma, y, v):
    """Differentiate G_II1 as written; the product-rule d_v G2 term and the
    bare G2 derivative cancel analytically but are both evaluated so this
    stays an independent route."""
    s2 = (1.0 + y) ** 2
    prod = (d2g2_dvv(gamma, y, v) / gamma) * ((4.0 - 3.0 * gamma) * y
                                              - gamma * v) \
        + (dg2_dv(gamma, y, v) / gamma) * (-gamma)
    return s2 * (prod + dg2_dv(gamma, y, v))


def gII_prefactors(p: ModelParams, r):
    """(P/(rho r^2), 1/((gamma-1) r^3)); the first vanishes linearly at R."""
    r = np.asarray(r, dtype=float)
    s = np.clip((p.R - r) / (r * p.R), 0.0, None)   # gamma P/rho = 1/r - 1/R
    pf0 = s / (p.gamma * r ** 2)
    pf1 = 1.0 / ((p.gamma - 1.0) * r ** 3)
    return pf0, pf1


def g_II(p: ModelParams, r, y, v):
    pf0, pf1 = gII_prefactors(p, r)
    return pf0 * g_II0(p.gamma, y, v) + pf1 * g_II1(p.gamma, y, v)


# ---------------------------------------------------------------------------
# point-based API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GHValues:
    G: float
    H: float
    dG_dy: float
    dG_dv: float
    dH_dy: float


def eval_GH(p: ModelParams, pt: PerturbationPoint) -> GHValues:
    check_admissible(pt.y, pt.v)
    gv = float(g_func(p.gamma, pt.y, pt.v))
    hv = float(h_func(pt.y))
    dy, dv = g_partials(p.gamma, pt.y, pt.v)
    dh = 2.0 * (1.0 + pt.y) + 2.0 * (1.0 + pt.y) ** -3
    return GHValues(G=gv, H=hv, dG_dy=float(dy), dG_dv=float(dv),
                    dH_dy=float(dh))


@dataclass(frozen=True)
class NonlinearTerms:
    G: float
    H: float
    G2: float
    dG2_dy: float
    dG2_dv: float
    G_I: float
    G_II0: float
    G_II1: float
    G_II: float


def eval_GI_GII(p: ModelParams, r: float, pt: PerturbationPoint
                ) -> NonlinearTerms:
    """All nonlinear fields at one radius; r = R is allowed (the pressure
    prefactor of G_II0 takes its vanishing limit)."""
    check_admissible(pt.y, pt.v)
    if not (p.R0 <= r <= p.R):
        raise StateAdmissibilityError(f"r={r} outside [1, R]")
    ga, y, v = p.gamma, pt.y, pt.v
    return NonlinearTerms(
        G=float(g_func(ga, y, v)), H=float(h_func(y)),
        G2=float(g2_func(ga, y, v)), dG2_dy=float(dg2_dy(ga, y, v)),
        dG2_dv=float(dg2_dv(ga, y, v)), G_I=float(g_I(ga, y, v)),
        G_II0=float(g_II0(ga, y, v)), G_II1=float(g_II1(ga, y, v)),
        G_II=float(g_II(p, r, y, v)))


# ---------------------------------------------------------------------------
# the second-derivative-like coefficient of the linearized modulation
# ---------------------------------------------------------------------------

def a21_closed_form(p: ModelParams, r: float, Y: float, dY: float,
                    d2Y: float, eps: float) -> float:
    """Closed form: a21 = (gamma P/rho) (1+y)^(2-2g) (1+y+v)^(-g-2)
    [ (g+1) Y'' + (4g/r) Y' + 2 eps (g-1)/(1+y) (Y')^2 ],
    with y = eps Y, v = r d(eps Y)/dr."""
    ga = p.gamma
    y = eps * Y
    v = eps * r * dY
    check_admissible(y, v)
    s = (p.R - r) / (r * p.R)
    pref = s * np.exp((2.0 - 2.0 * ga) * np.log1p(y)
                      - (ga + 2.0) * np.log1p(y + v))
    bracket = (ga + 1.0) * d2Y + (4.0 * ga / r) * dY \
        + (2.0 * eps * (ga - 1.0) / (1.0 + y)) * dY * dY
    return float(pref * bracket)


def a21_from_partials(p: ModelParams, r: float, Y: float, dY: float,
                      d2Y: float, eps: float) -> float:
    """Independent route: a21 = (d_v G_I) L Y + eps^-1 d_v G_II."""
    ga = p.gamma
    y = eps * Y
    v = eps * r * dY
    check_admissible(y, v)
    LY = float(lin_operator_rform(p, r, Y, dY, d2Y))
    pf0, pf1 = gII_prefactors(p, r)
    dGII = pf0 * dgII0_dv(ga, y, v) + pf1 * dgII1_dv(ga, y, v)
    return float(dgI_dv(ga, y, v) * LY + dGII / eps)


def lemma_bracket(p: ModelParams, r: float, Y: float, dY: float,
                  eps: float) -> float:
    """The combination gamma (d_v G_I)(3Y+V) - 4Y (d_v G_I)
    + eps^-1 d_v G_II1, which vanishes identically."""
    ga = p.gamma
    V = r * dY
    y, v = eps * Y, eps * V
    dGI = dgI_dv(ga, y, v)
    return float(ga * dGI * (3.0 * Y + V) - 4.0 * Y * dGI
                 + dgII1_dv(ga, y, v) / eps)


# ---------------------------------------------------------------------------
# modulation coefficients of the shadowing equation
# ---------------------------------------------------------------------------

def abc_coeffs(p: ModelParams, r, eps: float, y1, v1, Ly1, w, Om):
    """(a, b, c) with a = eps^-1 G_I(eps(y1+w), eps(v1+Om)),
    b the difference of the full and background modulation terms, and
    c the background forcing.  b is assembled as a difference of stable
    terms (each piece carries full relative precision in eps)."""
    ga = p.gamma
    Yf, Vf = y1 + w, v1 + Om
    gI_full = g_I(ga, eps * Yf, eps * Vf)
    gI_base = g_I(ga, eps * y1, eps * v1)
    gII_full = g_II(p, r, eps * Yf, eps * Vf)
    gII_base = g_II(p, r, eps * y1, eps * v1)
    a = gI_full / eps
    c = (gI_base / eps) * Ly1 + gII_base / eps ** 2
    b = ((gI_full - gI_base) / eps) * Ly1 + (gII_full - gII_base) / eps ** 2
    return a, b, c
