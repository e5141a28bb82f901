"""Model parameters and the polytropic equilibrium atmosphere.

The gas obeys P = A rho^gamma with 1 < gamma <= 2 and sits on the unit
ball under the external gravity -g0/r^2.  With the normalizations
R0 = 1, g0 = 1/(gamma-1), A = 1/gamma the static atmosphere is

    rho_bar(r) = (1/r - 1/R)^(1/(gamma-1))   for 1 <= r < R,  0 beyond,

which touches vacuum at the finite radius R with the physical-vacuum
exponent 1/(gamma-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ParameterDomainError, QuadratureError


@dataclass(frozen=True)
class ModelParams:
    """Physical constants fixing one atmosphere.

    gamma and N are tied by N = 2*gamma/(gamma-1); R > 1 is the vacuum
    radius of the equilibrium.  The normalization quadruple
    (R0, g0, A, A1) = (1, 1/(gamma-1), 1/gamma, 1) is immutable.
    """

    gamma: float
    N: float
    R: float
    R0: float
    g0: float
    A: float
    A1: float


def dimension_of_gamma(gamma: float) -> float:
    return 2.0 * gamma / (gamma - 1.0)


def gamma_of_dimension(N: float) -> float:
    return 1.0 + 2.0 / (N - 2.0)


def make_params(gamma: float, R: float) -> ModelParams:
    """Validate (gamma, R) and assemble the parameter record."""
    if not (1.0 < gamma <= 2.0):
        raise ParameterDomainError(
            f"gamma={gamma!r} violates 1 < gamma <= 2")
    if not (R > 1.0):
        raise ParameterDomainError(f"R={R!r} violates R > R0 = 1")
    N = dimension_of_gamma(gamma)
    return ModelParams(gamma=gamma, N=N, R=float(R), R0=1.0,
                       g0=1.0 / (gamma - 1.0), A=1.0 / gamma, A1=1.0)


def equilibrium_density(p: ModelParams, r):
    """rho_bar(r): zero at and beyond the vacuum radius R.

    Accepts a scalar or array; r < 1 is outside the atmosphere domain.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < p.R0):
        raise DomainError("equilibrium density requested at r < 1")
    # (1/r - 1/R) written as (R-r)/(rR): no cancellation near r = R
    base = np.clip((p.R - arr) / (arr * p.R), 0.0, None)
    rho = base ** (1.0 / (p.gamma - 1.0))
    return float(rho) if np.isscalar(r) or arr.ndim == 0 else rho


def equilibrium_pressure(p: ModelParams, r):
    return p.A * equilibrium_density(p, r) ** p.gamma


def equilibrium_density_derivative(p: ModelParams, r):
    """d rho_bar/dr; the exponent (2-gamma)/(gamma-1) >= 0 keeps it finite
    up to r = R for gamma <= 2."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < p.R0):
        raise DomainError("derivative requested at r < 1")
    base = np.clip((p.R - arr) / (arr * p.R), 0.0, None)
    expo = (2.0 - p.gamma) / (p.gamma - 1.0)
    d = -(1.0 / (p.gamma - 1.0)) * base ** expo / arr ** 2
    d = np.where(arr >= p.R, 0.0, d)
    return float(d) if np.isscalar(r) or arr.ndim == 0 else d


def total_mass(p: ModelParams) -> float:
    """4 pi \\int_1^R rho_bar r^2 dr by adaptive quadrature (abs tol 1e-12)."""
    expo = 1.0 / (p.gamma - 1.0)

    def f(r):
        return ((p.R - r) / (r * p.R)) ** expo * r * r

    val, err = quad(f, p.R0, p.R, epsabs=1e-12, epsrel=1e-12, limit=200)
    if err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureError(
            f"mass quadrature residual {err:.3e} too large", residual=err)
    return 4.0 * math.pi * val


def critical_mass(p: ModelParams) -> float:
    """Supremum of total_mass over R; finite only for gamma < 4/3."""
    if p.gamma >= 4.0 / 3.0:
        return math.inf
    return 4.0 * math.pi * (p.gamma - 1.0) / (4.0 - 3.0 * p.gamma)


@dataclass(frozen=True)
class EquilibriumProfile:
    """Bundle of the static atmosphere: density/pressure maps and mass."""

    params: ModelParams
    total_mass: float

    def density(self, r):
        return equilibrium_density(self.params, r)

    def pressure(self, r):
        return equilibrium_pressure(self.params, r)

    def density_derivative(self, r):
        return equilibrium_density_derivative(self.params, r)

    def enclosed_mass(self, r: float) -> float:
        """m(r) = 4 pi \\int_1^r rho_bar s^2 ds."""
        p = self.params
        if r < p.R0:
            raise DomainError("enclosed_mass requested at r < 1")
        r = min(r, p.R)
        expo = 1.0 / (p.gamma - 1.0)
        val, _ = quad(lambda s: ((p.R - s) / (s * p.R)) ** expo * s * s,
                      p.R0, r, epsabs=1e-12, epsrel=1e-12, limit=200)
        return 4.0 * math.pi * val


def equilibrium_profile(p: ModelParams) -> EquilibriumProfile:
    return EquilibriumProfile(params=p, total_mass=total_mass(p))
