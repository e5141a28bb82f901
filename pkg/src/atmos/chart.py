"""Radial coordinate charts and their Jacobians.

Four radial coordinates describe the atmosphere:

    r    physical/Lagrangian radius on [1, R]
    z    = (R - r)/R, vanishing at the vacuum boundary
    xi   = sqrt(z(1-z)) + arctan sqrt(z/(1-z)), the Liouville variable
    x    = R^3 xi^2 / 4, the wave coordinate in which the linearized
           operator has the degenerate principal part x d^2/dx^2

plus the convenience variable zeta = 2 sqrt(x) in which the principal
part becomes the regular N-dimensional radial Laplacian.  Forward maps
are closed-form; inverses are solved by safeguarded bracketing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .params import ModelParams

_RTOL = 4.0 * np.finfo(float).eps


def _xi_of_z_scalar(z: float) -> float:
    if z <= 0.0:
        return 0.0
    # atan2 form avoids cancellation and the z -> 1 overflow
    return math.sqrt(z * (1.0 - z)) + math.atan2(math.sqrt(z),
                                                 math.sqrt(1.0 - z))


@dataclass(frozen=True)
class CoordinateChart:
    """Bijections r <-> z <-> xi <-> x for one parameter set."""

    params: ModelParams
    z_R: float = field(init=False)
    xi_R: float = field(init=False)
    x_R: float = field(init=False)
    zeta_R: float = field(init=False)
    x_inf: float = field(init=False)

    def __post_init__(self):
        R = self.params.R
        zR = (R - 1.0) / R
        xiR = _xi_of_z_scalar(zR)
        xR = R ** 3 * xiR ** 2 / 4.0
        object.__setattr__(self, "z_R", zR)
        object.__setattr__(self, "xi_R", xiR)
        object.__setattr__(self, "x_R", xR)
        object.__setattr__(self, "zeta_R", 2.0 * math.sqrt(xR))
        object.__setattr__(self, "x_inf", math.pi ** 2 * R ** 3 / 16.0)

    # ---- forward maps -------------------------------------------------

    def z_of_r(self, r):
        R = self.params.R
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 1.0 - 1e-12) or np.any(arr > R + 1e-12):
            raise DomainError("r outside [1, R]")
        z = np.clip((R - arr) / R, 0.0, self.z_R)
        return float(z) if arr.ndim == 0 else z

    def xi_of_z(self, z):
        arr = np.asarray(z, dtype=float)
        if np.any(arr < -1e-15) or np.any(arr > 1.0):
            raise DomainError("z outside [0, 1)")
        zc = np.clip(arr, 0.0, 1.0)
        xi = np.sqrt(zc * (1.0 - zc)) + np.arctan2(np.sqrt(zc),
                                                   np.sqrt(1.0 - zc))
        return float(xi) if arr.ndim == 0 else xi

    def x_of_z(self, z):
        xi = np.asarray(self.xi_of_z(z), dtype=float)
        out = self.params.R ** 3 * xi ** 2 / 4.0
        return float(out) if np.ndim(z) == 0 else out

    def forward(self, r):
        """r -> (z, xi, x)."""
        z = self.z_of_r(r)
        xi = self.xi_of_z(z)
        x = self.params.R ** 3 * np.asarray(xi, dtype=float) ** 2 / 4.0
        if np.ndim(r) == 0:
            return float(z), float(xi), float(x)
        return z, xi, x

    def x_of_r(self, r):
        return self.forward(r)[2]

    # ---- inverse maps -------------------------------------------------

    def z_of_xi(self, xi: float) -> float:
        """Invert xi(z); solved in s = sqrt(z) to keep relative accuracy
        near the degenerate end z = 0 where xi ~ 2 sqrt(z)."""
        if xi < -1e-14 or xi > math.pi / 2.0:
            raise DomainError("xi outside [0, pi/2)")
        if xi <= 0.0:
            return 0.0
        s_hi = min(1.0, math.sqrt(self.z_R) * (1.0 + 1e-9) + 1e-12)
        if _xi_of_z_scalar(s_hi * s_hi) < xi:
            s_hi = 1.0 - 1e-15
        s = brentq(lambda s: _xi_of_z_scalar(s * s) - xi, 0.0, s_hi,
                   xtol=5e-324, rtol=_RTOL, maxiter=200)
        return s * s

    def z_of_x(self, x: float) -> float:
        if x < -1e-12 * self.x_R:
            raise DomainError("x < 0")
        xt = max(x, 0.0) / self.params.R ** 3
        return self.z_of_xi(2.0 * math.sqrt(xt))

    def r_of_x(self, x) -> float:
        """Invert x(r) on [0, x_R] by bracketing in sqrt(z)."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < -1e-12 * self.x_R) or \
                np.any(arr > self.x_R * (1.0 + 1e-10) + 1e-300):
            raise DomainError("x outside [0, x_R]")
        R = self.params.R

        def one(xv):
            return R * (1.0 - self.z_of_x(min(max(xv, 0.0), self.x_R)))

        if arr.ndim == 0:
            return one(float(arr))
        return np.array([one(v) for v in arr])

    def r_of_z(self, z):
        out = self.params.R * (1.0 - np.asarray(z, dtype=float))
        return float(out) if np.ndim(z) == 0 else out

    # ---- Jacobians -----------------------------------------------------

    def dz_dr(self) -> float:
        return -1.0 / self.params.R

    def dxi_dz(self, z):
        """sqrt((1-z)/z); unbounded as z -> 0."""
        arr = np.asarray(z, dtype=float)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainError("dxi/dz needs z in (0, 1)")
        out = np.sqrt((1.0 - arr) / arr)
        return float(out) if arr.ndim == 0 else out

    def dx_dr(self, r):
        """Finite and nonzero on all of [1, R]; equals -R^2 at r = R."""
        R = self.params.R
        z = self.z_of_r(r)
        arr = np.asarray(z, dtype=float)
        xi = self.xi_of_z(arr)
        # (xi/2) * sqrt((1-z)/z) -> sqrt(1-z) as z -> 0 via xi ~ 2 sqrt z
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(arr > 0.0,
                           (np.asarray(xi) / 2.0)
                           * np.sqrt((1.0 - arr) / np.where(arr > 0, arr, 1.0)),
                           1.0)
        out = -R ** 2 * fac
        return float(out) if arr.ndim == 0 else out

    def dzeta_dr(self, r):
        """d(2 sqrt x)/dr = dx/dr / sqrt(x); diverges like 1/sqrt(R-r) at r=R."""
        x = self.x_of_r(r)
        arr = np.asarray(x, dtype=float)
        if np.any(arr <= 0.0):
            raise DomainError("dzeta/dr needs r < R")
        out = self.dx_dr(r) / np.sqrt(arr)
        return float(out) if arr.ndim == 0 else out

    def u_of_z(self, z):
        """u = sqrt(xtilde/z) = xi/(2 sqrt z), extended by u(0) = 1.

        The ratio of the wave coordinate to its leading small-z behavior;
        enters the closed-form operator coefficients and the symmetrizing
        measure.
        """
        arr = np.asarray(z, dtype=float)
        xi = np.asarray(self.xi_of_z(arr), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(arr > 0.0,
                         xi / (2.0 * np.sqrt(np.where(arr > 0, arr, 1.0))),
                         1.0)
        return float(u) if arr.ndim == 0 else u


def make_chart(p: ModelParams) -> CoordinateChart:
    return CoordinateChart(params=p)
