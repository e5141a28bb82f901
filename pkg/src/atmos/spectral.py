"""Eigenpairs of the singular operator L with Dirichlet data at x_R.

Two independent methods:

* shooting: the regular Frobenius branch y = 1 + a1 x + ... seeds a
  high-order ODE integration from a small x_s to x_R; eigenvalues are
  roots of y(x_R; lambda), bracketed and refined by root-finding, with
  the Sturm oscillation count (mode n has n-1 interior zeros) as a
  consistency check.

* collocation: the discrete operator on the uniform zeta-grid, rescaled
  by the square root of the discrete symmetrizing weights and solved
  either densely or by shift-invert Arnoldi for the lowest modes.

L is symmetric in the measure x^(N/2-1) exp(-int L1) dx; eigenmodes are
normalized to unit norm in the plain x^(N/2-1) dx inner product with
positive central value, so all downstream experiments are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .bessel import bessel_zero
from .errors import (BracketError, GridError, IntegrationError, OrderError,
                     SymmetryViolationError)
from .grid import WeightedGrid, weighted_norm
from .operators import LinearOperatorCoeffs, operator_matrix

_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class EigenMode:
    """One eigenpair (lambda_n, Phi_n); phi holds grid samples when a grid
    was supplied, phi0 the (positive) central value after normalization."""

    index: int
    lam: float
    phi: np.ndarray | None
    phi0: float
    zeros: int
    normalized: bool
    method: str
    grid: WeightedGrid | None = None

    def eval_time_periodic(self, t, theta0: float = 0.0):
        """sin(sqrt(lambda) t + theta0) * Phi on the stored grid."""
        if self.phi is None:
            raise ValueError("mode carries no grid samples")
        return np.sin(math.sqrt(self.lam) * t + theta0) * self.phi


@dataclass(frozen=True)
class FrobeniusSeed:
    """Truncated regular-branch series y = 1 + sum a_j x^j near x = 0."""

    coefficients: np.ndarray
    K: int
    x_s: float
    lam: float

    def eval(self, x):
        a = self.coefficients
        y = np.zeros_like(np.asarray(x, dtype=float)) + a[-1]
        for c in a[-2::-1]:
            y = y * x + c
        dy = np.zeros_like(np.asarray(x, dtype=float)) + a[-1] * (a.size - 1)
        for k in range(a.size - 2, 0, -1):
            dy = dy * x + a[k] * k
        return y, dy

    def tail_estimate(self, x: float) -> float:
        a = self.coefficients
        return abs(a[-1]) * abs(x) ** (a.size - 1)


def frobenius_seed(coeffs: LinearOperatorCoeffs, lam: float, K: int,
                   x_s: float | None = None) -> FrobeniusSeed:
    """Recurrence for x y'' + (N/2 - L1 x) y' + (lambda - L0) y = 0.

    a_{k+1} = -( lam a_k - sum_j nu_{k-j} a_j - sum_j j mu_{k-j} a_j )
              / ((k+1)(k + N/2)),   a_0 = 1,
    with (mu, nu) the Taylor coefficients of (L1, L0) at 0.
    """
    mu = coeffs.taylor_L1
    nu = coeffs.taylor_L0
    if K + 1 > mu.size or K + 1 > nu.size:
        raise OrderError(f"K={K} exceeds fitted Taylor degree {mu.size - 1}")
    N = coeffs.N
    a = np.zeros(K + 1)
    a[0] = 1.0
    for k in range(K):
        s = lam * a[k]
        for j in range(k + 1):
            s -= nu[k - j] * a[j]
        for j in range(1, k + 1):
            s -= j * mu[k - j] * a[j]
        a[k + 1] = -s / ((k + 1.0) * (k + N / 2.0))
    if x_s is None:
        x_s = 0.05 * coeffs.x_R
        while x_s > 1e-8 * coeffs.x_R:
            if abs(a[-1]) * x_s ** K <= 1e-13:
                break
            x_s *= 0.5
    return FrobeniusSeed(coefficients=a, K=K, x_s=float(x_s), lam=lam)


def _series_norm_sq(seed: FrobeniusSeed, N: float) -> float:
    """int_0^{x_s} y_series^2 x^(N/2-1) dx, term by term (exact powers)."""
    a = seed.coefficients
    c = np.convolve(a, a)
    m = np.arange(c.size)
    return float(np.sum(c * seed.x_s ** (m + N / 2.0) / (m + N / 2.0)))


def _shoot_once(coeffs: LinearOperatorCoeffs, lam: float, K: int,
                dense: bool = False):
    """Integrate the regular branch from x_s to x_R; returns the solver
    bunch (and the seed)."""
    seed = frobenius_seed(coeffs, lam, K)
    y0, dy0 = seed.eval(seed.x_s)

    def rhs(x, s):
        y, dy = s
        return [dy, -((coeffs.N / 2.0 - coeffs.L1(x) * x) * dy
                      + (lam - coeffs.L0(x)) * y) / x]

    sol = solve_ivp(rhs, (seed.x_s, coeffs.x_R), [y0, dy0], method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=dense)
    if not sol.success:
        raise IntegrationError(
            f"shooting integration failed at x={sol.t[-1]:.6g}: {sol.message}")
    return sol, seed


def _count_interior_zeros(coeffs, seed, sol, nsamp: int = 2000) -> int:
    xs_series = np.linspace(seed.x_s * 1e-3, seed.x_s, 40)
    ys = seed.eval(xs_series)[0]
    xo = np.linspace(seed.x_s, coeffs.x_R, nsamp)
    yo = sol.sol(xo)[0]
    y_all = np.concatenate([ys, yo[1:-1]])  # strictly interior
    s = np.sign(y_all)
    s = s[s != 0]
    return int(np.sum(s[1:] * s[:-1] < 0))


def shoot_eigen(coeffs: LinearOperatorCoeffs, search_window, n_target: int,
                K: int = 12, grid: WeightedGrid | None = None) -> EigenMode:
    """Find the eigenvalue bracketed by `search_window` and verify it is
    mode `n_target` by its oscillation count."""
    lo, hi = float(search_window[0]), float(search_window[1])

    def miss(lam):
        sol, _ = _shoot_once(coeffs, lam, K)
        return sol.y[0, -1]

    flo, fhi = miss(lo), miss(hi)
    if flo * fhi > 0.0:
        raise BracketError(
            f"window ({lo:.6g}, {hi:.6g}) has no sign change "
            f"(endpoint values {flo:.3e}, {fhi:.3e})")
    lam = brentq(miss, lo, hi, xtol=1e-13, rtol=4e-15, maxiter=200)
    sol, seed = _shoot_once(coeffs, lam, K, dense=True)
    zeros = _count_interior_zeros(coeffs, seed, sol)
    if zeros != n_target - 1:
        raise BracketError(
            f"window captured a mode with {zeros} interior zeros, "
            f"expected {n_target - 1}")
    # X-normalization: series part in closed form, ODE part by an
    # augmented quadrature integration
    nn = coeffs.N

    def rhs(x, s):
        y, dy, _ = s
        return [dy, -((nn / 2.0 - coeffs.L1(x) * x) * dy
                      + (lam - coeffs.L0(x)) * y) / x,
                y * y * x ** (nn / 2.0 - 1.0)]

    y0, dy0 = seed.eval(seed.x_s)
    aug = solve_ivp(rhs, (seed.x_s, coeffs.x_R),
                    [y0, dy0, _series_norm_sq(seed, nn)], method="DOP853",
                    rtol=1e-12, atol=1e-14)
    if not aug.success:
        raise IntegrationError("normalization quadrature failed")
    norm = math.sqrt(aug.y[2, -1])
    phi = None
    if grid is not None:
        vals = np.empty(grid.n)
        small = grid.x <= seed.x_s
        vals[small] = seed.eval(grid.x[small])[0]
        vals[~small] = sol.sol(grid.x[~small])[0]
        vals[-1] = 0.0
        phi = vals / norm
    return EigenMode(index=n_target, lam=lam, phi=phi, phi0=1.0 / norm,
                     zeros=zeros, normalized=True, method="shooting",
                     grid=grid)


def eigenvalue_scale(coeffs: LinearOperatorCoeffs) -> float:
    """Leading Dirichlet eigenvalue of the bare -Lap on [0, x_R]."""
    nu = coeffs.N / 2.0 - 1.0
    return (bessel_zero(nu, 1) / 2.0) ** 2 / coeffs.x_R


def _discrete_sym_weights(g: WeightedGrid,
                          coeffs: LinearOperatorCoeffs) -> np.ndarray:
    return g.weights * np.asarray(coeffs.sym_factor(g.x), dtype=float)


def collocation_spectrum(coeffs: LinearOperatorCoeffs, g: WeightedGrid,
                         count: int, order: int = 4) -> list[EigenMode]:
    """Lowest `count` modes of the discrete L on the grid.

    The operator matrix is rescaled by the square root of the discrete
    symmetrizing weights (a similarity, so the spectrum is untouched) and
    solved densely for small problems or by shift-invert Arnoldi when only
    a few modes of a large grid are needed.  Residual imaginary parts
    beyond 1e-9 relative signal a broken assembly and abort.
    """
    if g.n < 16 * count:
        raise GridError(f"grid n={g.n} under-resolved for {count} modes "
                        f"(need >= {16 * count})")
    A = operator_matrix(g, coeffs, order=order)
    m = g.n - 1
    wsym = _discrete_sym_weights(g, coeffs)[:m]
    if np.any(wsym <= 0.0):
        raise GridError("nonpositive quadrature weights")
    d = np.sqrt(wsym)
    # floor the similarity diagonal: the weight vanishes like zeta^(N-1)
    # at the origin and an unfloored rescaling would drown the eigenvector
    # components there in solver noise on the back-transform
    d = np.maximum(d, 1e-6 * d.max())
    lam_scale = eigenvalue_scale(coeffs)

    dense = (m <= 700) or (count >= m // 8)
    if sp.issparse(A):
        B = sp.diags(d) @ A @ sp.diags(1.0 / d)
        if dense:
            B = B.toarray()
    else:
        B = (A * d[:, None]) / d[None, :]
        if not dense:
            B = sp.csr_matrix(B)

    if dense:
        vals, vecs = sla.eig(np.asarray(B))
    else:
        sigma = -0.2 * lam_scale
        try:
            vals, vecs = spla.eigs(B, k=count, sigma=sigma, which="LM",
                                   v0=np.ones(m), tol=0)
        except spla.ArpackNoConvergence:
            vals, vecs = sla.eig(B.toarray())

    # real spectrum check: grid-scale modes of the non-self-adjoint
    # discretization may pair up complex near the top of the spectrum,
    # which is harmless; complex content among (or below) the requested
    # low modes signals a broken assembly
    phys = np.abs(vals.imag) <= _IMAG_TOL * np.maximum(np.abs(vals),
                                                       lam_scale)
    if np.count_nonzero(phys) < count:
        raise SymmetryViolationError(
            f"only {np.count_nonzero(phys)} real eigenvalues for "
            f"{count} requested; max imag {np.abs(vals.imag).max():.3e}")
    order_phys = np.flatnonzero(phys)[np.argsort(vals.real[phys])]
    idx = order_phys[:count]
    lam_top = vals.real[idx[-1]]
    if np.any(~phys & (vals.real < lam_top)):
        raise SymmetryViolationError(
            "complex eigenvalue inside the requested low spectrum")
    lam = vals.real
    modes = []
    for rank, j in enumerate(idx, start=1):
        u = vecs[:, j].real
        phi = np.concatenate([u / d, [0.0]])
        nrm = weighted_norm(g, phi)
        phi = phi / nrm
        anchor = phi[0] if abs(phi[0]) > 1e-12 * np.abs(phi).max() \
            else phi[np.argmax(np.abs(phi))]
        if anchor < 0:
            phi = -phi
        s = np.sign(phi[:-1])
        s = s[s != 0]
        zeros = int(np.sum(s[1:] * s[:-1] < 0))
        modes.append(EigenMode(index=rank, lam=float(lam[j]), phi=phi,
                               phi0=float(phi[0]), zeros=zeros,
                               normalized=True, method="collocation",
                               grid=g))
    return modes


def shooting_window(lams: np.ndarray, i: int) -> tuple[float, float]:
    """Bracket for mode i (0-based) from a sorted eigenvalue estimate list."""
    lams = np.asarray(lams, dtype=float)
    if i > 0:
        lo = 0.5 * (lams[i - 1] + lams[i])
    elif lams.size > 1:
        lo = lams[0] - 0.75 * (lams[1] - lams[0])
    else:
        lo = 0.25 * lams[0]
    if i + 1 < lams.size:
        hi = 0.5 * (lams[i] + lams[i + 1])
    else:
        hi = lams[i] + 0.75 * (lams[i] - lo)
    return float(lo), float(hi)
