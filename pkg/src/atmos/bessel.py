"""Bessel functions of the first kind, their zeros, and the exact
spectrum of the pure degenerate radial operator.

J_nu is evaluated from the ascending power series for small argument and
from the Hankel (large-argument) expansion beyond a crossover chosen so
both branches stay below ~1e-11 absolute error for the moderate orders
used here (nu <= ~5).  Zeros come from the McMahon asymptotic guess
refined by bracketed root-finding on this evaluator.

For -Lap = -(x d^2/dx^2 + (N/2) d/dx) on (0, 1) with Dirichlet data at
x = 1 and boundedness at x = 0, the eigenvalues are exactly
lambda_n = (j_{nu,n}/2)^2 with nu = N/2 - 1: the regular solution is
J_nu(2 sqrt(lambda x)) (x)^(-nu/2) up to normalization.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq

from .errors import AccuracyError, BracketError

_SERIES_CUTOFF = 12.0
_MIN_TERM_OK = 5e-11


def _bessel_j_series(nu: float, r: float) -> float:
    """Ascending series; fsum keeps the alternating cancellation exact."""
    if r == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    lhalf = math.log(r / 2.0)
    terms = []
    m = 0
    while True:
        lt = (nu + 2 * m) * lhalf - math.lgamma(m + 1) - math.lgamma(m + nu + 1)
        t = math.exp(lt)
        terms.append(-t if (m % 2) else t)
        if m > r / 2.0 + 4 and t < 1e-20 * (abs(terms[0]) + 1e-300):
            break
        if m > 400:
            raise AccuracyError("ascending series failed to terminate")
        m += 1
    return math.fsum(terms)


def _bessel_j_hankel(nu: float, r: float) -> float:
    """Hankel expansion summed adaptively to its smallest term."""
    mu = 4.0 * nu * nu
    c = 1.0
    p_terms = [1.0]
    q_terms = []
    m = 1
    best = 1.0
    while True:
        c = c * (mu - (2 * m - 1) ** 2) / (8.0 * m * r)
        ac = abs(c)
        if ac >= best and m > 2:
            break
        best = min(best, ac)
        sign = -1.0 if (m // 2) % 2 else 1.0
        if m % 2:
            q_terms.append(sign * c)
        else:
            p_terms.append(sign * c)
        if ac < 1e-17:
            break
        if m > 120:
            break
        m += 1
    if best > _MIN_TERM_OK:
        raise AccuracyError(
            f"Hankel expansion stalls at {best:.2e} for nu={nu}, r={r}")
    p = math.fsum(p_terms)
    q = math.fsum(q_terms)
    omega = r - nu * math.pi / 2.0 - math.pi / 4.0
    return math.sqrt(2.0 / (math.pi * r)) * (math.cos(omega) * p
                                             - math.sin(omega) * q)


def bessel_j(nu: float, r: float) -> float:
    """J_nu(r) for nu >= 0, r >= 0."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if r < 0:
        raise ValueError("r must be >= 0")
    cutoff = max(_SERIES_CUTOFF, 1.2 * nu + 6.0)
    if r < cutoff:
        return _bessel_j_series(nu, r)
    return _bessel_j_hankel(nu, r)


def _mcmahon_guess(nu: float, n: int) -> float:
    beta = (n + nu / 2.0 - 0.25) * math.pi
    mu = 4.0 * nu * nu
    return (beta - (mu - 1.0) / (8.0 * beta)
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3))


def bessel_zero(nu: float, n: int) -> float:
    """n-th positive zero j_{nu,n} (n >= 1) by guess + bracketing."""
    if n < 1:
        raise ValueError("zero index must be >= 1")
    guess = _mcmahon_guess(nu, n)
    lo_floor = max(nu + 1e-6, _mcmahon_guess(nu, n - 1) + 0.3 if n > 1 else 0.1)
    # scan outward from the guess for a sign change
    step = 0.25
    width = 0.75
    while width <= 3.5:
        lo = max(guess - width, lo_floor)
        hi = guess + width
        ngrid = max(8, int(2 * width / step))
        pts = [lo + (hi - lo) * k / ngrid for k in range(ngrid + 1)]
        vals = [bessel_j(nu, p) for p in pts]
        hit = None
        for k in range(ngrid):
            if vals[k] == 0.0:
                return pts[k]
            if vals[k] * vals[k + 1] < 0.0:
                # take the change closest to the guess
                if hit is None or abs(pts[k] - guess) < abs(pts[hit] - guess):
                    hit = k
        if hit is not None:
            return brentq(lambda t: bessel_j(nu, t), pts[hit], pts[hit + 1],
                          xtol=1e-14, rtol=4 * 2.3e-16, maxiter=200)
        width *= 2.0
    raise BracketError(f"no sign change near j_{{{nu},{n}}} guess {guess:.4f}")


def bessel_oracle_spectrum(N: float, count: int) -> list[float]:
    """lambda_n = (j_{nu,n}/2)^2, nu = N/2 - 1, the exact Dirichlet
    spectrum of -Lap on the unit x-interval."""
    nu = N / 2.0 - 1.0
    return [(bessel_zero(nu, n) / 2.0) ** 2 for n in range(1, count + 1)]
