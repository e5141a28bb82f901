"""Time integration of the linear and fully nonlinear perturbation flow.

Both problems are advanced by the classical four-stage Runge-Kutta scheme
on the uniform zeta-grid (method of lines).  In zeta the principal part
is the regular N-dimensional radial wave operator with unit speed, so the
step is dt = CFL * dzeta / max sqrt(b2) with no degenerate-coefficient
penalty.  The Dirichlet node at x_R stays pinned to zero; the origin uses
the parity closure of the spatial operators.

The nonlinear right-hand side is

    y_tt = -(1 + G_I(y, v)) L y - G_II(r, y, v),        v = r dy/dr,

with v computed from the zeta-derivative through the chart; at the
vacuum node r = R the chain-rule limit is realized by a one-sided
second-order stencil in x.  Admissibility |y| + |v| < 1 is enforced on
every accepted step and a breach aborts the run (no artificial viscosity:
the target regime is small smooth oscillations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (InsufficientDataError, MappingError,
                     StateAdmissibilityError, StabilityError)
from .grid import WeightedGrid, inner, weighted_norm
from .nonlinear import g_I, g_II0, g_II1, gII_prefactors
from .operators import (LinearOperatorCoeffs, dzeta_apply, laplacian_apply,
                        make_discrete_L)
from .params import ModelParams, equilibrium_density
from .spectral import EigenMode

_ENERGY_GUARD = 10.0


@dataclass(frozen=True)
class WaveState:
    """One time slice of the displacement field."""

    t: float
    y: np.ndarray
    yt: np.ndarray


@dataclass(frozen=True)
class LinearModeSolution:
    """y1(t, x) = sum_k c_k sin(sqrt(lambda_k) t + theta_k) Phi_k(x)."""

    modes: tuple[EigenMode, ...]
    amplitudes: tuple[float, ...]
    phases: tuple[float, ...]

    @classmethod
    def single(cls, mode: EigenMode, amplitude: float = 1.0,
               phase: float = 0.0):
        return cls(modes=(mode,), amplitudes=(amplitude,), phases=(phase,))

    def eval(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.modes[0].phi)
        for m, c, th in zip(self.modes, self.amplitudes, self.phases):
            out += c * math.sin(math.sqrt(m.lam) * t + th) * m.phi
        return out

    def eval_dt(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.modes[0].phi)
        for m, c, th in zip(self.modes, self.amplitudes, self.phases):
            rt = math.sqrt(m.lam)
            out += c * rt * math.cos(rt * t + th) * m.phi
        return out


@dataclass
class WaveTrajectory:
    """Sampled states plus per-step scalar series."""

    times: np.ndarray
    states: list[WaveState]
    t_series: np.ndarray
    energy: np.ndarray
    hnorm: np.ndarray
    gnorm_integral: np.ndarray
    boundary: np.ndarray            # y(t, x=0), the free-boundary series
    extras: dict = field(default_factory=dict)


def cfl_dt(g: WeightedGrid, b2_max: float = 1.0, cfl: float = 0.5) -> float:
    return cfl * g.h / math.sqrt(max(b2_max, 1e-300))


def _rk4_step(f, t, y, yt, dt):
    k1y, k1v = f(t, y, yt)
    k2y, k2v = f(t + 0.5 * dt, y + 0.5 * dt * k1y, yt + 0.5 * dt * k1v)
    k3y, k3v = f(t + 0.5 * dt, y + 0.5 * dt * k2y, yt + 0.5 * dt * k2v)
    k4y, k4v = f(t + dt, y + dt * k3y, yt + dt * k3v)
    y2 = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    yt2 = yt + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return y2, yt2


def energy(g: WeightedGrid, y: np.ndarray, yt: np.ndarray,
           b2_vals: np.ndarray | float = 1.0) -> float:
    """E = int ( yt^2 + b2 (Ddot y)^2 ) x^(N/2-1) dx."""
    dd = dzeta_apply(g, y)
    return inner(g, yt, yt) + float(np.dot(g.weights, b2_vals * dd * dd))


def linear_wave_solve(coeffs: LinearOperatorCoeffs, g: WeightedGrid,
                      forcing=None, T: float = 1.0, dt: float | str = "auto",
                      ic: tuple[np.ndarray, np.ndarray] | None = None,
                      b_fields: tuple | None = None, cfl: float = 0.5,
                      n_samples: int = 33) -> WaveTrajectory:
    """Solve h_tt + ( -b2 Lap + b1 Dcheck + b0 ) h = g on [0, T].

    b_fields overrides the default (1, L1, L0) nodal coefficient arrays.
    The energy series is monitored every step; growth beyond ten times the
    forced bound aborts with a stability error (the CFL guard).
    """
    n = g.n
    op = make_discrete_L(g, coeffs)
    if b_fields is None:
        b2v = np.ones(n)

        def Ah(yy):
            return op.apply(yy)
    else:
        b2v, b1v, b0v = (np.broadcast_to(np.asarray(b, dtype=float), (n,))
                         .copy() for b in b_fields)

        def Ah(yy):
            return -b2v * laplacian_apply(g, yy) \
                + b1v * 0.5 * g.zeta * dzeta_apply(g, yy) + b0v * yy
    if np.any(np.abs(b2v - 1.0) > 0.5):
        raise StateAdmissibilityError("|b2 - 1| <= 1/2 violated")
    if dt == "auto":
        b2max = float(np.max(b2v))
        dt_val = min(cfl_dt(g, b2max, cfl),
                     0.9 * 2.0 * math.sqrt(2.0)
                     / math.sqrt(b2max * op.gershgorin_bound()))
    else:
        dt_val = float(dt)
    nsteps = max(1, int(math.ceil(T / dt_val - 1e-12)))
    dt_val = T / nsteps

    if ic is None:
        y = np.zeros(n)
        yt = np.zeros(n)
    else:
        y = np.array(ic[0], dtype=float)
        yt = np.array(ic[1], dtype=float)
    y[-1] = 0.0
    yt[-1] = 0.0

    def f(t, yy, vv):
        acc = -Ah(yy)
        if forcing is not None:
            acc = acc + forcing(t)
        acc[-1] = 0.0
        vv = vv.copy()
        vv[-1] = 0.0
        return vv, acc

    stride = max(1, nsteps // max(n_samples - 1, 1))
    times, states = [0.0], [WaveState(0.0, y.copy(), yt.copy())]
    ts = np.empty(nsteps + 1)
    es = np.empty(nsteps + 1)
    hs = np.empty(nsteps + 1)
    gs = np.empty(nsteps + 1)
    bs = np.empty(nsteps + 1)
    ts[0] = 0.0
    es[0] = energy(g, y, yt, b2v)
    hs[0] = weighted_norm(g, y)
    gs[0] = 0.0
    bs[0] = y[0]
    e0 = es[0]
    gint = 0.0
    gprev = weighted_norm(g, forcing(0.0)) if forcing is not None else 0.0
    t = 0.0
    for k in range(1, nsteps + 1):
        y, yt = _rk4_step(f, t, y, yt, dt_val)
        y[-1] = 0.0
        yt[-1] = 0.0
        t = k * dt_val
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yt))):
            raise StabilityError(f"non-finite field at t={t:.6g}")
        if forcing is not None:
            gcur = weighted_norm(g, forcing(t))
            gint += 0.5 * dt_val * (gprev + gcur)
            gprev = gcur
        e = energy(g, y, yt, b2v)
        bound = (math.sqrt(e0) + 10.0 * (1.0 + T) * gint) ** 2
        if e > _ENERGY_GUARD * bound + 1e-250 and e > 1e-200:
            raise StabilityError(
                f"energy blow-up at t={t:.6g}: E={e:.3e} exceeds "
                f"{_ENERGY_GUARD}x bound {bound:.3e}")
        ts[k] = t
        es[k] = e
        hs[k] = weighted_norm(g, y)
        gs[k] = gint
        bs[k] = y[0]
        if k % stride == 0 or k == nsteps:
            times.append(t)
            states.append(WaveState(t, y.copy(), yt.copy()))
    return WaveTrajectory(times=np.array(times), states=states, t_series=ts,
                          energy=es, hnorm=hs, gnorm_integral=gs, boundary=bs)


def energy_inequality_check(traj: WaveTrajectory) -> dict:
    """Smallest admissible C in sqrt(E) + ||h|| <= C int_0^t ||g||.

    Only meaningful for zero-IC forced runs; times before the forcing has
    accumulated are skipped.
    """
    gint = traj.gnorm_integral
    lhs = np.sqrt(np.maximum(traj.energy, 0.0)) + traj.hnorm
    mask = gint > 1e-12 * (gint[-1] + 1e-300)
    if not np.any(mask):
        return {"C": 0.0, "t_at": 0.0, "max_lhs": float(lhs.max())}
    ratio = lhs[mask] / gint[mask]
    k = int(np.argmax(ratio))
    return {"C": float(ratio[k]), "t_at": float(traj.t_series[mask][k]),
            "max_lhs": float(lhs.max())}


# ---------------------------------------------------------------------------
# nonlinear free-boundary dynamics
# ---------------------------------------------------------------------------

@dataclass
class NonlinearTrajectory:
    times: np.ndarray
    states: list[WaveState]
    t_series: np.ndarray
    boundary: np.ndarray
    energy: np.ndarray
    sup_w: np.ndarray               # sup |y - eps y1| / eps per step
    admissibility: np.ndarray       # max(|y| + |v|) per step
    report: dict = field(default_factory=dict)


def _v_factors(p: ModelParams, g: WeightedGrid):
    """Nodal factors turning dy/dzeta into v = r dy/dr (origin separate)."""
    ch = g.chart
    vfac = np.zeros(g.n)
    for i in range(1, g.n):
        vfac[i] = g.r[i] * ch.dzeta_dr(g.r[i])
    return vfac


def v_field(p: ModelParams, g: WeightedGrid, y: np.ndarray,
            vfac: np.ndarray | None = None) -> np.ndarray:
    """v = r dy/dr on the grid; the r = R node uses the one-sided x-stencil
    limit v(R) = -R^3 y_x(0)."""
    if vfac is None:
        vfac = _v_factors(p, g)
    dz = dzeta_apply(g, y)
    v = vfac * dz
    x1 = g.x[1]
    yx0 = (-1.25 * y[0] + (4.0 / 3.0) * y[1] - (1.0 / 12.0) * y[2]) / x1
    v[0] = -p.R ** 3 * yx0
    return v


def nonlinear_simulate(p: ModelParams, coeffs: LinearOperatorCoeffs,
                       modes: LinearModeSolution, eps: float, T: float,
                       g: WeightedGrid, dt: float | str = "auto",
                       cfl: float = 0.5, n_samples: int = 17
                       ) -> NonlinearTrajectory:
    """Integrate the full perturbation equation from the eps-scaled linear
    initial data y(0) = eps y1(0), y_t(0) = eps d_t y1(0)."""
    n = g.n
    ga = p.gamma
    op = make_discrete_L(g, coeffs)
    pf0, pf1 = gII_prefactors(p, g.r)
    vfac = _v_factors(p, g)

    def f(t, yy, vv_t):
        Ly = op.apply(yy)
        if eps == 0.0:
            acc = -Ly
        else:
            v = v_field(p, g, yy, vfac)
            gI = g_I(ga, yy, v)
            gII = pf0 * g_II0(ga, yy, v) + pf1 * g_II1(ga, yy, v)
            acc = -(1.0 + gI) * Ly - gII
        acc[-1] = 0.0
        vv = vv_t.copy()
        vv[-1] = 0.0
        return vv, acc

    if dt == "auto":
        dt_val = min(cfl_dt(g, 1.0, cfl),
                     0.9 * 2.0 * math.sqrt(2.0)
                     / math.sqrt(op.gershgorin_bound()))
    else:
        dt_val = float(dt)
    nsteps = max(1, int(math.ceil(T / dt_val - 1e-12)))
    dt_val = T / nsteps

    y = eps * modes.eval(0.0)
    yt = eps * modes.eval_dt(0.0)
    y[-1] = 0.0
    yt[-1] = 0.0

    stride = max(1, nsteps // max(n_samples - 1, 1))
    times, states = [0.0], [WaveState(0.0, y.copy(), yt.copy())]
    ts = np.empty(nsteps + 1)
    bs = np.empty(nsteps + 1)
    es = np.empty(nsteps + 1)
    ws = np.empty(nsteps + 1)
    am = np.empty(nsteps + 1)
    v0 = v_field(p, g, y, vfac)
    ts[0] = 0.0
    bs[0] = y[0]
    es[0] = energy(g, y, yt)
    ws[0] = 0.0
    am[0] = float(np.max(np.abs(y) + np.abs(v0)))
    if am[0] >= 1.0:
        raise StateAdmissibilityError(
            f"initial data violates |y|+|v| < 1 (max {am[0]:.3f})")
    t = 0.0
    for k in range(1, nsteps + 1):
        y, yt = _rk4_step(f, t, y, yt, dt_val)
        y[-1] = 0.0
        yt[-1] = 0.0
        t = k * dt_val
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yt))):
            raise StabilityError(f"non-finite field at t={t:.6g}")
        v = v_field(p, g, y, vfac)
        amax = float(np.max(np.abs(y) + np.abs(v)))
        if amax >= 1.0:
            raise StateAdmissibilityError(
                f"admissibility |y|+|v| < 1 breached at t={t:.6g} "
                f"(max {amax:.3f})")
        ts[k] = t
        bs[k] = y[0]
        es[k] = energy(g, y, yt)
        am[k] = amax
        if eps == 0.0:
            ws[k] = float(np.max(np.abs(y)))
        else:
            ws[k] = float(np.max(np.abs(y - eps * modes.eval(t)))) / eps
        if k % stride == 0 or k == nsteps:
            times.append(t)
            states.append(WaveState(t, y.copy(), yt.copy()))
    report = {
        "eps": eps,
        "sup_w": float(np.max(ws)),
        "sup_y_minus_linear": float(np.max(ws)) * eps,
        "admissibility_margin": float(1.0 - np.max(am)),
        "dt": dt_val,
        "nsteps": nsteps,
    }
    return NonlinearTrajectory(times=np.array(times), states=states,
                               t_series=ts, boundary=bs, energy=es,
                               sup_w=ws, admissibility=am, report=report)


# ---------------------------------------------------------------------------
# reconstruction of the physical Euler fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerField:
    """Physical-space snapshot: fields sampled at the Lagrangian nodes,
    listed with radius ascending."""

    t: float
    rbar: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    R_F: float
    mass: np.ndarray
    M: float

    def lagrangian_radius(self, m):
        """r(t, m): radius of the particle enclosing mass m."""
        return np.interp(m, self.mass, self.r)


def euler_reconstruct(p: ModelParams, g: WeightedGrid,
                      state: WaveState) -> EulerField:
    """Map a displacement slice to (rho, u, R_F) via
    rho = rho_bar / ((1+y)^2 (1+v)), u = rbar y_t, r = rbar (1+y)."""
    rbar_desc = g.r
    y, yt = state.y, state.yt
    v = v_field(p, g, y)
    if np.any(1.0 + y <= 0.0) or np.any(1.0 + v <= 0.0):
        raise StateAdmissibilityError("reconstruction of inadmissible state")
    rho_desc = equilibrium_density(p, rbar_desc) / ((1.0 + y) ** 2 * (1.0 + v))
    u_desc = rbar_desc * yt
    r_desc = rbar_desc * (1.0 + y)
    # ascending radius order
    rbar = rbar_desc[::-1].copy()
    r = r_desc[::-1].copy()
    rho = rho_desc[::-1].copy()
    u = u_desc[::-1].copy()
    if np.any(np.diff(r) <= 0.0):
        raise MappingError("physical radius not monotone (particle crossing)")
    # equilibrium mass coordinate m(rbar) by per-interval Gauss quadrature
    expo = 1.0 / (p.gamma - 1.0)

    def integrand(s):
        return ((p.R - s) / (s * p.R)) ** expo * s * s

    gl_t, gl_w = np.polynomial.legendre.leggauss(6)
    m = np.zeros(rbar.size)
    for i in range(1, rbar.size):
        a, b = rbar[i - 1], rbar[i]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        m[i] = m[i - 1] + half * np.dot(gl_w, integrand(mid + half * gl_t))
    m *= 4.0 * math.pi
    return EulerField(t=state.t, rbar=rbar, r=r, rho=rho, u=u,
                      R_F=p.R * (1.0 + y[0]), mass=m, M=float(m[-1]))


def vacuum_exponent_fit(fld: EulerField, p: ModelParams,
                        window: tuple[float, float] = (1e-4, 1e-2)) -> float:
    """Least-squares slope of log rho against log(R_F - r) over the
    boundary layer R_F - r in window * R."""
    s = fld.R_F - fld.r
    lo, hi = window[0] * p.R, window[1] * p.R
    mask = (s >= lo) & (s <= hi) & (fld.rho > 0.0)
    if np.count_nonzero(mask) < 5:
        raise InsufficientDataError(
            f"only {np.count_nonzero(mask)} samples in the fit window")
    return float(np.polyfit(np.log(s[mask]), np.log(fld.rho[mask]), 1)[0])


def period_measure(t: np.ndarray, series: np.ndarray) -> tuple[float, float]:
    """Oscillation period from mean-removed upward zero crossings.

    Returns (mean period, jitter).  Needs at least two upward crossings.
    """
    s = np.asarray(series, dtype=float) - np.mean(series)
    t = np.asarray(t, dtype=float)
    up = np.flatnonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))
    if up.size < 2:
        raise InsufficientDataError(
            f"{up.size} upward crossings; need at least 2")
    tc = t[up] + (t[up + 1] - t[up]) * (-s[up]) / (s[up + 1] - s[up])
    periods = np.diff(tc)
    return float(np.mean(periods)), float(np.std(periods))


def dominant_frequencies(t: np.ndarray, series: np.ndarray,
                         count: int = 2) -> np.ndarray:
    """Strongest discrete-spectrum angular frequencies of a uniform series."""
    s = np.asarray(series, dtype=float) - np.mean(series)
    dt = t[1] - t[0]
    amp = np.abs(np.fft.rfft(s * np.hanning(s.size)))
    freq = 2.0 * math.pi * np.fft.rfftfreq(s.size, dt)
    order = np.argsort(amp)[::-1]
    peaks = []
    for k in order:
        if k == 0:
            continue
        if all(abs(freq[k] - pk) > 8.0 * (freq[1] - freq[0]) for pk in peaks):
            peaks.append(freq[k])
        if len(peaks) == count:
            break
    return np.array(sorted(peaks))
