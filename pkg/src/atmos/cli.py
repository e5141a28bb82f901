"""Command-line interface.

Subcommands: equilibrium, spectrum, oracle, operator-dump, simulate,
sweep, converge, selftest.  Exit code 0 iff every requested check passed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .bessel import bessel_zero
from .chart import make_chart
from .dynamics import (LinearModeSolution, euler_reconstruct,
                       nonlinear_simulate, period_measure,
                       vacuum_exponent_fit)
from .experiments import (RunConfig, emit_plots, emit_report, load_config,
                          run_convergence_study, run_energy_check,
                          run_epsilon_sweep)
from .grid import grid_for_params, make_grid
from .operators import build_L_coeffs, lform_coeffs_r, lin_operator_rform
from .params import (equilibrium_density, equilibrium_pressure, make_params,
                     total_mass)
from .spectral import collocation_spectrum, shoot_eigen, shooting_window


def _write_csv(path, header, rows, preamble=None):
    with open(path, "w") as fh:
        if preamble:
            fh.write(preamble + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating))
                              else str(v) for v in row) + "\n")
    return path


def cmd_equilibrium(args) -> int:
    p = make_params(args.gamma, args.R)
    ch = make_chart(p)
    M = total_mass(p)
    r = np.linspace(1.0, p.R, args.samples)
    z, xi, x = ch.forward(r)
    rho = equilibrium_density(p, r)
    pres = equilibrium_pressure(p, r)
    pre = f"# gamma={p.gamma!r},N={p.N!r},R={p.R!r},M={M!r}"
    _write_csv(args.out, ["r", "z", "xi", "x", "rho_bar", "P_bar"],
               zip(r, z, xi, x, rho, pres), preamble=pre)
    print(f"wrote {args.out} (M = {M:.10g})")
    return 0


def cmd_operator_dump(args) -> int:
    p = make_params(args.gamma, args.R)
    co = build_L_coeffs(p)
    g = grid_for_params(p, args.n)
    _write_csv(args.out, ["x", "L1", "L0", "weight"],
               zip(g.x, co.L1(g.x), co.L0(g.x), g.weights))
    print(f"wrote {args.out}")
    return 0


def cmd_spectrum(args) -> int:
    p = make_params(args.gamma, args.R)
    co = build_L_coeffs(p)
    g = grid_for_params(p, args.n)
    rows = []
    ok = True
    modes = collocation_spectrum(co, g, args.nmodes,
                                 order=2 if args.order == 2 else 4)
    lams = np.array([m.lam for m in modes])
    if args.method in ("shooting", "both"):
        for i, m in enumerate(modes):
            sh = shoot_eigen(co, shooting_window(lams, i), i + 1)
            delta = abs(sh.lam - m.lam) / abs(sh.lam)
            lam_out = sh.lam if args.method == "shooting" else m.lam
            rows.append((i + 1, lam_out, m.phi0, m.zeros, delta))
            if args.method == "both" and delta > 1e-6:
                ok = False
    else:
        rows = [(m.index, m.lam, m.phi0, m.zeros, 0.0) for m in modes]
    _write_csv(args.out, ["n", "lambda", "phi0", "zeros", "method_delta"],
               rows)
    for row in rows:
        print(f"n={row[0]}  lambda={row[1]:.12g}  zeros={row[3]}  "
              f"method_delta={row[4]:.3e}")
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    if args.oracle_cmd == "bessel-zeros":
        for n in range(1, args.count + 1):
            print(f"{n} {bessel_zero(args.nu, n):.12f}")
        return 0
    print("unknown oracle", file=sys.stderr)
    return 2


def cmd_simulate(args) -> int:
    p = make_params(args.gamma, args.R)
    co = build_L_coeffs(p)
    g = grid_for_params(p, args.n)
    modes = collocation_spectrum(co, g, args.mode, order=2)
    mode = modes[args.mode - 1]
    msol = LinearModeSolution.single(mode)
    T = args.T if args.T > 0 else 5.5 * 2 * math.pi / math.sqrt(mode.lam)
    dt = "auto" if args.dt in (None, "auto") else float(args.dt)
    tr = nonlinear_simulate(p, co, msol, args.eps, T, g, dt=dt)
    RF = p.R * (1.0 + tr.boundary)
    _write_csv(args.out + "_series.csv", ["t", "y_boundary", "R_F", "E"],
               zip(tr.t_series, tr.boundary, RF, tr.energy))
    snap_rows = []
    euler_rows = []
    for st in tr.states:
        snap_rows.extend(zip([st.t] * g.n, g.x, st.y, st.yt))
        fld = euler_reconstruct(p, g, st)
        euler_rows.extend(zip([st.t] * fld.r.size, fld.r, fld.rho, fld.u))
    _write_csv(args.out + "_snapshots.csv", ["t", "x", "y", "yt"], snap_rows)
    _write_csv(args.out + "_euler.csv", ["t", "r", "rho", "u"], euler_rows)
    per, jitter = period_measure(tr.t_series, tr.boundary)
    fld = euler_reconstruct(p, g, tr.states[len(tr.states) // 3])
    expo = vacuum_exponent_fit(fld, p)
    rep = dict(tr.report)
    rep.update({
        "measured_period": per,
        "period_jitter": jitter,
        "linear_period": 2 * math.pi / math.sqrt(mode.lam),
        "vacuum_exponent_fit": expo,
        "vacuum_exponent_target": 1.0 / (p.gamma - 1.0),
        "lambda_mode": mode.lam,
    })
    with open(args.out + "_report.json", "w") as fh:
        json.dump(rep, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"period {per:.6f} (linear {rep['linear_period']:.6f}), "
          f"exponent {expo:.4f}, sup|w| {rep['sup_w']:.3e}")
    return 0


def _cfg_from_args(args) -> RunConfig:
    overrides = {}
    for key in ("gamma", "R", "T", "cfl", "outdir", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            overrides[key] = v
    if getattr(args, "eps", None):
        overrides["eps_list"] = tuple(float(v) for v in args.eps.split(","))
    if getattr(args, "grids", None):
        overrides["grid_sizes"] = tuple(
            int(v) for v in args.grids.split(","))
    if getattr(args, "mode", None):
        overrides["mode_indices"] = (args.mode,)
    if args.config:
        return load_config(args.config, overrides)
    base = RunConfig()
    kw = {**{k: getattr(base, k) for k in base.__dataclass_fields__},
          **overrides}
    return RunConfig(**kw)


def _finish_report(report, args) -> int:
    os.makedirs(args.outdir or ".", exist_ok=True)
    path = os.path.join(args.outdir or ".", report.title + ".json")
    emit_report(report, path, "json")
    if getattr(args, "plots", False):
        emit_plots(report, args.outdir or ".")
    for e in report.entries:
        status = "PASS" if e.passed else ("info" if e.tol_kind == "info"
                                          else "FAIL")
        print(f"[{status}] {e.name} = {e.value:.6g}")
    print(f"report: {path}")
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    return _finish_report(run_epsilon_sweep(_cfg_from_args(args)), args)


def cmd_converge(args) -> int:
    cfg = _cfg_from_args(args)
    rep = run_convergence_study(cfg)
    energy_rep = run_energy_check(cfg)
    rep.entries.extend(energy_rep.entries)
    rep.data.update({"energy_" + k: v for k, v in energy_rep.data.items()})
    return _finish_report(rep, args)


def cmd_selftest(args) -> int:
    """Identity suites with printed residuals."""
    rng = np.random.default_rng(11)
    failures = 0
    if args.suite in ("nonlinearity", "all"):
        from .nonlinear import (a21_closed_form, a21_from_partials, g_I,
                                g_II, g_func, g_partials, h_func,
                                lemma_bracket)
        p = make_params(1.5, 2.0)
        worst = 0.0
        for _ in range(100):
            r = rng.uniform(1.0, p.R * 0.999)
            y = rng.uniform(-0.25, 0.25)
            yp = rng.uniform(-0.35, 0.35) / r
            ypp = rng.uniform(-2.0, 2.0)
            v = r * yp
            if abs(y) + abs(v) >= 0.9:
                continue
            vp = yp + r * ypp
            G = g_func(p.gamma, y, v)
            Gy, Gv = g_partials(p.gamma, y, v)
            s = (p.R - r) / (r * p.R)
            g0 = 1.0 / (p.gamma - 1.0)
            rhs = (1 + y) ** 2 * ((g0 / r ** 3) * G
                                  - (s / p.gamma / r) * (Gy * yp + Gv * vp)) \
                - h_func(y) * g0 / r ** 3
            lhs = (1 + g_I(p.gamma, y, v)) \
                * lin_operator_rform(p, r, y, yp, ypp) + g_II(p, r, y, v)
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-6))
        print(f"full-form vs linearized-form identity residual: {worst:.3e}")
        failures += worst > 1e-10
        worst_a = 0.0
        worst_u = 0.0
        for _ in range(100):
            r = rng.uniform(1.0, p.R * 0.999)
            Y, dY, d2Y = rng.uniform(-1, 1), rng.uniform(-1, 1), \
                rng.uniform(-3, 3)
            c1 = a21_closed_form(p, r, Y, dY, d2Y, 1e-2)
            c2 = a21_from_partials(p, r, Y, dY, d2Y, 1e-2)
            worst_a = max(worst_a, abs(c1 - c2) / max(abs(c1), 1e-8))
            worst_u = max(worst_u, abs(lemma_bracket(p, r, Y, dY, 1e-2)))
        print(f"a21 closed-form vs partials: {worst_a:.3e}")
        print(f"vanishing bracket residual:  {worst_u:.3e}")
        failures += worst_a > 1e-6
        failures += worst_u > 1e-9
    if args.suite == "all":
        from .bessel import bessel_j
        d = abs(bessel_j(0.5, 3.0)
                - math.sqrt(2 / (math.pi * 3.0)) * math.sin(3.0))
        print(f"half-order Bessel closed form:  {d:.3e}")
        failures += d > 1e-12
        p = make_params(1.5, 2.0)
        ch = make_chart(p)
        rr = np.linspace(1.0, 2.0, 200)
        rt = max(abs(ch.r_of_x(ch.x_of_r(r)) - r) / r for r in rr)
        print(f"chart round-trip:               {rt:.3e}")
        failures += rt > 1e-12
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="atmos",
        description="vacuum-boundary atmosphere oscillations: equilibria, "
                    "spectra, free-boundary dynamics")
    sub = ap.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("equilibrium", help="tabulate the static atmosphere")
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--R", type=float, required=True)
    q.add_argument("--samples", type=int, default=200)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=cmd_equilibrium)

    q = sub.add_parser("operator-dump", help="tabulate L1, L0 and weights")
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--R", type=float, required=True)
    q.add_argument("--n", type=int, default=512)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=cmd_operator_dump)

    q = sub.add_parser("spectrum", help="eigenvalues of the linearized "
                                        "operator")
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--R", type=float, required=True)
    q.add_argument("--nmodes", type=int, default=5)
    q.add_argument("--method", choices=["shooting", "collocation", "both"],
                   default="both")
    q.add_argument("--n", type=int, default=1024)
    q.add_argument("--order", type=int, default=4, choices=[2, 4])
    q.add_argument("--out", required=True)
    q.set_defaults(fn=cmd_spectrum)

    q = sub.add_parser("oracle", help="exact reference values")
    qs = q.add_subparsers(dest="oracle_cmd", required=True)
    qb = qs.add_parser("bessel-zeros")
    qb.add_argument("--nu", type=float, required=True)
    qb.add_argument("--count", type=int, default=5)
    q.set_defaults(fn=cmd_oracle)

    q = sub.add_parser("simulate", help="nonlinear free-boundary run")
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--R", type=float, required=True)
    q.add_argument("--mode", type=int, default=1)
    q.add_argument("--eps", type=float, default=1e-3)
    q.add_argument("--T", type=float, default=0.0)
    q.add_argument("--n", type=int, default=512)
    q.add_argument("--dt", default="auto")
    q.add_argument("--out", required=True, help="output file prefix")
    q.set_defaults(fn=cmd_simulate)

    for name, fn, hlp in [("sweep", cmd_sweep, "epsilon halving sweep"),
                          ("converge", cmd_converge,
                           "convergence + energy studies")]:
        q = sub.add_parser(name, help=hlp)
        q.add_argument("--config", default=None)
        q.add_argument("--gamma", type=float, default=None)
        q.add_argument("--R", type=float, default=None)
        q.add_argument("--eps", default=None,
                       help="comma list, strictly decreasing")
        q.add_argument("--grids", default=None, help="comma list, powers of 2")
        q.add_argument("--mode", type=int, default=None)
        q.add_argument("--T", type=float, default=None)
        q.add_argument("--cfl", type=float, default=None)
        q.add_argument("--seed", type=int, default=None)
        q.add_argument("--outdir", default=".")
        q.add_argument("--plots", action="store_true")
        q.set_defaults(fn=fn)

    q = sub.add_parser("selftest", help="identity suites with residuals")
    q.add_argument("suite", nargs="?", default="all",
                   choices=["all", "nonlinearity"])
    q.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
