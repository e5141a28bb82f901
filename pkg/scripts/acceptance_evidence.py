#!/usr/bin/env python3
"""Produce the acceptance evidence as report files and plots.

Runs the epsilon sweep, the convergence/energy studies and a spectrum
survey for the workhorse parameters, writing JSON reports and SVG plots
into --outdir.  Exit code 0 iff every checked entry passed.

The same measurements run under pytest (tests/test_acceptance.py); this
script exists to regenerate the artifacts standalone.
"""

import argparse
import math
import os
import sys

import numpy as np

from atmos.experiments import (RunConfig, RunReport, emit_plots, emit_report,
                               run_convergence_study, run_energy_check,
                               run_epsilon_sweep)
from atmos.grid import grid_for_params, make_grid
from atmos.operators import build_L_coeffs, pure_laplacian_coeffs
from atmos.params import make_params
from atmos.spectral import collocation_spectrum


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="acceptance_out")
    ap.add_argument("--gamma", type=float, default=1.5)
    ap.add_argument("--R", type=float, default=2.0)
    args = ap.parse_args(argv)
    os.makedirs(args.outdir, exist_ok=True)
    ok = True

    cfg = RunConfig(gamma=args.gamma, R=args.R,
                    eps_list=(4e-3, 2e-3, 1e-3), grid_sizes=(128, 256),
                    periods=3.0)
    sweep = run_epsilon_sweep(cfg)
    ok &= sweep.passed
    emit_report(sweep, os.path.join(args.outdir, "sweep.json"))
    emit_plots(sweep, args.outdir)
    print(f"epsilon sweep: ratios {sweep.data['ratios']}, "
          f"passed={sweep.passed}")

    conv_cfg = RunConfig(gamma=args.gamma, R=args.R,
                         grid_sizes=(64, 128, 256))
    conv = run_convergence_study(conv_cfg)
    ok &= conv.passed
    emit_report(conv, os.path.join(args.outdir, "convergence.json"))
    for e in conv.entries:
        print(f"  {e.name}: {e.value:.4g} ({'ok' if e.passed else 'FAIL'})")

    en = run_energy_check(conv_cfg)
    ok &= en.passed
    emit_report(en, os.path.join(args.outdir, "energy.json"))
    print(f"energy inequality constants: {en.data['energy_constants']}")

    # spectrum survey: full operator plus the Bessel reference curve
    p = make_params(args.gamma, args.R)
    co = build_L_coeffs(p)
    modes = collocation_spectrum(co, grid_for_params(p, 1024), 8, order=4)
    spec = RunReport(title="spectrum-survey",
                     config={"gamma": args.gamma, "R": args.R})
    spec.data["spectrum"] = [m.lam for m in modes]
    for m in modes:
        spec.add(f"lambda_{m.index}", m.lam, tol=0.0, tol_kind="info",
                 passed=True)
    emit_report(spec, os.path.join(args.outdir, "spectrum.json"))
    emit_plots(spec, args.outdir)
    print("lambda_1..8:", ", ".join(f"{m.lam:.4f}" for m in modes))

    # pure-operator sanity row: lowest eigenvalue against the exact zero
    from atmos.bessel import bessel_oracle_spectrum
    for N in (4.0, 6.0, 8.0):
        g = make_grid(2048, N, 1.0)
        lam = collocation_spectrum(pure_laplacian_coeffs(N, 1.0), g, 1,
                                   order=4)[0].lam
        exact = bessel_oracle_spectrum(N, 1)[0]
        rel = abs(lam - exact) / exact
        ok &= rel < 1e-8
        print(f"bare operator N={N:g}: lambda_1 rel error {rel:.2e}")

    print("all passed" if ok else "FAILURES present")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
