"""Command-line interface.

Subcommands:
    run           evolve a preset (or config file) ensemble, write CSV + JSON
    noise-check   statistical validation of the noise generator vs analytics
    spectrum      ground-state convergence scan across the collapse coupling
    list-presets  show available presets
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .config import load_config
from .errors import (CalibrationInfeasibleError, ConfigurationError,
                     InvalidScanError, TruncationOverflowError)
from .evolve import ensemble
from .noise import (OUParams, coherence_curve, generate_path,
                    trajectory_seed, write_path_csv)
from .output import ideal_result, write_outputs
from .presets import SCENARIOS, all_presets, build_preset_run, \
    scenario_pairs
from .spectrum import collapse_scan, write_scan_csv


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", help="preset name or scenario pair "
                     "(see list-presets), e.g. fig1ef-desk")
    sub.add_argument("--config", help="YAML run configuration file")
    sub.add_argument("--n-traj", type=int, default=None)
    sub.add_argument("--master-seed", type=int, default=None)
    sub.add_argument("--dt", type=float, default=None,
                     help="cap on the integrator step (s); default 1/(50 f_max)")
    sub.add_argument("--n-trunc", type=int, default=None)
    sub.add_argument("--noise", choices=["on", "off"], default=None)
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker processes (default: env TPRABI_THREADS or "
                     "available parallelism)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tprabi",
        description="Two-photon quantum Rabi model on a simulated trapped ion")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run an ensemble and write outputs")
    _add_run_flags(run)

    nc = subs.add_parser("noise-check",
                         help="validate OU noise statistics against analytics")
    nc.add_argument("--t2", type=float, default=3e-3)
    nc.add_argument("--tau", type=float, default=100e-6)
    nc.add_argument("--c", type=float, default=None,
                    help="diffusion constant; overrides --t2")
    nc.add_argument("--n-paths", type=int, default=10000)
    nc.add_argument("--duration", type=float, default=5e-3)
    nc.add_argument("--seed", type=int, default=1)
    nc.add_argument("--dump-path", default=None,
                    help="write one sample path as CSV (columns t, xi)")

    sp = subs.add_parser("spectrum", help="spectral-collapse truncation scan")
    sp.add_argument("--omega-qubit", type=float, default=1.0,
                    help="qubit splitting in units of the boson frequency")
    sp.add_argument("--g-grid", default="0.45,0.55",
                    help="comma-separated couplings in units of the boson "
                    "frequency; must span 0.5")
    sp.add_argument("--n-trunc-grid", default="40,80,120,160")
    sp.add_argument("--out", default="spectrum_scan.csv")

    subs.add_parser("list-presets", help="list preset names")
    return parser


def _resolve_runs(name: str) -> list[str]:
    pairs = scenario_pairs()
    if name in pairs:
        return list(pairs[name])
    if name in all_presets():
        return [name]
    raise ConfigurationError(
        f"unknown preset {name!r}; see `tprabi list-presets`")


def _cmd_run(args) -> int:
    if (args.preset is None) == (args.config is None):
        print("run: exactly one of --preset / --config is required",
              file=sys.stderr)
        return 2
    jobs = []
    if args.preset:
        presets = all_presets()
        for preset_name in _resolve_runs(args.preset):
            preset = presets[preset_name]
            noise_on = None if args.noise is None else args.noise == "on"
            run = build_preset_run(preset, n_trunc=args.n_trunc,
                                   dt_max=args.dt, noise_on=noise_on)
            jobs.append((preset_name, run,
                         args.n_traj if args.n_traj is not None else 100,
                         args.master_seed if args.master_seed is not None else 1,
                         {"preset": preset_name, "scale": preset.scale,
                          "scenario": preset.scenario,
                          "psi0_label": preset.psi0_label}))
    else:
        loaded = load_config(args.config)
        run = loaded.run
        if args.n_trunc is not None or args.dt is not None or args.noise:
            print("run: --n-trunc/--dt/--noise overrides apply to presets; "
                  "edit the config file instead", file=sys.stderr)
            return 2
        jobs.append((loaded.label, run,
                     args.n_traj if args.n_traj is not None else loaded.n_traj,
                     args.master_seed if args.master_seed is not None
                     else loaded.master_seed,
                     {"config_file": str(args.config)}))

    status = 0
    for stem, run, n_traj, master_seed, extra in jobs:
        try:
            result = ensemble(run, n_traj, master_seed, threads=args.threads)
        except TruncationOverflowError as err:
            print(f"{stem}: {err}", file=sys.stderr)
            return 1
        csv_path, _ = write_outputs(args.out, stem, result, run, extra=extra)
        print(f"{stem}: n_traj={n_traj} master_seed={master_seed} "
              f"final_fidelity={result.means['fidelity'][-1]:.6f} "
              f"-> {csv_path}")
        ideal = ideal_result(run)
        write_outputs(args.out, f"{stem}-ideal", ideal, run, kind="ideal",
                      extra=extra)
    return status


def _check(label: str, value: float, target: float, tol3: float) -> bool:
    ok = abs(value - target) <= tol3
    print(f"  [{'PASS' if ok else 'FAIL'}] {label}: value={value:.6g} "
          f"target={target:.6g} 3sigma={tol3:.3g}")
    return ok


def _cmd_noise_check(args) -> int:
    try:
        params = (OUParams(tau=args.tau, c=args.c) if args.c is not None
                  else OUParams.from_t2(args.t2, args.tau))
    except CalibrationInfeasibleError as err:
        print(f"noise-check: {err}", file=sys.stderr)
        return 1
    print(f"OU noise: tau={params.tau:g} s  c={params.c:.6g} rad^2/s^3  "
          f"t2={params.t2:.6g} s  f_cr={params.f_cr:.6g} Hz")
    dt = params.tau / 20.0
    n_steps = max(2, int(round(args.duration / dt)) + 1)
    t_grid = dt * np.arange(n_steps)
    paths = np.empty((args.n_paths, n_steps))
    for i in range(args.n_paths):
        paths[i] = generate_path(params, t_grid,
                                 trajectory_seed(args.seed, i)).xi
    if args.dump_path:
        with open(args.dump_path, "w") as fh:
            write_path_csv(generate_path(params, t_grid,
                                         trajectory_seed(args.seed, 0)), fh)
        print(f"sample path written to {args.dump_path}")

    n = args.n_paths
    var = params.stationary_variance
    ok = True
    sd = math.sqrt(var) if var else 0.0
    last = paths[:, -1]
    ok &= _check("stationary mean", float(last.mean()), 0.0,
                 3.0 * sd / math.sqrt(n))
    ok &= _check("stationary variance", float(last.var(ddof=1)), var,
                 3.0 * var * math.sqrt(2.0 / max(n - 1, 1)))
    i_ref = int(round(2 * params.tau / dt))
    for mult in (0, 1, 2, 5):
        lag = int(round(mult * params.tau / dt))
        if i_ref + lag >= n_steps:
            continue
        prod = paths[:, i_ref] * paths[:, i_ref + lag]
        target = var * math.exp(-lag * dt / params.tau)
        ok &= _check(f"autocovariance at {mult}*tau", float(prod.mean()),
                     target, 3.0 * float(prod.std(ddof=1)) / math.sqrt(n))
    xi_int = np.cumsum(paths, axis=1) * dt          # sample-and-hold integral
    for frac in (0.5, 1.0):
        if math.isfinite(params.t2):
            t_idx = min(n_steps - 1, int(round(frac * params.t2 / dt)))
        else:
            t_idx = n_steps - 1
        cosxi = np.cos(xi_int[:, t_idx])
        target = float(coherence_curve(t_idx * dt, params))
        ok &= _check(f"<sigma_x> decay at {frac:g}*t2", float(cosxi.mean()),
                     target, 3.0 * float(cosxi.std(ddof=1)) / math.sqrt(n))
    print("noise-check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_spectrum(args) -> int:
    try:
        g_grid = [float(x) for x in args.g_grid.split(",") if x.strip()]
        n_grid = [int(x) for x in args.n_trunc_grid.split(",") if x.strip()]
    except ValueError:
        print("spectrum: grids must be comma-separated numbers",
              file=sys.stderr)
        return 2
    try:
        scan = collapse_scan(args.omega_qubit, g_grid, n_grid)
    except InvalidScanError as err:
        print(f"spectrum: {err}", file=sys.stderr)
        return 2
    with open(args.out, "w") as fh:
        write_scan_csv(scan, fh)
    for i, g in enumerate(scan.g_over_omega):
        tag = ("converged" if scan.converged[i]
               else "divergent" if scan.divergent[i] else "inconclusive")
        print(f"  g/omega={g:g}: E0={scan.ground_energy[i, -1]:.8f} "
              f"gap={scan.convergence_gap[i]:.3e} [{tag}]")
    print(f"scan written to {args.out}")
    return 0


def _cmd_list_presets(_args) -> int:
    print("scenario pairs (run both schemes + ideal reference):")
    for pair in scenario_pairs():
        print(f"  {pair}")
    print("individual presets:")
    for name, preset in all_presets().items():
        g_ratio, omega_ratio, psi0 = SCENARIOS[preset.scenario]
        print(f"  {name}: g/omega_b={g_ratio} Omega_q/omega_b={omega_ratio} "
              f"psi0={psi0} t={preset.t_total * 1e3:g} ms scale={preset.scale}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "noise-check": _cmd_noise_check,
        "spectrum": _cmd_spectrum,
        "list-presets": _cmd_list_presets,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as err:
        print(f"{args.command}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
