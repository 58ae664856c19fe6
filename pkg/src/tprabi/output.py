"""Ensemble CSV files and JSON metadata sidecars.

One CSV per ensemble: column ``t`` then mean/stderr pairs per observable
(including fidelity), full float precision (repr), so identical inputs give
byte-identical files. The sidecar echoes everything needed to reproduce the
CSV: configuration, seeds, integrator settings, diagnostics, code version.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .evolve import OBSERVABLE_NAMES, EnsembleResult, RunSpec, _observables, \
    reference_states
from .models import SchemeConfig

SIDECAR_SCHEMA_VERSION = 1

CSV_COLUMNS = ["t"] + [f"{kind}_{name}"
                       for name in OBSERVABLE_NAMES
                       for kind in ("mean", "stderr")]


def write_ensemble_csv(result: EnsembleResult, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i, t in enumerate(result.t_grid):
            row = [repr(float(t))]
            for name in OBSERVABLE_NAMES:
                row.append(repr(float(result.means[name][i])))
                row.append(repr(float(result.stderrs[name][i])))
            fh.write(",".join(row) + "\n")


def ideal_result(run: RunSpec) -> EnsembleResult:
    """Observables of the ideal-model reference as a zero-error 'ensemble'."""
    ref = reference_states(run.scheme, run.scheme.target, run.psi0,
                           run.t_grid, run.space)
    obs = _observables(run.scheme, ref[:, :, None], ref)
    return EnsembleResult(
        t_grid=run.t_grid.copy(),
        means={name: obs[name][0] for name in OBSERVABLE_NAMES},
        stderrs={name: np.zeros(len(run.t_grid)) for name in OBSERVABLE_NAMES},
        n_traj=1, master_seed=0, norm_drift_max=0.0, top_population_max=0.0)


def run_spec_dict(run: RunSpec) -> dict:
    """JSON-serializable echo of a RunSpec."""
    scheme: SchemeConfig = run.scheme
    return {
        "scheme": scheme.scheme,
        "target": {
            "omega_qubit": scheme.target.omega_qubit,
            "omega_boson": scheme.target.omega_boson,
            "coupling": scheme.target.coupling,
            "basis": scheme.target.basis,
        },
        "delta_r": scheme.delta_r,
        "delta_b": scheme.delta_b,
        "omega_dd": scheme.omega_dd,
        "omega_carrier": scheme.omega_carrier,
        "ion": {
            "qubit_splitting": run.ion.qubit_splitting,
            "trap_freq": run.ion.trap_freq,
            "lasers": [asdict(laser) for laser in run.ion.lasers],
            "noise": (None if run.ion.noise is None
                      else {"tau": run.ion.noise.tau, "c": run.ion.noise.c}),
        },
        "noise_on": run.noise_on,
        "n_trunc": run.space.n_trunc,
        "psi0": [[float(a.real), float(a.imag)] for a in run.psi0],
        "t_total": float(run.t_grid[-1] - run.t_grid[0]),
        "n_out": len(run.t_grid) - 1,
        "integrator": {
            "dt": run.settings.dt,
            "method": run.settings.method,
            "max_top_level_population": run.settings.max_top_level_population,
        },
    }


def write_sidecar(path: str | Path, result: EnsembleResult, run: RunSpec,
                  kind: str = "ensemble", csv_name: str = "",
                  extra: dict | None = None) -> None:
    meta = {
        "schema_version": SIDECAR_SCHEMA_VERSION,
        "code_version": __version__,
        "kind": kind,
        "csv": csv_name,
        "columns": CSV_COLUMNS,
        "config": run_spec_dict(run),
        "n_traj": result.n_traj,
        "master_seed": result.master_seed,
        "norm_drift_max": result.norm_drift_max,
        "top_population_max": result.top_population_max,
        "wall_time_s": result.wall_time_s,
    }
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_outputs(outdir: str | Path, stem: str, result: EnsembleResult,
                  run: RunSpec, kind: str = "ensemble",
                  extra: dict | None = None) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{stem}.csv"
    json_path = outdir / f"{stem}.json"
    write_ensemble_csv(result, csv_path)
    write_sidecar(json_path, result, run, kind=kind, csv_name=csv_path.name,
                  extra=extra)
    return csv_path, json_path
