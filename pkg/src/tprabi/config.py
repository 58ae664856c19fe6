"""YAML run-configuration files.

Schema (documented in docs/config_schema.md, example in configs/):

    label: my-run                 # output file stem
    scheme: unprotected           # unprotected | protected
    target:                       # simulated model parameters, rad/s
      omega_qubit: ...
      omega_boson: ...
      coupling: ...
    ion:
      qubit_splitting: ...        # rad/s
      trap_freq: ...              # rad/s
      lamb_dicke: 0.1
      rabi: null                  # rad/s; solved from coupling if omitted
      omega_dd: ...               # rad/s, protected only
      carrier_lamb_dicke: 0.01    # protected only
    noise:
      enabled: true
      tau: 1.0e-4                 # s
      t2: 3.0e-3                  # s; exactly one of t2 / c
      c: null                     # rad^2 s^-3
    initial_state: down_par|2
    evolution:
      t_total: 5.0e-3             # s
      n_out: 200
      n_trunc: 40
      dt_max: null                # s; defaults to the 1/(50 f_max) cap
      max_top_level_population: 1.0e-6
    ensemble:
      n_traj: 100
      master_seed: 1
      threads: null
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .evolve import (IntegratorSettings, RunSpec, build_output_grid,
                     full_drive_fmax, max_stable_dt)
from .hilbert import FockSpace
from .models import (PROTECTED, UNPROTECTED, IonBase, TwoPhotonRabiParams,
                     protected_config, unprotected_config)
from .noise import OUParams
from .presets import initial_state
from . import presets


@dataclass
class LoadedConfig:
    label: str
    run: RunSpec
    n_traj: int
    master_seed: int
    threads: int | None
    raw: dict


def _section(data: dict, name: str, required: bool = True) -> dict:
    value = data.get(name, {} if not required else None)
    if value is None:
        raise ConfigurationError(f"config is missing the '{name}' section")
    if not isinstance(value, dict):
        raise ConfigurationError(f"config section '{name}' must be a mapping")
    return value


def _get(section: dict, key: str, default=None, required: bool = False):
    if required and key not in section:
        raise ConfigurationError(f"config key '{key}' is required")
    return section.get(key, default)


def load_config(path: str | Path) -> LoadedConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} is not a mapping")

    scheme_name = _get(data, "scheme", required=True)
    if scheme_name not in (UNPROTECTED, PROTECTED):
        raise ConfigurationError(
            f"scheme must be '{UNPROTECTED}' or '{PROTECTED}', "
            f"got {scheme_name!r}")

    tgt = _section(data, "target")
    target = TwoPhotonRabiParams(
        omega_qubit=float(_get(tgt, "omega_qubit", required=True)),
        omega_boson=float(_get(tgt, "omega_boson", required=True)),
        coupling=float(_get(tgt, "coupling", required=True)),
        basis=scheme_name)

    nz = _section(data, "noise", required=False)
    noise = None
    if nz and _get(nz, "enabled", True):
        tau = float(_get(nz, "tau", required=True))
        t2, c = _get(nz, "t2"), _get(nz, "c")
        if (t2 is None) == (c is None):
            raise ConfigurationError(
                "noise section needs exactly one of 't2' or 'c'")
        noise = (OUParams.from_t2(float(t2), tau) if t2 is not None
                 else OUParams(tau=tau, c=float(c)))

    ion_sec = _section(data, "ion")
    base = IonBase(
        qubit_splitting=float(_get(ion_sec, "qubit_splitting", required=True)),
        trap_freq=float(_get(ion_sec, "trap_freq", required=True)),
        noise=noise)
    eta = float(_get(ion_sec, "lamb_dicke", required=True))
    rabi = _get(ion_sec, "rabi")
    rabi = float(rabi) if rabi is not None else None
    if scheme_name == UNPROTECTED:
        scheme, ion = unprotected_config(target, eta, base, rabi=rabi)
    else:
        omega_dd = _get(ion_sec, "omega_dd", required=True)
        scheme, ion = protected_config(
            target, eta, float(omega_dd), base, rabi=rabi,
            eta_c=float(_get(ion_sec, "carrier_lamb_dicke", 0.01)))

    ev = _section(data, "evolution")
    t_total = float(_get(ev, "t_total", required=True))
    n_out = int(_get(ev, "n_out", presets.DEFAULT_N_OUT))
    n_trunc = int(_get(ev, "n_trunc", presets.DEFAULT_N_TRUNC))
    cap = max_stable_dt(full_drive_fmax(ion, scheme))
    dt_max = _get(ev, "dt_max")
    if dt_max is not None:
        cap = min(cap, float(dt_max))
    t_grid, dt = build_output_grid(t_total, n_out, cap)
    space = FockSpace(n_trunc)
    run = RunSpec(
        scheme=scheme, ion=ion, space=space,
        settings=IntegratorSettings(
            dt=dt, max_top_level_population=float(
                _get(ev, "max_top_level_population", 1e-6))),
        psi0=initial_state(_get(data, "initial_state", required=True),
                           scheme_name, space),
        t_grid=t_grid,
        noise_on=noise is not None)

    ens = _section(data, "ensemble", required=False)
    threads = _get(ens, "threads")
    return LoadedConfig(
        label=str(_get(data, "label", Path(path).stem)),
        run=run,
        n_traj=int(_get(ens, "n_traj", 100)),
        master_seed=int(_get(ens, "master_seed", 1)),
        threads=int(threads) if threads is not None else None,
        raw=data)
