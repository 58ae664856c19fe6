"""Experiment presets: three coupling scenarios x two schemes x two scales.

Scenarios (g/omega_b, Omega_q/omega_b, initial state):
    fig1ab: (0.1, 3, |down>_perp |0>)
    fig1cd: (0.2, 2, |up>_par  |2>)
    fig1ef: (0.3, 1, |down>_par |2>)
run for 5 ms unprotected and 10 ms protected (the protected coupling is
halved, so doubling the time reproduces the same dimensionless dynamics).

Scales:
    paper: the reference optical-ion parameter set (nu = 2pi x 2 MHz,
           Omega = 2pi x 100 kHz, eta = 0.06, tau = 100 us, T2 = 3 ms,
           Omega_DD = 2pi x 20 kHz) -> g_U = 2pi x 90 Hz. Full-drive runs
           need ~1e6 integration steps; marked long-running.
    desk:  a cheaper hierarchy for CI: identical noise and decoupling
           numbers (tau = 100 us, T2 = 3 ms, Omega_DD = 2pi x 20 kHz) but
           nu = 2pi x 600 kHz with eta = 0.1 and Omega = 2pi x 40 kHz
           -> g_U = 2pi x 100 Hz at a third of the integration cost. All
           validity inequalities (Omega << nu, |delta| << nu,
           f_cr < Omega_DD << nu) hold; Omega/nu stays small enough that
           the off-resonant light shifts (~ Omega^2 eta^2 / nu per phonon)
           do not swamp the protected scheme's fidelity budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .evolve import (IntegratorSettings, RunSpec, build_output_grid,
                     full_drive_fmax, max_stable_dt)
from .hilbert import FockSpace, fock_state, joint_state
from .models import (PROTECTED, UNPROTECTED, IonBase, TwoPhotonRabiParams,
                     protected_config, unprotected_config)
from .noise import OUParams

TWO_PI = 2.0 * math.pi

#: Default Fock truncation for initial states with at most two phonons.
DEFAULT_N_TRUNC = 40

#: Default number of output intervals per run.
DEFAULT_N_OUT = 200


@dataclass(frozen=True)
class ScaleParams:
    name: str
    qubit_splitting: float
    trap_freq: float
    rabi: float
    eta: float
    eta_c: float
    tau: float
    t2: float
    omega_dd: float
    t_unprotected: float
    t_protected: float

    @property
    def coupling_unprotected(self) -> float:
        return self.eta**2 * self.rabi / 4.0


SCALES = {
    "paper": ScaleParams(
        name="paper", qubit_splitting=TWO_PI * 4e14, trap_freq=TWO_PI * 2e6,
        rabi=TWO_PI * 100e3, eta=0.06, eta_c=0.01, tau=100e-6, t2=3e-3,
        omega_dd=TWO_PI * 20e3, t_unprotected=5e-3, t_protected=10e-3),
    "desk": ScaleParams(
        name="desk", qubit_splitting=TWO_PI * 4e14, trap_freq=TWO_PI * 600e3,
        rabi=TWO_PI * 40e3, eta=0.1, eta_c=0.01, tau=100e-6, t2=3e-3,
        omega_dd=TWO_PI * 20e3, t_unprotected=5e-3, t_protected=10e-3),
}

#: scenario -> (g / omega_b, Omega_q / omega_b, initial-state label)
SCENARIOS = {
    "fig1ab": (0.1, 3.0, "down_perp|0"),
    "fig1cd": (0.2, 2.0, "up_par|2"),
    "fig1ef": (0.3, 1.0, "down_par|2"),
}


@dataclass(frozen=True)
class Preset:
    name: str
    scenario: str
    scheme: str
    scale: str
    params: TwoPhotonRabiParams
    psi0_label: str
    t_total: float
    noise_on: bool = True


def _target(scenario: str, scale: ScaleParams, scheme: str) -> TwoPhotonRabiParams:
    g_ratio, omega_ratio, _ = SCENARIOS[scenario]
    coupling = scale.coupling_unprotected
    if scheme == PROTECTED:
        coupling /= 2.0
    omega_boson = coupling / g_ratio
    return TwoPhotonRabiParams(omega_ratio * omega_boson, omega_boson,
                               coupling, basis=scheme)


def all_presets() -> dict[str, Preset]:
    presets = {}
    for scale_name, scale in SCALES.items():
        for scenario, (_, _, psi0_label) in SCENARIOS.items():
            for scheme, tag, t_total in (
                    (UNPROTECTED, "u", scale.t_unprotected),
                    (PROTECTED, "p", scale.t_protected)):
                name = f"{scenario}-{tag}-{scale_name}"
                presets[name] = Preset(
                    name=name, scenario=scenario, scheme=scheme,
                    scale=scale_name, params=_target(scenario, scale, scheme),
                    psi0_label=psi0_label, t_total=t_total)
    return presets


def scenario_pairs() -> dict[str, tuple[str, str]]:
    """Pair names like 'fig1ef-desk' -> (unprotected, protected) preset names."""
    return {f"{scenario}-{scale}": (f"{scenario}-u-{scale}",
                                    f"{scenario}-p-{scale}")
            for scale in SCALES for scenario in SCENARIOS}


def initial_state(label: str, basis: str, space: FockSpace) -> np.ndarray:
    """Joint state from a label like 'down_par|2'.

    Spin labels name eigenstates of sigma_par or sigma_perp in the scheme's
    basis (unprotected: par = sigma_z, perp = sigma_x; protected: swapped).
    """
    try:
        spin_label, fock_label = label.split("|")
        n_phonon = int(fock_label)
    except ValueError as err:
        raise ConfigurationError(f"bad initial-state label {label!r}") from err
    z_up, z_dn = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    x_up, x_dn = np.array([1.0, 1.0]) / math.sqrt(2), np.array([1.0, -1.0]) / math.sqrt(2)
    par_is_z = basis == UNPROTECTED
    table = {
        "up_par": z_up if par_is_z else x_up,
        "down_par": z_dn if par_is_z else x_dn,
        "up_perp": x_up if par_is_z else z_up,
        "down_perp": x_dn if par_is_z else z_dn,
    }
    if spin_label not in table:
        raise ConfigurationError(f"unknown spin label {spin_label!r}")
    return joint_state(table[spin_label], fock_state(space, n_phonon))


def recommended_truncation(scheme: str, noise_on: bool) -> tuple[int, float]:
    """(n_trunc, top-level tolerance) for a scheme/noise combination.

    Dephasing noise drives slow two-phonon ladder diffusion whose high-n
    tail is fat but fidelity-irrelevant; noisy unprotected runs therefore
    use a taller ladder and a looser top-level guard. Decoupling suppresses
    the diffusion, so protected runs keep the default cutoff.
    """
    if not noise_on:
        return DEFAULT_N_TRUNC, 1e-6
    if scheme == UNPROTECTED:
        return 56, 1e-3
    return DEFAULT_N_TRUNC, 1e-4


def build_run(preset: Preset, n_trunc: int = DEFAULT_N_TRUNC,
              dt_max: float | None = None, n_out: int = DEFAULT_N_OUT,
              noise_on: bool | None = None,
              max_top_level_population: float = 1e-6) -> RunSpec:
    """Assemble a RunSpec (lasers, noise, grid, integrator) from a preset."""
    scale = SCALES[preset.scale]
    noise = OUParams.from_t2(scale.t2, scale.tau)
    base = IonBase(scale.qubit_splitting, scale.trap_freq, noise)
    if preset.scheme == UNPROTECTED:
        scheme, ion = unprotected_config(preset.params, scale.eta, base,
                                         rabi=scale.rabi)
    else:
        scheme, ion = protected_config(preset.params, scale.eta,
                                       scale.omega_dd, base, rabi=scale.rabi,
                                       eta_c=scale.eta_c)
    cap = max_stable_dt(full_drive_fmax(ion, scheme))
    if dt_max is not None:
        cap = min(cap, dt_max)
    t_grid, dt = build_output_grid(preset.t_total, n_out, cap)
    space = FockSpace(n_trunc)
    return RunSpec(
        scheme=scheme, ion=ion, space=space,
        settings=IntegratorSettings(
            dt=dt, max_top_level_population=max_top_level_population),
        psi0=initial_state(preset.psi0_label, preset.scheme, space),
        t_grid=t_grid,
        noise_on=preset.noise_on if noise_on is None else noise_on)


def build_preset_run(preset: Preset, n_trunc: int | None = None,
                     dt_max: float | None = None, n_out: int = DEFAULT_N_OUT,
                     noise_on: bool | None = None) -> RunSpec:
    """build_run with the recommended truncation policy applied."""
    on = preset.noise_on if noise_on is None else noise_on
    rec_n, rec_tol = recommended_truncation(preset.scheme, on)
    return build_run(preset, n_trunc=n_trunc if n_trunc is not None else rec_n,
                     dt_max=dt_max, n_out=n_out, noise_on=on,
                     max_top_level_population=rec_tol)
