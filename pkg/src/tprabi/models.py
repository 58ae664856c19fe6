"""Hamiltonian builders and parameter maps for the two-photon Rabi realization.

Three levels of description are built here, all as dense matrices on the
joint qubit (x) Fock space:

* the ideal two-photon Rabi model
      H = (Omega_q/2) sigma_par + omega_b a^dag a + g (a^2 + a^dag^2) sigma_perp
  with a scheme-dependent spin basis (unprotected: sigma_par = sigma_z,
  sigma_perp = sigma_x; protected: swapped);
* the second-sideband interaction Hamiltonian after the Lamb-Dicke and
  vibrational rotating-wave approximations (plus, for the protected scheme,
  the decoupling-drive rotating frame and its additional RWA);
* the full ion-laser Hamiltonian after the optical RWA only, in the
  interaction picture of (omega_I/2) sigma_z + nu a^dag a, with the
  displacement exponential exp(i eta_j (a e^{-i nu t} + a^dag e^{i nu t}))
  kept exact (no Lamb-Dicke expansion).

Parameter maps between laser settings and simulated model parameters:
unprotected  Omega_q = (delta_b + delta_r)/2,  omega_b = (delta_b - delta_r)/4,
             g = eta^2 Omega / 4;
protected    Omega_q = Omega_c - Omega_DD,     omega_b = (delta_b - delta_r)/4,
             g = eta^2 Omega / 8,
with sideband frequencies omega_{r,b} = omega_I -+ 2 nu - delta_{r,b} and,
for the protected scheme, delta_{r,b} = Omega_DD -+ 2 omega_b and carrier
intensity Omega_c = Omega_DD + Omega_q.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DecouplingInfeasibleError
from .hilbert import (FockSpace, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Z,
                      boson_operators, joint)
from .noise import OUParams

UNPROTECTED = "unprotected"
PROTECTED = "protected"

#: Laser intensity cap (rad/s) applied when the Rabi frequency is solved
#: from a requested coupling; matches the fixed intensity used throughout.
RABI_CAP = 2.0 * math.pi * 100e3

#: "Much smaller than" threshold for the soft validity checks.
VALIDITY_RATIO = 0.25


class ValidityWarning(UserWarning):
    """A soft validity inequality (e.g. Omega << nu) is not comfortably met."""


@dataclass(frozen=True)
class TwoPhotonRabiParams:
    """Simulated-model parameters (all rad/s) plus the spin-basis tag."""

    omega_qubit: float
    omega_boson: float
    coupling: float
    basis: str = UNPROTECTED

    def __post_init__(self):
        if self.basis not in (UNPROTECTED, PROTECTED):
            raise ConfigurationError(f"unknown spin basis tag {self.basis!r}")
        if self.coupling < 0:
            raise ConfigurationError("coupling must be nonnegative")

    @property
    def sigma_parallel(self) -> np.ndarray:
        return SIGMA_Z if self.basis == UNPROTECTED else SIGMA_X

    @property
    def sigma_perp(self) -> np.ndarray:
        return SIGMA_X if self.basis == UNPROTECTED else SIGMA_Z


@dataclass(frozen=True)
class LaserDrive:
    """One laser: Rabi frequency, Lamb-Dicke parameter, frequency, phase."""

    rabi: float
    lamb_dicke: float
    frequency: float
    phase: float
    label: str = ""  # carrier | red2 | blue2

    def __post_init__(self):
        if self.rabi < 0:
            raise ConfigurationError("laser Rabi frequency must be nonnegative")
        if not 0 <= self.lamb_dicke < 1:
            raise ConfigurationError(
                f"Lamb-Dicke parameter must be in [0, 1), got {self.lamb_dicke}"
            )


@dataclass(frozen=True)
class IonBase:
    """Ion constants without lasers: qubit splitting omega_I and trap nu."""

    qubit_splitting: float
    trap_freq: float
    noise: OUParams | None = None


@dataclass(frozen=True)
class IonConfig:
    qubit_splitting: float
    trap_freq: float
    lasers: tuple[LaserDrive, ...] = ()
    noise: OUParams | None = None

    def validate(self) -> None:
        """Emit ValidityWarning for soft inequalities (never raises)."""
        nu = self.trap_freq
        for laser in self.lasers:
            if laser.rabi >= VALIDITY_RATIO * nu:
                warnings.warn(
                    f"laser {laser.label or '?'}: Rabi {laser.rabi:.3e} not << "
                    f"trap frequency {nu:.3e}", ValidityWarning, stacklevel=2)
            if laser.label in ("red2", "blue2"):
                delta = sideband_detuning(self, laser)
                if abs(delta) >= VALIDITY_RATIO * nu:
                    warnings.warn(
                        f"laser {laser.label}: detuning {delta:.3e} not << "
                        f"trap frequency {nu:.3e}", ValidityWarning, stacklevel=2)


def sideband_detuning(ion: IonConfig, laser: LaserDrive) -> float:
    """Detuning delta from the second sideband: omega_j = omega_I -+ 2nu - delta."""
    if laser.label == "red2":
        return ion.qubit_splitting - 2.0 * ion.trap_freq - laser.frequency
    if laser.label == "blue2":
        return ion.qubit_splitting + 2.0 * ion.trap_freq - laser.frequency
    raise ConfigurationError(f"laser {laser.label!r} is not a second sideband")


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme-level description tying laser detunings to target parameters."""

    scheme: str
    delta_r: float
    delta_b: float
    target: TwoPhotonRabiParams
    omega_dd: float = 0.0
    omega_carrier: float = 0.0
    phi_r: float = math.pi
    phi_b: float = math.pi
    phi_c: float = 0.0

    def __post_init__(self):
        if self.scheme not in (UNPROTECTED, PROTECTED):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")


# ---------------------------------------------------------------------------
# Hamiltonian builders
# ---------------------------------------------------------------------------

def h_2pqrm(params: TwoPhotonRabiParams, space: FockSpace) -> np.ndarray:
    """Ideal two-photon Rabi Hamiltonian in the scheme's spin basis."""
    a, a_dag, number = boson_operators(space)
    two_photon = a @ a + a_dag @ a_dag
    return (0.5 * params.omega_qubit * joint(params.sigma_parallel, space.identity())
            + params.omega_boson * joint(np.eye(2, dtype=complex), number)
            + params.coupling * joint(params.sigma_perp, two_photon))


def h_two_photon_interaction(t: float, scheme: SchemeConfig,
                             space: FockSpace) -> np.ndarray:
    """Second-sideband interaction Hamiltonian at time t.

    Unprotected: -g [sigma+ a^2 e^{i delta_r t} e^{-i phi_r}
                     + sigma+ a^dag^2 e^{i delta_b t} e^{-i phi_b} + h.c.]
    Protected (requires phi_r = phi_b = pi):
                 (Omega_q/2) sigma_x
                 + g sigma_z [a^2 e^{-2 i omega_b t} + a^dag^2 e^{+2 i omega_b t}]
    with g the target coupling (g = eta^2 Omega / 4 resp. / 8).
    """
    a, a_dag, _ = boson_operators(space)
    g = scheme.target.coupling
    if scheme.scheme == UNPROTECTED:
        block = -g * (a @ a * np.exp(1j * (scheme.delta_r * t - scheme.phi_r))
                      + a_dag @ a_dag * np.exp(1j * (scheme.delta_b * t - scheme.phi_b)))
        return joint(SIGMA_PLUS, block) + joint(SIGMA_MINUS, block.conj().T)
    if not (math.isclose(scheme.phi_r, math.pi) and math.isclose(scheme.phi_b, math.pi)):
        raise ConfigurationError(
            "protected interaction form is derived for phi_r = phi_b = pi")
    w = scheme.target.omega_boson
    boson = (a @ a * np.exp(-2j * w * t) + a_dag @ a_dag * np.exp(2j * w * t))
    return (0.5 * scheme.target.omega_qubit * joint(SIGMA_X, space.identity())
            + g * joint(SIGMA_Z, boson))


@lru_cache(maxsize=8)
def _position_eigensystem(n_trunc: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the truncated a + a^dag (real symmetric)."""
    space = FockSpace(n_trunc)
    a, a_dag, _ = boson_operators(space)
    d, w = np.linalg.eigh((a + a_dag).real)
    d.setflags(write=False)
    w.setflags(write=False)
    return d, w


def displacement_exponential(eta: float, phase_nu_t: float,
                             space: FockSpace) -> np.ndarray:
    """exp(i eta (a e^{-i phase} + a^dag e^{i phase})) on the truncated mode.

    Computed as the exact matrix exponential of the truncated generator:
    the generator equals R (a + a^dag) R^dag with R = diag(e^{i phase n}),
    so one cached eigendecomposition of a + a^dag serves all phases.
    """
    if eta < 0:
        raise ConfigurationError("eta must be nonnegative")
    if eta == 0.0:
        return np.eye(space.n_trunc, dtype=complex)
    d, w = _position_eigensystem(space.n_trunc)
    core = (w * np.exp(1j * eta * d)) @ w.T
    if phase_nu_t == 0.0:
        return core
    n = np.arange(space.n_trunc)
    rot = np.exp(1j * phase_nu_t * n)
    return core * np.outer(rot, rot.conj())


def h_ion_full(t: float, ion: IonConfig, xi: float, space: FockSpace) -> np.ndarray:
    """Full ion-laser Hamiltonian (optical RWA only) at time t with noise xi.

    (xi/2) sigma_z + sum_j (Omega_j/2) [sigma+ E_j(t)
        e^{i (omega_I - omega_j) t - i phi_j} + h.c.]
    where E_j(t) is the exact displacement exponential.
    """
    n = space.n_trunc
    block = np.zeros((n, n), dtype=complex)
    for laser in ion.lasers:
        disp = displacement_exponential(laser.lamb_dicke, ion.trap_freq * t, space)
        phase = (ion.qubit_splitting - laser.frequency) * t - laser.phase
        block += 0.5 * laser.rabi * np.exp(1j * phase) * disp
    h = joint(SIGMA_PLUS, block)
    h += h.conj().T
    h += 0.5 * xi * joint(SIGMA_Z, space.identity())
    return h


# ---------------------------------------------------------------------------
# Scheme construction (inverse parameter maps)
# ---------------------------------------------------------------------------

def _solve_rabi(coupling: float, eta: float, rabi: float | None,
                denom: float) -> float:
    """Rabi frequency from g = eta^2 Omega / denom, capped at RABI_CAP."""
    if eta <= 0:
        raise ConfigurationError("eta must be positive to realize a coupling")
    if rabi is None:
        rabi = denom * coupling / eta**2
        if rabi > RABI_CAP * (1 + 1e-12):
            raise ConfigurationError(
                f"required Rabi frequency {rabi:.4e} rad/s exceeds the "
                f"intensity cap {RABI_CAP:.4e} rad/s; increase eta or lower g")
    else:
        implied = eta**2 * rabi / denom
        if not math.isclose(implied, coupling, rel_tol=1e-9, abs_tol=1e-30):
            raise ConfigurationError(
                f"eta^2 Omega/{denom:g} = {implied:.6e} does not match the "
                f"target coupling {coupling:.6e}")
    if rabi < 0:
        raise ConfigurationError("Rabi frequency must be nonnegative")
    return rabi


def _check_sideband_detunings(delta_r: float, delta_b: float, nu: float) -> None:
    for name, delta in (("delta_r", delta_r), ("delta_b", delta_b)):
        if abs(delta) >= nu:
            raise ConfigurationError(
                f"|{name}| = {abs(delta):.4e} rad/s must stay below the trap "
                f"frequency {nu:.4e} rad/s")


def unprotected_config(target: TwoPhotonRabiParams, eta: float, base: IonBase,
                       rabi: float | None = None
                       ) -> tuple[SchemeConfig, IonConfig]:
    """Two second-sideband lasers realizing the target without protection.

    delta_r = Omega_q - 2 omega_b, delta_b = Omega_q + 2 omega_b,
    omega_{r,b} = omega_I -+ 2 nu - delta_{r,b}, phases pi.
    """
    if target.basis != UNPROTECTED:
        raise ConfigurationError("target.basis must be 'unprotected'")
    rabi = _solve_rabi(target.coupling, eta, rabi, 4.0)
    delta_r = target.omega_qubit - 2.0 * target.omega_boson
    delta_b = target.omega_qubit + 2.0 * target.omega_boson
    _check_sideband_detunings(delta_r, delta_b, base.trap_freq)
    omega_i, nu = base.qubit_splitting, base.trap_freq
    lasers = (
        LaserDrive(rabi, eta, omega_i - 2.0 * nu - delta_r, math.pi, "red2"),
        LaserDrive(rabi, eta, omega_i + 2.0 * nu - delta_b, math.pi, "blue2"),
    )
    scheme = SchemeConfig(UNPROTECTED, delta_r, delta_b, target)
    ion = IonConfig(omega_i, nu, lasers, base.noise)
    ion.validate()
    return scheme, ion


def protected_config(target: TwoPhotonRabiParams, eta: float, omega_dd: float,
                     base: IonBase, rabi: float | None = None,
                     eta_c: float = 0.01) -> tuple[SchemeConfig, IonConfig]:
    """Carrier plus two second-sideband lasers with continuous decoupling.

    Carrier at omega_I with Omega_c = Omega_DD + Omega_q and phase 0;
    sidebands at omega_{r,b} = omega_I -+ 2 nu - delta_{r,b} with
    delta_{r,b} = Omega_DD -+ 2 omega_b and phases pi. Requires the
    decoupling condition Omega_DD/(2 pi) > f_cr when noise is configured.
    """
    if target.basis != PROTECTED:
        raise ConfigurationError("target.basis must be 'protected'")
    if base.noise is not None and omega_dd / (2.0 * math.pi) <= base.noise.f_cr:
        raise DecouplingInfeasibleError(
            f"Omega_DD/(2 pi) = {omega_dd / (2 * math.pi):.4g} Hz does not "
            f"exceed the noise crossover f_cr = {base.noise.f_cr:.4g} Hz")
    if omega_dd >= VALIDITY_RATIO * base.trap_freq:
        warnings.warn(
            f"Omega_DD {omega_dd:.3e} not << trap frequency "
            f"{base.trap_freq:.3e}", ValidityWarning, stacklevel=2)
    rabi = _solve_rabi(target.coupling, eta, rabi, 8.0)
    delta_r = omega_dd - 2.0 * target.omega_boson
    delta_b = omega_dd + 2.0 * target.omega_boson
    _check_sideband_detunings(delta_r, delta_b, base.trap_freq)
    omega_carrier = omega_dd + target.omega_qubit
    omega_i, nu = base.qubit_splitting, base.trap_freq
    lasers = (
        LaserDrive(omega_carrier, eta_c, omega_i, 0.0, "carrier"),
        LaserDrive(rabi, eta, omega_i - 2.0 * nu - delta_r, math.pi, "red2"),
        LaserDrive(rabi, eta, omega_i + 2.0 * nu - delta_b, math.pi, "blue2"),
    )
    scheme = SchemeConfig(PROTECTED, delta_r, delta_b, target,
                          omega_dd=omega_dd, omega_carrier=omega_carrier)
    ion = IonConfig(omega_i, nu, lasers, base.noise)
    ion.validate()
    return scheme, ion


def simulated_params(scheme: SchemeConfig, ion: IonConfig) -> TwoPhotonRabiParams:
    """Forward parameter map from laser settings back to model parameters."""
    sidebands = [l for l in ion.lasers if l.label in ("red2", "blue2")]
    if len(sidebands) != 2:
        raise ConfigurationError("expected exactly one red2 and one blue2 laser")
    rabi = sidebands[0].rabi
    eta = sidebands[0].lamb_dicke
    omega_boson = 0.25 * (scheme.delta_b - scheme.delta_r)
    if scheme.scheme == UNPROTECTED:
        omega_qubit = 0.5 * (scheme.delta_b + scheme.delta_r)
        coupling = 0.25 * eta**2 * rabi
    else:
        omega_qubit = scheme.omega_carrier - scheme.omega_dd
        coupling = 0.125 * eta**2 * rabi
    return TwoPhotonRabiParams(omega_qubit, omega_boson, coupling,
                               basis=scheme.scheme)
