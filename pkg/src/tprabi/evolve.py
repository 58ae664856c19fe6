"""Stochastic Schroedinger integration, frame alignment and ensembles.

The integrator is exponential midpoint: one matrix exponential per step,
psi <- exp(-i H(t + dt/2) dt) psi, with the noise value sampled on the step
grid and held constant within a step.

Two propagation paths exist, both implementing the same stepping rule:

* ``propagate`` accepts any Hamiltonian callable and evaluates the
  exponential's action by a machine-precision scaled Taylor series;
* the full-ion driver exploits the structure of the ion Hamiltonian. Every
  laser term is (Omega_j/2) e^{i chi_j(t)} exp(i eta_j G(t)) with the SAME
  generator G(t) = a e^{-i nu t} + a^dag e^{i nu t} = R(t) (a+a^dag) R(t)^dag,
  R(t) = diag(e^{i nu t n}). In the eigenbasis of a+a^dag the midpoint
  Hamiltonian is therefore block diagonal in 2x2 qubit blocks (one per boson
  eigenvector), whose exponential is written in closed form. The step is
  exact to roundoff; the only integration error is freezing H at the
  midpoint, as in any exponential-midpoint scheme.

Trajectories of an ensemble are independent; they are propagated in fixed
chunks (columns of a batched state matrix) so results are bit-identical for
any worker count.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

try:
    from numba import njit as _njit
except ImportError:     # pragma: no cover - numba is an optional speedup
    _njit = None

from .errors import (ConfigurationError, InvalidDimensionError,
                     TruncationOverflowError)
from .hilbert import FockSpace
from .models import (UNPROTECTED, IonConfig, SchemeConfig,
                     TwoPhotonRabiParams, h_2pqrm, _position_eigensystem)
from .noise import generate_path, trajectory_seed

OBSERVABLE_NAMES = ("sigma_par", "sigma_perp", "sigma_y", "n_boson", "fidelity")

#: Trajectories per propagation batch; fixed so that ensemble results do not
#: depend on the worker count.
CHUNK_SIZE = 25


@dataclass(frozen=True)
class IntegratorSettings:
    dt: float
    method: str = "exponential-midpoint"
    max_top_level_population: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.method != "exponential-midpoint":
            raise ConfigurationError(f"unknown integrator method {self.method!r}")


def fidelity(psi_a: np.ndarray, psi_b: np.ndarray) -> float:
    """|<psi_a|psi_b>|; insensitive to global phase."""
    if psi_a.shape != psi_b.shape:
        raise InvalidDimensionError(
            f"state dims differ: {psi_a.shape} vs {psi_b.shape}")
    return float(abs(np.vdot(psi_a, psi_b)))


# ---------------------------------------------------------------------------
# Step-size rule and output grids
# ---------------------------------------------------------------------------

def full_drive_fmax(ion: IonConfig, scheme: SchemeConfig) -> float:
    """Largest drive frequency (Hz) for full-ion runs: 2 nu plus max |delta|."""
    return (2.0 * ion.trap_freq
            + max(abs(scheme.delta_r), abs(scheme.delta_b))) / (2.0 * math.pi)


def interaction_fmax(scheme: SchemeConfig) -> float:
    """Largest drive frequency (Hz) at the sideband-interaction level."""
    t = scheme.target
    return max(abs(scheme.delta_r), abs(scheme.delta_b), scheme.omega_dd,
               2.0 * t.omega_boson, t.omega_qubit) / (2.0 * math.pi)


def max_stable_dt(f_max: float) -> float:
    """Step-size cap: at least 50 samples per fastest drive oscillation."""
    return 1.0 / (50.0 * f_max)


def check_dt(settings: IntegratorSettings, f_max: float) -> None:
    cap = max_stable_dt(f_max)
    if settings.dt > cap * (1 + 1e-12):
        raise ConfigurationError(
            f"dt = {settings.dt:.4e} s violates dt <= 1/(50 f_max) = "
            f"{cap:.4e} s for f_max = {f_max:.4e} Hz")


def build_output_grid(t_total: float, n_out: int,
                      dt_max: float) -> tuple[np.ndarray, float]:
    """Uniform output grid of n_out+1 points and a dt dividing its spacing."""
    if t_total <= 0 or n_out < 1:
        raise ConfigurationError("t_total and n_out must be positive")
    spacing = t_total / n_out
    k = max(1, math.ceil(spacing / dt_max - 1e-12))
    return np.linspace(0.0, t_total, n_out + 1), spacing / k


def _steps_per_interval(t_grid: np.ndarray, dt: float) -> int:
    spacing = np.diff(t_grid)
    if len(spacing) == 0:
        raise ConfigurationError("output grid needs at least two points")
    if not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        raise ConfigurationError("output grid must be uniform")
    k = round(spacing[0] / dt)
    if k < 1 or abs(k * dt - spacing[0]) > 1e-9 * spacing[0]:
        raise ConfigurationError(
            f"output spacing {spacing[0]:.6e} s is not an integer multiple "
            f"of dt = {dt:.6e} s")
    return k


# ---------------------------------------------------------------------------
# Generic propagation (arbitrary Hamiltonian callable)
# ---------------------------------------------------------------------------

@dataclass
class PropagationResult:
    states: np.ndarray            # (n_out, dim)
    norm_drift_max: float
    top_population_max: float

    def __iter__(self):
        return iter(self.states)


def _expm_apply(h: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) psi via scaled Taylor summation to machine precision."""
    scale = np.abs(h).sum(axis=1).max() * abs(dt)
    m = max(1, math.ceil(scale / 0.5))
    tau = dt / m
    y = psi
    for _ in range(m):
        term = y
        acc = y.copy()
        for k in range(1, 60):
            term = (-1j * tau / k) * (h @ term)
            acc += term
            if np.max(np.abs(term)) <= 1e-16 * np.max(np.abs(acc)):
                break
        y = acc
    return y


def _top_population(psi: np.ndarray, n_trunc: int) -> float:
    mag = np.abs(psi) ** 2
    return float(mag[n_trunc - 2:n_trunc].sum() + mag[-2:].sum())


def propagate(h_of_t, psi0: np.ndarray, settings: IntegratorSettings,
              t_grid: np.ndarray, space: FockSpace | None = None
              ) -> PropagationResult:
    """Exponential-midpoint integration of i d/dt psi = H(t) psi.

    ``h_of_t`` maps a time (s) to a dense Hermitian matrix. The state is
    renormalized each step; the worst pre-renormalization defect is recorded.
    When ``space`` is given, the top-two Fock-level population is checked at
    every output time against settings.max_top_level_population.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    k = _steps_per_interval(t_grid, settings.dt)
    dt = (t_grid[1] - t_grid[0]) / k
    psi = np.asarray(psi0, dtype=complex).copy()
    states = np.empty((len(t_grid), len(psi)), dtype=complex)
    states[0] = psi
    drift = 0.0
    top_pop = _top_population(psi, space.n_trunc) if space else 0.0
    for i_out in range(1, len(t_grid)):
        t0 = t_grid[i_out - 1]
        for j in range(k):
            h = h_of_t(t0 + (j + 0.5) * dt)
            psi = _expm_apply(h, psi, dt)
            nrm = np.linalg.norm(psi)
            drift = max(drift, abs(nrm - 1.0))
            psi /= nrm
        states[i_out] = psi
        if space is not None:
            pop = _top_population(psi, space.n_trunc)
            top_pop = max(top_pop, pop)
            if pop > settings.max_top_level_population:
                raise TruncationOverflowError(
                    float(t_grid[i_out]), pop, settings.max_top_level_population)
    return PropagationResult(states, drift, top_pop)


# ---------------------------------------------------------------------------
# Frames and references
# ---------------------------------------------------------------------------

def frame_align(scheme: SchemeConfig, t: float, psi_sim: np.ndarray) -> np.ndarray:
    """Carry a full-ion-frame state into the sideband-interaction frame.

    Unprotected: identity. Protected: exp(+i Omega_DD t sigma_x / 2) on the
    qubit factor, undoing the decoupling-drive rotating frame.
    """
    if scheme.scheme == UNPROTECTED:
        return psi_sim.copy()
    n = len(psi_sim) // 2
    half = 0.5 * scheme.omega_dd * t
    c, s = math.cos(half), math.sin(half)
    out = np.empty_like(psi_sim)
    out[:n] = c * psi_sim[:n] + 1j * s * psi_sim[n:]
    out[n:] = 1j * s * psi_sim[:n] + c * psi_sim[n:]
    return out


def _frame_align_batch(scheme: SchemeConfig, t_grid: np.ndarray,
                       states: np.ndarray) -> np.ndarray:
    """frame_align applied to states of shape (n_out, dim, m)."""
    if scheme.scheme == UNPROTECTED:
        return states
    n = states.shape[1] // 2
    half = 0.5 * scheme.omega_dd * np.asarray(t_grid)[:, None, None]
    c, s = np.cos(half), np.sin(half)
    out = np.empty_like(states)
    out[:, :n] = c * states[:, :n] + 1j * s * states[:, n:]
    out[:, n:] = 1j * s * states[:, :n] + c * states[:, n:]
    return out


def reference_states(scheme: SchemeConfig, params: TwoPhotonRabiParams,
                     psi0: np.ndarray, t_grid: np.ndarray,
                     space: FockSpace) -> np.ndarray:
    """Ideal-model states in the sideband-interaction frame, (n_out, dim).

    exp(+i F t) exp(-i H_model t) psi0 with F = (Omega_q/2) sigma_par
    + omega_b a^dag a (unprotected) or F = omega_b a^dag a (protected);
    both F are diagonal in the computational basis, and the model
    Hamiltonian is exponentiated by one exact eigendecomposition.
    """
    t = np.asarray(t_grid, dtype=float)
    evals, evecs = np.linalg.eigh(h_2pqrm(params, space))
    coeff = evecs.conj().T @ np.asarray(psi0, dtype=complex)
    states = evecs @ (np.exp(-1j * np.outer(evals, t)) * coeff[:, None])
    n_diag = np.tile(np.arange(space.n_trunc, dtype=float), 2)
    f_diag = params.omega_boson * n_diag
    if scheme.scheme == UNPROTECTED:
        sz_diag = np.repeat([1.0, -1.0], space.n_trunc)
        f_diag = f_diag + 0.5 * params.omega_qubit * sz_diag
    states *= np.exp(1j * np.outer(f_diag, t))
    return states.T.copy()


# ---------------------------------------------------------------------------
# Structured full-ion propagation (batched over trajectories)
# ---------------------------------------------------------------------------

def _cos_sinc(phi_sq: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """cos(phi) and dt*sin(phi)/phi from phi^2, exact to roundoff."""
    if phi_sq.max() <= 0.01:
        # Taylor in phi^2; truncation below 1e-16 for phi <= 0.1.
        x = phi_sq
        c = 1.0 + x * (-1/2 + x * (1/24 + x * (-1/720 + x / 40320)))
        s = 1.0 + x * (-1/6 + x * (1/120 + x * (-1/5040 + x / 362880)))
        return c, dt * s
    phi = np.sqrt(phi_sq)
    with np.errstate(invalid="ignore"):
        s = np.where(phi > 0.0, np.sin(phi) / np.where(phi > 0, phi, 1.0), 1.0)
    return np.cos(phi), dt * s


def _ion_steps_numpy(z, xi_steps, step0, k_sub, step_shift, eig_phases,
                     amps, dfreq, phis, t0, dt):
    """Advance k_sub midpoint steps in the co-rotating eigenbasis."""
    n, two_m = z.shape
    m = two_m // 2
    drift = 0.0
    for s in range(k_sub):
        step = step0 + s
        t_mid = t0 + (step + 0.5) * dt
        if len(amps):
            f = (amps * np.exp(1j * (dfreq * t_mid - phis))) @ eig_phases
        else:
            f = np.zeros(n, dtype=complex)
        half = 0.5 * xi_steps[step]
        phi_sq = (half * half + (f.real**2 + f.imag**2)[:, None]) * (dt * dt)
        c, sn = _cos_sinc(phi_sq, dt)
        up, dn = z[:, :m], z[:, m:]
        a_coef = c - 1j * (half * sn)
        b_coef = -1j * (f[:, None] * sn)
        new_up = a_coef * up + b_coef * dn
        new_dn = a_coef.conj() * dn - b_coef.conj() * up
        z[:, :m] = new_up
        z[:, m:] = new_dn
        z = step_shift @ z
        colsq = np.einsum("ij,ij->j", z.conj(), z).real
        nrm = np.sqrt(colsq[:m] + colsq[m:])
        drift = max(drift, float(np.abs(nrm - 1.0).max()))
        z[:, :m] /= nrm
        z[:, m:] /= nrm
    return z, drift


if _njit is not None:
    @_njit(cache=True)
    def _ion_steps_jit(z, xi_steps, step0, k_sub, step_shift, eig_phases,
                       amps, dfreq, phis, t0, dt):   # pragma: no cover
        n, two_m = z.shape
        m = two_m // 2
        n_lasers = amps.shape[0]
        f = np.empty(n, dtype=np.complex128)
        drift = 0.0
        dt2 = dt * dt
        for s in range(k_sub):
            step = step0 + s
            t_mid = t0 + (step + 0.5) * dt
            for k in range(n):
                f[k] = 0.0
            for j in range(n_lasers):
                cj = amps[j] * np.exp(1j * (dfreq[j] * t_mid - phis[j]))
                for k in range(n):
                    f[k] += cj * eig_phases[j, k]
            for i in range(m):
                h = 0.5 * xi_steps[step, i]
                hh = h * h
                for k in range(n):
                    fk = f[k]
                    phi2 = (hh + fk.real * fk.real + fk.imag * fk.imag) * dt2
                    if phi2 <= 0.01:
                        c = 1.0 + phi2 * (-1/2 + phi2 * (1/24 + phi2 * (-1/720 + phi2 / 40320)))
                        sn = 1.0 + phi2 * (-1/6 + phi2 * (1/120 + phi2 * (-1/5040 + phi2 / 362880)))
                        sn *= dt
                    else:
                        phi = math.sqrt(phi2)
                        c = math.cos(phi)
                        sn = dt * math.sin(phi) / phi
                    a = complex(c, -h * sn)
                    b = complex(fk.imag * sn, -fk.real * sn)
                    up = z[k, i]
                    dn = z[k, m + i]
                    z[k, i] = a * up + b * dn
                    z[k, m + i] = a.conjugate() * dn - b.conjugate() * up
            z = np.dot(step_shift, z)
            for i in range(m):
                s2 = 0.0
                for k in range(n):
                    zu = z[k, i]
                    zd = z[k, m + i]
                    s2 += (zu.real * zu.real + zu.imag * zu.imag
                           + zd.real * zd.real + zd.imag * zd.imag)
                nrm = math.sqrt(s2)
                dev = abs(nrm - 1.0)
                if dev > drift:
                    drift = dev
                inv = 1.0 / nrm
                for k in range(n):
                    z[k, i] *= inv
                    z[k, m + i] *= inv
        return z, drift
else:
    _ion_steps_jit = None

#: Set TPRABI_NO_JIT=1 to force the pure-numpy stepping path.
_use_jit = _ion_steps_jit is not None and not os.environ.get("TPRABI_NO_JIT")


def _propagate_ion_batch(ion: IonConfig, space: FockSpace,
                         settings: IntegratorSettings, t_grid: np.ndarray,
                         psi0: np.ndarray, xi_steps: np.ndarray
                         ) -> tuple[np.ndarray, float, float]:
    """Exponential-midpoint evolution under the full ion Hamiltonian.

    psi0: (dim, m) batch of initial states; xi_steps: (n_steps, m) noise
    values held constant over each step. Returns (states (n_out, dim, m),
    max norm drift, max top-two-level population).

    The state is carried in the eigenbasis of a + a^dag co-rotating with
    each step's midpoint phase: with W diag(d) W^T = a + a^dag and
    R(t) = diag(e^{i nu t k}), the midpoint Hamiltonian is block diagonal
    there (2x2 per eigenvector), and advancing the co-rotating frame by dt
    is one constant unitary M = W^T diag(e^{-i nu dt k}) W. One step is
    therefore one gemm plus closed-form 2x2 rotations, with no series
    truncation anywhere.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    k_sub = _steps_per_interval(t_grid, settings.dt)
    n_out = len(t_grid)
    n_steps = k_sub * (n_out - 1)
    n = space.n_trunc
    m = psi0.shape[1]
    if xi_steps.shape != (n_steps, m):
        raise InvalidDimensionError(
            f"xi_steps must have shape {(n_steps, m)}, got {xi_steps.shape}")
    dt = (t_grid[-1] - t_grid[0]) / n_steps

    d, w_real = _position_eigensystem(n)
    w = w_real.astype(complex)
    n_vec = np.arange(n, dtype=float)
    nu = ion.trap_freq
    step_shift = w_real.T @ (np.exp(-1j * nu * dt * n_vec)[:, None] * w_real)
    amps = np.array([0.5 * l.rabi for l in ion.lasers])
    dfreq = np.array([ion.qubit_splitting - l.frequency for l in ion.lasers])
    phis = np.array([l.phase for l in ion.lasers])
    eig_phases = np.exp(1j * np.outer([l.lamb_dicke for l in ion.lasers], d))

    def to_lab(z: np.ndarray, t_mid: float) -> np.ndarray:
        """Co-rotating eigenbasis at midpoint time t_mid -> lab basis."""
        out = np.exp(1j * nu * t_mid * n_vec)[:, None] * (w @ z)
        return out

    t0 = t_grid[0]
    rot0 = np.exp(-1j * nu * (t0 + 0.5 * dt) * n_vec)
    z = np.empty((n, 2 * m), dtype=complex)   # columns: up block | down block
    z[:, :m] = psi0[:n]
    z[:, m:] = psi0[n:]
    z = w.T @ (rot0[:, None] * z)

    states = np.empty((n_out, 2 * n, m), dtype=complex)
    states[0, :n] = psi0[:n]
    states[0, n:] = psi0[n:]
    drift = 0.0
    top_pop = 0.0
    step = 0
    stepper = _ion_steps_jit if _use_jit else _ion_steps_numpy
    for i_out in range(1, n_out):
        z, chunk_drift = stepper(z, xi_steps, step, k_sub, step_shift,
                                 eig_phases, amps, dfreq, phis, t0, dt)
        step += k_sub
        drift = max(drift, chunk_drift)
        y = to_lab(z, t0 + (step + 0.5) * dt)
        states[i_out, :n] = y[:, :m]
        states[i_out, n:] = y[:, m:]
        pop = (np.abs(y[n - 2:, :m]) ** 2 + np.abs(y[n - 2:, m:]) ** 2).sum(axis=0)
        worst = float(pop.max())
        top_pop = max(top_pop, worst)
        if worst > settings.max_top_level_population:
            raise TruncationOverflowError(
                float(t_grid[i_out]), worst, settings.max_top_level_population,
                column=int(pop.argmax()))
    return states, drift, top_pop


# ---------------------------------------------------------------------------
# Trajectories and ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    """Everything needed to evolve one scheme realization."""

    scheme: SchemeConfig
    ion: IonConfig
    space: FockSpace
    settings: IntegratorSettings
    psi0: np.ndarray
    t_grid: np.ndarray
    noise_on: bool = True


@dataclass
class TrajectoryRecord:
    t_grid: np.ndarray
    sigma_par: np.ndarray
    sigma_perp: np.ndarray
    sigma_y: np.ndarray
    n_boson: np.ndarray
    fidelity: np.ndarray
    seed: int
    norm_drift_max: float
    top_population_max: float
    states: np.ndarray | None = None


@dataclass
class EnsembleResult:
    t_grid: np.ndarray
    means: dict[str, np.ndarray]
    stderrs: dict[str, np.ndarray]
    n_traj: int
    master_seed: int
    norm_drift_max: float
    top_population_max: float
    wall_time_s: float = 0.0


def _observables(scheme: SchemeConfig, states: np.ndarray,
                 reference: np.ndarray) -> dict[str, np.ndarray]:
    """Observables of aligned states (n_out, dim, m) -> arrays (m, n_out)."""
    n = states.shape[1] // 2
    up, dn = states[:, :n, :], states[:, n:, :]
    cross = np.einsum("onm,onm->om", up.conj(), dn)
    sx = 2.0 * cross.real
    sy = 2.0 * cross.imag
    mag_up = np.einsum("onm,onm->om", up.conj(), up).real
    mag_dn = np.einsum("onm,onm->om", dn.conj(), dn).real
    sz = mag_up - mag_dn
    weights = np.arange(n, dtype=float)
    nb = (np.einsum("n,onm->om", weights, np.abs(up) ** 2)
          + np.einsum("n,onm->om", weights, np.abs(dn) ** 2))
    fid = np.abs(np.einsum("od,odm->om", reference.conj(), states))
    par, perp = (sz, sx) if scheme.scheme == UNPROTECTED else (sx, sz)
    return {"sigma_par": par.T, "sigma_perp": perp.T, "sigma_y": sy.T,
            "n_boson": nb.T, "fidelity": fid.T}


def _noise_for_steps(run: RunSpec, seeds: list[int],
                     n_steps: int, dt: float) -> np.ndarray:
    if not run.noise_on or run.ion.noise is None:
        return np.zeros((n_steps, len(seeds)))
    step_times = run.t_grid[0] + dt * np.arange(n_steps)
    cols = [generate_path(run.ion.noise, step_times, s).xi for s in seeds]
    return np.stack(cols, axis=1)


def _run_chunk(run: RunSpec, seeds: list[int], store_states: bool = False
               ) -> tuple[dict[str, np.ndarray], float, float, np.ndarray | None]:
    k = _steps_per_interval(run.t_grid, run.settings.dt)
    n_steps = k * (len(run.t_grid) - 1)
    dt = (run.t_grid[-1] - run.t_grid[0]) / n_steps
    xi = _noise_for_steps(run, seeds, n_steps, dt)
    psi0 = np.tile(run.psi0[:, None], (1, len(seeds)))
    try:
        with threadpool_limits(limits=1):
            raw, drift, top_pop = _propagate_ion_batch(
                run.ion, run.space, run.settings, run.t_grid, psi0, xi)
            aligned = _frame_align_batch(run.scheme, run.t_grid, raw)
            reference = reference_states(run.scheme, run.scheme.target,
                                         run.psi0, run.t_grid, run.space)
            obs = _observables(run.scheme, aligned, reference)
    except TruncationOverflowError as err:
        raise TruncationOverflowError(
            err.time, err.population, err.tol,
            seed=seeds[err.column], column=err.column) from None
    return obs, drift, top_pop, (aligned if store_states else None)


def run_trajectory(run: RunSpec, seed: int,
                   store_states: bool = False) -> TrajectoryRecord:
    """One noise realization: propagate, frame-align, record observables."""
    obs, drift, top_pop, states = _run_chunk(run, [seed], store_states)
    return TrajectoryRecord(
        t_grid=run.t_grid.copy(),
        sigma_par=obs["sigma_par"][0], sigma_perp=obs["sigma_perp"][0],
        sigma_y=obs["sigma_y"][0], n_boson=obs["n_boson"][0],
        fidelity=obs["fidelity"][0], seed=seed,
        norm_drift_max=drift, top_population_max=top_pop,
        states=states[:, :, 0] if states is not None else None)


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("TPRABI_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, threads)


def ensemble(run: RunSpec, n_traj: int, master_seed: int,
             threads: int | None = None) -> EnsembleResult:
    """Seeded trajectory ensemble with per-time mean and standard error.

    Trajectory i always uses trajectory_seed(master_seed, i) and trajectories
    are grouped into fixed chunks of CHUNK_SIZE, so the result is independent
    of the worker count and of scheduling order.
    """
    if n_traj < 1:
        raise ConfigurationError("n_traj must be >= 1")
    start = time.perf_counter()
    seeds = [trajectory_seed(master_seed, i) for i in range(n_traj)]
    chunks = [(lo, min(lo + CHUNK_SIZE, n_traj))
              for lo in range(0, n_traj, CHUNK_SIZE)]
    threads = _resolve_threads(threads)

    per_obs = {name: np.empty((n_traj, len(run.t_grid))) for name in OBSERVABLE_NAMES}
    drift = 0.0
    top_pop = 0.0
    if threads == 1 or len(chunks) == 1:
        results = [_run_chunk(run, seeds[lo:hi]) for lo, hi in chunks]
    else:
        # spawn, not fork: forked children inherit BLAS thread-pool state
        # and can crash inside gemm
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(threads, len(chunks)),
                                 mp_context=ctx) as pool:
            futures = [pool.submit(_run_chunk, run, seeds[lo:hi])
                       for lo, hi in chunks]
            results = [f.result() for f in futures]
    for (lo, hi), (obs, chunk_drift, chunk_pop, _) in zip(chunks, results):
        for name in OBSERVABLE_NAMES:
            per_obs[name][lo:hi] = obs[name]
        drift = max(drift, chunk_drift)
        top_pop = max(top_pop, chunk_pop)

    means = {name: vals.mean(axis=0) for name, vals in per_obs.items()}
    if n_traj > 1:
        stderrs = {name: vals.std(axis=0, ddof=1) / math.sqrt(n_traj)
                   for name, vals in per_obs.items()}
    else:
        stderrs = {name: np.zeros(len(run.t_grid)) for name in OBSERVABLE_NAMES}
    return EnsembleResult(
        t_grid=run.t_grid.copy(), means=means, stderrs=stderrs,
        n_traj=n_traj, master_seed=master_seed, norm_drift_max=drift,
        top_population_max=top_pop, wall_time_s=time.perf_counter() - start)
