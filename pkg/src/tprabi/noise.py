"""Ornstein-Uhlenbeck magnetic-dephasing noise and its calibration analytics.

The process xi(t) (angular frequency, rad/s) is Gaussian and exponentially
correlated with correlation time tau and diffusion constant c:

    xi(t + dt) = xi(t) e^{-dt/tau} + sqrt(c tau / 2 (1 - e^{-2 dt/tau})) N

with N a unit normal. The update is exact for any dt, so paths can be
generated directly on the integrator grid. Stationary statistics: mean 0,
variance c tau / 2, autocovariance C(t') = (c tau / 2) e^{-t'/tau}.

Calibration against a measured coherence time T2 uses the exact closed form
for the variance of the integrated noise Xi(t) = int_0^t xi dt' (stationary
start):

    Var Xi(t) = c tau^2 (t - tau (3/2 - 2 e^{-t/tau} + 1/2 e^{-2t/tau}))

and the defining relation Var Xi(T2) = 2, i.e. mean <sigma_x(T2)> = e^{-1}
for a freely dephasing qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter

from .errors import CalibrationInfeasibleError


def diffusion_from_t2(t2: float, tau: float) -> float:
    """Diffusion constant c (rad^2 s^-3) matching a coherence time t2.

    Exact inversion of Var Xi(T2) = 2. Raises CalibrationInfeasibleError
    when t2 is too small relative to tau for the variance ever to reach 2
    at the implied rate (denominator <= 0).
    """
    if t2 <= 0 or tau <= 0:
        raise CalibrationInfeasibleError("t2 and tau must be positive")
    if tau >= t2:
        raise CalibrationInfeasibleError(
            f"tau = {tau:g} s must be shorter than t2 = {t2:g} s for the "
            f"dephasing calibration to apply")
    bracket = t2 - tau * (1.5 - 2.0 * math.exp(-t2 / tau)
                          + 0.5 * math.exp(-2.0 * t2 / tau))
    if bracket <= 0:
        raise CalibrationInfeasibleError(
            f"no diffusion constant reproduces t2={t2:g} s with tau={tau:g} s "
            f"(t2 - tau*(3/2 - 2e^(-t2/tau) + e^(-2 t2/tau)/2) = {bracket:g} <= 0)"
        )
    return 2.0 / (tau * tau * bracket)


def diffusion_from_t2_approx(t2: float, tau: float) -> float:
    """Short-correlation approximation c ~ 2/(T2 tau^2), valid for tau << t2."""
    if t2 <= 0 or tau <= 0:
        raise CalibrationInfeasibleError("t2 and tau must be positive")
    return 2.0 / (t2 * tau * tau)


@dataclass(frozen=True)
class OUParams:
    """OU noise description: correlation time tau (s), diffusion c (rad^2 s^-3)."""

    tau: float
    c: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.c < 0:
            raise ValueError(f"c must be nonnegative, got {self.c}")

    @classmethod
    def from_t2(cls, t2: float, tau: float) -> "OUParams":
        return cls(tau=tau, c=diffusion_from_t2(t2, tau))

    @property
    def f_cr(self) -> float:
        """Crossover frequency 1/(2 pi tau) in Hz."""
        return 1.0 / (2.0 * math.pi * self.tau)

    @property
    def stationary_variance(self) -> float:
        """Stationary variance c tau / 2 (rad^2/s^2)."""
        return 0.5 * self.c * self.tau

    @property
    def t2(self) -> float:
        """Coherence time implied by (tau, c): the root of Var Xi(t) = 2."""
        if self.c == 0.0:
            return math.inf
        upper = 2.0 / (self.c * self.tau**2) + 2.0 * self.tau
        return brentq(lambda t: xi_integral_variance(t, self) - 2.0,
                      0.0, upper, xtol=1e-18, rtol=1e-14)


def ou_step(xi_prev: float, dt: float, params: OUParams,
            gaussian_draw: float) -> float:
    """One exact OU update over dt, driven by a unit-normal draw."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = math.exp(-dt / params.tau)
    amp = math.sqrt(0.5 * params.c * params.tau * (1.0 - decay * decay))
    return xi_prev * decay + amp * gaussian_draw


def xi_integral_variance(t, params: OUParams):
    """Variance of Xi(t) = int_0^t xi dt' for a sharp start xi(0) = 0 (rad^2).

    This is the closed form behind the T2 calibration. Note it assumes
    xi(0) = 0 exactly; a stationary start adds (c tau^3 / 2)(1-e^{-t/tau})^2
    (see xi_integral_variance_stationary), a relative difference of order
    tau/(2 t2) at t = t2.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    tau, c = params.tau, params.c
    x = t / tau
    out = c * tau**2 * (t - tau * (1.5 - 2.0 * np.exp(-x) + 0.5 * np.exp(-2.0 * x)))
    return out if out.ndim else float(out)


def xi_integral_variance_stationary(t, params: OUParams):
    """Variance of Xi(t) when xi(0) is drawn from the stationary distribution."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    tau, c = params.tau, params.c
    out = c * tau**2 * (t - tau * (1.0 - np.exp(-t / tau)))
    return out if out.ndim else float(out)


def spectral_density(f, params: OUParams):
    """One-sided Lorentzian spectral density S(f) = 2 c tau^2 / (1 + (2 pi tau f)^2)."""
    f = np.asarray(f, dtype=float)
    out = 2.0 * params.c * params.tau**2 / (1.0 + (2.0 * np.pi * params.tau * f) ** 2)
    return out if out.ndim else float(out)


def coherence_curve(t, params: OUParams):
    """Ensemble-averaged <sigma_x(t)> of a freely dephasing qubit: e^{-Var Xi / 2}."""
    out = np.exp(-0.5 * np.asarray(xi_integral_variance(t, params)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NoisePath:
    """One noise realization sampled on a time grid."""

    t_grid: np.ndarray
    xi: np.ndarray
    seed: int

    def __post_init__(self):
        if self.xi.shape != self.t_grid.shape:
            raise ValueError("xi and t_grid must have equal length")


def trajectory_seed(master_seed: int, index: int) -> int:
    """Deterministic, order-independent per-trajectory seed."""
    state = np.random.SeedSequence((master_seed, index)).generate_state(2, np.uint64)
    return int(state[0]) | (int(state[1]) << 64)


def _rng(seed: int) -> np.random.Generator:
    # Philox: counter-based, cheap to construct per trajectory.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate_path(params: OUParams, t_grid: np.ndarray, seed: int,
                  initial: str = "stationary") -> NoisePath:
    """Sample an OU path on t_grid.

    ``initial`` selects xi(0): "stationary" draws from Normal(0, c tau / 2)
    (the default everywhere in the simulator); "zero" starts at xi(0) = 0,
    the premise of the xi_integral_variance closed form. Bit-reproducible
    from (seed, t_grid, params, initial). Draw order: one normal for the
    initial value, then one per subsequent grid point.
    """
    if initial not in ("stationary", "zero"):
        raise ValueError(f"unknown initial condition {initial!r}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise ValueError("t_grid must be a nonempty 1-d array")
    dt = np.diff(t_grid)
    if np.any(dt <= 0):
        raise ValueError("t_grid must be strictly increasing")

    rng = _rng(seed)
    draws = rng.standard_normal(len(t_grid))
    sigma0 = math.sqrt(params.stationary_variance) if initial == "stationary" else 0.0
    xi0 = sigma0 * draws[0]
    if len(t_grid) == 1:
        return NoisePath(t_grid=t_grid, xi=np.array([xi0]), seed=seed)

    if np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        # Uniform grid: the exact update is an AR(1) recursion; run it in C.
        decay = math.exp(-dt[0] / params.tau)
        amp = math.sqrt(0.5 * params.c * params.tau * (1.0 - decay * decay))
        tail, _ = lfilter([1.0], [1.0, -decay], amp * draws[1:], zi=[decay * xi0])
        xi = np.concatenate(([xi0], tail))
    else:
        xi = np.empty(len(t_grid))
        xi[0] = xi0
        for k in range(1, len(t_grid)):
            xi[k] = ou_step(xi[k - 1], float(dt[k - 1]), params, float(draws[k]))
    return NoisePath(t_grid=t_grid, xi=xi, seed=seed)


def write_path_csv(path: NoisePath, fileobj) -> None:
    """Dump a path as CSV with columns t, xi (diagnostics)."""
    fileobj.write("t,xi\n")
    for t, x in zip(path.t_grid, path.xi):
        fileobj.write(f"{float(t)!r},{float(x)!r}\n")
