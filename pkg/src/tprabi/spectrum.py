"""Eigen-analysis of the ideal two-photon Rabi model.

The model spectrum collapses at g = omega_b / 2: below that coupling the
ground energy converges as the Fock cutoff grows; above it the Hamiltonian
is unbounded from below and the truncated ground energy keeps falling
without stabilizing. On finite matrices the observable proxy is the
presence or absence of Cauchy behavior of E0(n_trunc) over a cutoff grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidScanError
from .hilbert import FockSpace
from .models import TwoPhotonRabiParams, h_2pqrm

#: Convergence threshold on |E0(n_max) - E0(n_prev)| in units of omega_b.
CONVERGENCE_GAP = 1e-6

#: Number of low eigenstates whose mean phonon number is tabulated.
N_LOW_STATES = 4


def eigenspectrum(params: TwoPhotonRabiParams, space: FockSpace
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors of the model Hamiltonian.

    Residuals ||H v - lambda v|| of the lowest 10 pairs are verified against
    1e-10 ||H||; a solver failure therefore surfaces immediately.
    """
    h = h_2pqrm(params, space)
    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as err:
        raise ArithmeticError(
            f"eigensolver failed for params {params}: {err}") from err
    scale = np.linalg.norm(h)
    n_check = min(10, len(evals))
    resid = h @ evecs[:, :n_check] - evecs[:, :n_check] * evals[:n_check]
    worst = np.linalg.norm(resid, axis=0).max()
    if worst > 1e-10 * scale:
        raise ArithmeticError(
            f"eigenpair residual {worst:.3e} exceeds 1e-10 * ||H|| = "
            f"{1e-10 * scale:.3e} for params {params}")
    return evals, evecs


@dataclass
class SpectrumScan:
    """Ground energies and low-state phonon numbers over (g, n_trunc) grids."""

    g_over_omega: np.ndarray            # (n_g,)
    n_trunc: np.ndarray                 # (n_k,)
    ground_energy: np.ndarray           # (n_g, n_k), units of omega_b
    mean_phonon: np.ndarray             # (n_g, n_k, N_LOW_STATES)
    converged: np.ndarray               # (n_g,) bool
    divergent: np.ndarray               # (n_g,) bool: monotone fall, no Cauchy
    convergence_gap: np.ndarray         # (n_g,) |E0 change| over last cutoff pair


def collapse_scan(omega_qubit: float, g_grid, n_trunc_grid) -> SpectrumScan:
    """Scan ground-state convergence across the spectral-collapse point.

    omega_qubit and g_grid are in units of the boson frequency; g_grid must
    span both sides of the collapse coupling 0.5.
    """
    g_grid = np.asarray(g_grid, dtype=float)
    n_trunc_grid = np.asarray(n_trunc_grid, dtype=int)
    if g_grid.ndim != 1 or len(g_grid) < 1:
        raise InvalidScanError("g_grid must be a nonempty 1-d array")
    if len(n_trunc_grid) < 2 or np.any(np.diff(n_trunc_grid) <= 0):
        raise InvalidScanError("n_trunc_grid must be increasing with >= 2 entries")
    if not (g_grid.min() < 0.5 < g_grid.max()) and len(g_grid) > 1:
        raise InvalidScanError(
            f"g_grid [{g_grid.min():g}, {g_grid.max():g}] must span the "
            f"collapse coupling 0.5")

    energy = np.empty((len(g_grid), len(n_trunc_grid)))
    phonon = np.empty((len(g_grid), len(n_trunc_grid), N_LOW_STATES))
    for j, n_trunc in enumerate(n_trunc_grid):
        space = FockSpace(int(n_trunc))
        weights = np.tile(np.arange(n_trunc, dtype=float), 2)
        for i, g in enumerate(g_grid):
            params = TwoPhotonRabiParams(omega_qubit, 1.0, g)
            evals, evecs = eigenspectrum(params, space)
            energy[i, j] = evals[0]
            low = evecs[:, :N_LOW_STATES]
            phonon[i, j] = weights @ (np.abs(low) ** 2)

    gap = np.abs(energy[:, -1] - energy[:, -2])
    converged = gap < CONVERGENCE_GAP
    monotone = np.all(np.diff(energy, axis=1) < 0.0, axis=1)
    divergent = monotone & (gap > 10.0 * CONVERGENCE_GAP)
    return SpectrumScan(g_grid, n_trunc_grid, energy, phonon,
                        converged, divergent, gap)


def write_scan_csv(scan: SpectrumScan, fileobj) -> None:
    """Long-format CSV of a scan (one row per (g, n_trunc) point)."""
    heads = ",".join(f"nbar{k}" for k in range(N_LOW_STATES))
    fileobj.write(f"g_over_omega,n_trunc,e0_over_omega,{heads},converged,divergent\n")
    for i, g in enumerate(scan.g_over_omega):
        for j, n_trunc in enumerate(scan.n_trunc):
            nbars = ",".join(repr(float(x)) for x in scan.mean_phonon[i, j])
            fileobj.write(
                f"{float(g)!r},{int(n_trunc)},{float(scan.ground_energy[i, j])!r},"
                f"{nbars},{int(scan.converged[i])},{int(scan.divergent[i])}\n")
