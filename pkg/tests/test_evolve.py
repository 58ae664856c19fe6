import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tprabi.errors import (ConfigurationError, InvalidDimensionError,
                           TruncationOverflowError)
from tprabi.evolve import (IntegratorSettings, _propagate_ion_batch,
                           build_output_grid, check_dt, ensemble, fidelity,
                           frame_align, full_drive_fmax, interaction_fmax,
                           max_stable_dt, propagate, reference_states,
                           run_trajectory)
from tprabi.hilbert import FockSpace
from tprabi.models import (TwoPhotonRabiParams, h_2pqrm, h_ion_full,
                           h_two_photon_interaction)
from tprabi.noise import trajectory_seed
from tprabi.presets import all_presets, build_run, initial_state

TWO_PI = 2 * math.pi


def desk_preset(tag="u", scenario="fig1ef"):
    return all_presets()[f"{scenario}-{tag}-desk"]


def short_run(preset, t_total, n_out=4, n_trunc=24, noise_on=False,
              dt_scale=1.0, tol=1e-6):
    run = build_run(preset, n_trunc=n_trunc, n_out=n_out, noise_on=noise_on,
                    max_top_level_population=tol)
    cap = max_stable_dt(full_drive_fmax(run.ion, run.scheme)) * dt_scale
    t_grid, dt = build_output_grid(t_total, n_out, cap)
    return dataclasses.replace(
        run, t_grid=t_grid,
        settings=dataclasses.replace(run.settings, dt=dt))


# ---------------------------------------------------------------------------
# fidelity
# ---------------------------------------------------------------------------

def test_fidelity_identical_and_orthogonal():
    a = np.array([1.0, 0.0], dtype=complex)
    b = np.array([0.0, 1.0], dtype=complex)
    assert fidelity(a, a) == 1.0
    assert fidelity(a, b) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-math.pi, math.pi))
def test_fidelity_global_phase_invariant(theta):
    rng = np.random.default_rng(11)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    assert fidelity(psi, np.exp(1j * theta) * psi) == pytest.approx(1.0)


def test_fidelity_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        fidelity(np.ones(2, dtype=complex), np.ones(4, dtype=complex))


# ---------------------------------------------------------------------------
# generic propagation
# ---------------------------------------------------------------------------

def test_propagate_zero_hamiltonian_is_constant():
    rng = np.random.default_rng(0)
    psi0 = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi0 /= np.linalg.norm(psi0)
    grid, dt = build_output_grid(1.0, 5, 0.01)
    res = propagate(lambda t: np.zeros((8, 8), dtype=complex), psi0,
                    IntegratorSettings(dt=dt), grid)
    assert np.allclose(res.states[-1], psi0, atol=1e-14)


def test_propagate_constant_h_matches_eigendecomposition():
    rng = np.random.default_rng(4)
    dim = 20
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (mat + mat.conj().T) / 2
    psi0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi0 /= np.linalg.norm(psi0)
    t_end = 2.0 / np.abs(np.linalg.eigvalsh(h)).max()
    grid, dt = build_output_grid(t_end, 4, t_end / 1000)
    res = propagate(lambda t: h, psi0, IntegratorSettings(dt=dt), grid)
    evals, evecs = np.linalg.eigh(h)
    exact = evecs @ (np.exp(-1j * evals * t_end) * (evecs.conj().T @ psi0))
    assert np.abs(res.states[-1] - exact).max() < 1e-10
    assert res.norm_drift_max < 1e-9


def test_propagate_diagonal_phase_evolution():
    # ideal model with g = 0, Omega_q = 0: |<n|psi>| constant, phase -w0 n t
    space = FockSpace(6)
    w0 = TWO_PI * 500.0
    h = h_2pqrm(TwoPhotonRabiParams(0.0, w0, 0.0), space)
    psi0 = np.zeros(12, dtype=complex)
    psi0[2] = 1 / math.sqrt(2)          # up, n=2
    psi0[6 + 3] = 1 / math.sqrt(2)      # down, n=3
    t_end = 3.3e-3
    grid, dt = build_output_grid(t_end, 3, 1.0 / (50 * 500 * 6))
    res = propagate(lambda t: h, psi0, IntegratorSettings(dt=dt), grid)
    final = res.states[-1]
    assert abs(final[2]) == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    assert final[2] / psi0[2] == pytest.approx(np.exp(-1j * w0 * 2 * t_end),
                                               abs=1e-8)
    assert final[6 + 3] / psi0[6 + 3] == pytest.approx(
        np.exp(-1j * w0 * 3 * t_end), abs=1e-8)


def test_propagate_grid_must_match_dt():
    with pytest.raises(ConfigurationError):
        propagate(lambda t: np.zeros((2, 2), dtype=complex),
                  np.array([1, 0], dtype=complex),
                  IntegratorSettings(dt=0.3), np.linspace(0, 1, 3))


def test_check_dt_violation_message():
    with pytest.raises(ConfigurationError, match="1/\\(50 f_max\\)"):
        check_dt(IntegratorSettings(dt=1e-3), f_max=1e3)


# ---------------------------------------------------------------------------
# frames and references
# ---------------------------------------------------------------------------

def test_frame_align_identity_at_t0_and_unprotected():
    p = desk_preset("p")
    run = build_run(p, n_trunc=8, noise_on=False)
    psi = run.psi0
    assert np.allclose(frame_align(run.scheme, 0.0, psi), psi)
    u_run = build_run(desk_preset("u"), n_trunc=8, noise_on=False)
    t = 1.7e-4
    assert np.allclose(frame_align(u_run.scheme, t, u_run.psi0), u_run.psi0)


def test_frame_align_full_rotation_is_global_phase():
    p = desk_preset("p")
    run = build_run(p, n_trunc=8, noise_on=False)
    t_full = TWO_PI / run.scheme.omega_dd
    rng = np.random.default_rng(2)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    aligned = frame_align(run.scheme, t_full, psi)
    assert fidelity(aligned, psi) == pytest.approx(1.0, abs=1e-12)


def test_reference_constant_when_free_unprotected():
    # g = 0: the frame rotation cancels the free evolution exactly
    space = FockSpace(6)
    w0 = TWO_PI * 450.0
    params = TwoPhotonRabiParams(3 * w0, w0, 0.0)
    scheme = dataclasses.replace(
        build_run(desk_preset("u"), n_trunc=6, noise_on=False).scheme,
        target=params)
    psi0 = initial_state("down_perp|0", "unprotected", space)
    t_grid = np.linspace(0, 5e-3, 7)
    ref = reference_states(scheme, params, psi0, t_grid, space)
    assert np.allclose(ref, psi0[None, :], atol=1e-12)


def test_reference_phonon_number_frame_insensitive():
    run = build_run(desk_preset("u"), n_trunc=20, noise_on=False)
    params = run.scheme.target
    ref = reference_states(run.scheme, params, run.psi0, run.t_grid, run.space)
    # recompute without the frame rotation: plain exp(-i H t)
    evals, evecs = np.linalg.eigh(h_2pqrm(params, run.space))
    coeff = evecs.conj().T @ run.psi0
    bare = (evecs @ (np.exp(-1j * np.outer(evals, run.t_grid)) * coeff[:, None])).T
    n_op = np.tile(np.arange(20, dtype=float), 2)
    n_ref = (np.abs(ref) ** 2) @ n_op
    n_bare = (np.abs(bare) ** 2) @ n_op
    np.testing.assert_allclose(n_ref, n_bare, atol=1e-12)


def test_reference_matches_direct_integration():
    # independent oracle: numeric integration of the ideal model plus the
    # analytic frame rotation
    p = desk_preset("u")
    run = build_run(p, n_trunc=24, n_out=10, noise_on=False)
    params = run.scheme.target
    space = run.space
    h = h_2pqrm(params, space)
    f_scale = max(params.omega_qubit, params.omega_boson * 24,
                  params.coupling * 24) / TWO_PI
    t_grid, dt = build_output_grid(run.t_grid[-1], 10, 1 / (50 * f_scale))
    res = propagate(lambda t: h, run.psi0, IntegratorSettings(dt=dt), t_grid)
    n_diag = np.tile(np.arange(24, dtype=float), 2)
    f_diag = params.omega_boson * n_diag \
        + 0.5 * params.omega_qubit * np.repeat([1.0, -1.0], 24)
    ref = reference_states(run.scheme, params, run.psi0, t_grid, space)
    for i, t in enumerate(t_grid):
        rotated = np.exp(1j * f_diag * t) * res.states[i]
        assert fidelity(rotated, ref[i]) > 1 - 1e-8


@pytest.mark.parametrize("scenario", ["fig1ab", "fig1cd", "fig1ef"])
@pytest.mark.parametrize("tag", ["u", "p"])
def test_frame_equivalence_interaction_vs_reference(scenario, tag):
    # evolving under the sideband-interaction Hamiltonian equals the
    # analytically frame-rotated ideal evolution (exact identity; the
    # residual is integrator error)
    p = all_presets()[f"{scenario}-{tag}-paper"]
    run = build_run(p, n_trunc=48, n_out=20, noise_on=False)
    cap = max_stable_dt(interaction_fmax(run.scheme))
    t_grid, dt = build_output_grid(p.t_total, 20, 0.25 * cap)
    res = propagate(lambda t: h_two_photon_interaction(t, run.scheme, run.space),
                    run.psi0, IntegratorSettings(dt=dt), t_grid, run.space)
    ref = reference_states(run.scheme, run.scheme.target, run.psi0, t_grid,
                           run.space)
    fids = [fidelity(res.states[i], ref[i]) for i in range(len(t_grid))]
    assert min(fids) >= 1 - 1e-6


# ---------------------------------------------------------------------------
# full-ion trajectories
# ---------------------------------------------------------------------------

def test_jit_and_numpy_steppers_agree():
    import tprabi.evolve as ev
    if ev._ion_steps_jit is None:
        pytest.skip("numba not available")
    run = short_run(desk_preset("p"), 1e-5, n_out=1)
    k = round((run.t_grid[1] - run.t_grid[0]) / run.settings.dt)
    n = run.space.n_trunc
    rng = np.random.default_rng(3)
    z0 = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    z0 /= np.linalg.norm(z0[:, :2])
    xi = rng.normal(0, 3000.0, (k, 2))
    d, w = np.linalg.eigh(np.diag(np.sqrt(np.arange(1, n)), 1)
                          + np.diag(np.sqrt(np.arange(1, n)), -1))
    dt = run.settings.dt
    shift = (w.T @ (np.exp(-1j * run.ion.trap_freq * dt
                           * np.arange(n))[:, None] * w)).astype(complex)
    amps = np.array([0.5 * l.rabi for l in run.ion.lasers])
    dfreq = np.array([run.ion.qubit_splitting - l.frequency
                      for l in run.ion.lasers])
    phis = np.array([l.phase for l in run.ion.lasers])
    eig = np.exp(1j * np.outer([l.lamb_dicke for l in run.ion.lasers], d))
    args = (xi, 0, k, shift, eig, amps, dfreq, phis, 0.0, dt)
    za, da = ev._ion_steps_numpy(z0.copy(), *args)
    zb, db = ev._ion_steps_jit(z0.copy(), *args)
    assert np.abs(za - zb).max() < 1e-12
    assert abs(da - db) < 1e-12


def test_ion_batch_matches_generic_propagator():
    run = short_run(desk_preset("p"), 2e-5)
    k = round((run.t_grid[1] - run.t_grid[0]) / run.settings.dt)
    n_steps = k * (len(run.t_grid) - 1)
    rng = np.random.default_rng(0)
    xi = rng.normal(0.0, 3000.0, (n_steps, 1))
    states, drift, _ = _propagate_ion_batch(
        run.ion, run.space, run.settings, run.t_grid, run.psi0[:, None], xi)
    dt = (run.t_grid[-1] - run.t_grid[0]) / n_steps

    def held(t):
        idx = min(int((t - run.t_grid[0]) / dt), n_steps - 1)
        return h_ion_full(t, run.ion, xi[idx, 0], run.space)

    res = propagate(held, run.psi0, run.settings, run.t_grid, run.space)
    assert np.abs(states[:, :, 0] - res.states).max() < 1e-11
    assert drift < 1e-12


def test_trajectory_determinism_same_seed():
    run = short_run(desk_preset("u"), 1e-4, noise_on=True)
    rec1 = run_trajectory(run, seed=1234)
    rec2 = run_trajectory(run, seed=1234)
    for name in ("sigma_par", "sigma_perp", "sigma_y", "n_boson", "fidelity"):
        assert np.array_equal(getattr(rec1, name), getattr(rec2, name))


def test_trajectory_observables_sane():
    run = short_run(desk_preset("u"), 2e-4, noise_on=True)
    rec = run_trajectory(run, seed=7)
    for name in ("sigma_par", "sigma_perp", "sigma_y"):
        assert np.all(np.abs(getattr(rec, name)) <= 1 + 1e-9)
    assert np.all(rec.fidelity <= 1 + 1e-9) and np.all(rec.fidelity >= 0)
    assert rec.norm_drift_max < 1e-9


def test_noise_off_equals_zero_noise():
    run_off = short_run(desk_preset("u"), 1e-4, noise_on=False)
    rec_off = run_trajectory(run_off, seed=5)
    rec_off2 = run_trajectory(run_off, seed=99)
    assert np.array_equal(rec_off.fidelity, rec_off2.fidelity)


def test_truncation_overflow_reports_time_and_seed():
    run = short_run(desk_preset("u"), 2.5e-3, n_trunc=8, noise_on=False,
                    tol=1e-8)
    with pytest.raises(TruncationOverflowError) as exc:
        run_trajectory(run, seed=3)
    assert exc.value.time > 0
    assert "seed" in str(exc.value)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def test_ensemble_single_trajectory_mean_and_zero_stderr():
    run = short_run(desk_preset("u"), 1e-4, noise_on=True)
    res = ensemble(run, n_traj=1, master_seed=42, threads=1)
    rec = run_trajectory(run, trajectory_seed(42, 0))
    assert np.array_equal(res.means["fidelity"], rec.fidelity)
    assert np.all(res.stderrs["fidelity"] == 0.0)


def test_ensemble_deterministic_across_worker_counts():
    run = short_run(desk_preset("u"), 1e-4, noise_on=True)
    serial = ensemble(run, n_traj=30, master_seed=9, threads=1)
    parallel = ensemble(run, n_traj=30, master_seed=9, threads=2)
    for name in serial.means:
        assert np.array_equal(serial.means[name], parallel.means[name])
        assert np.array_equal(serial.stderrs[name], parallel.stderrs[name])


def test_ensemble_rejects_empty():
    run = short_run(desk_preset("u"), 1e-4)
    with pytest.raises(ConfigurationError):
        ensemble(run, n_traj=0, master_seed=1)


def test_dt_halving_reduces_observable_error():
    # second-order midpoint: error ratio between dt and dt/2 runs ~ 4x
    preset = desk_preset("u")
    runs = {}
    for scale in (1.0, 0.5, 0.25):
        run = short_run(preset, 1.0e-3, n_out=4, n_trunc=40, dt_scale=scale,
                        tol=1e-5)
        runs[scale] = run_trajectory(run, seed=1)
    err_coarse = {}
    err_fine = {}
    for name in ("sigma_par", "sigma_perp", "n_boson", "fidelity"):
        a, b, c = (getattr(runs[s], name) for s in (1.0, 0.5, 0.25))
        err_coarse[name] = np.abs(a - b).max()
        err_fine[name] = np.abs(b - c).max()
        assert err_coarse[name] < 1e-4
    ratios = [err_coarse[n] / err_fine[n] for n in err_coarse
              if err_fine[n] > 1e-13]
    assert ratios and min(ratios) >= 3.0
