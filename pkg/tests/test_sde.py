"""Integrator, model-library, normalization, and persistence tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorefdt import sde
from scorefdt.errors import (
    ConstructionError,
    DegenerateDataError,
    InsufficientDataError,
    IntegrationError,
)


def zero_noise(model):
    return sde.SdeModel(model.dim, model.drift, lambda x: np.zeros_like(x), additive=True)


def test_deterministic_euler_single_step():
    model = sde.SdeModel(1, lambda x: -x, lambda x: np.zeros_like(x), additive=True)
    traj = sde.euler_maruyama(model, 1.0, dt=0.1, n_steps=1, seed=0)
    assert traj.states[-1, 0] == pytest.approx(0.9)


def test_scalar_drift_single_step_from_origin():
    # F(0) = F = 0.6 from the published table; one noiseless step of dt=0.01
    model = zero_noise(sde.make_scalar())
    traj = sde.euler_maruyama(model, 0.0, dt=0.01, n_steps=1, seed=0)
    assert traj.states[-1, 0] == pytest.approx(0.006)


def test_scalar_drift_value_at_zero():
    model = sde.make_scalar()
    assert model.drift(np.array([0.0]))[0] == pytest.approx(0.6)


def test_ou_stationary_variance():
    model = sde.ornstein_uhlenbeck()
    chains = sde.stationary_chains(model, n_chains=32, samples_per_chain=4000, dt=0.01, stride=10, burn_in=10.0, seed=1)
    x = sde.pool_states(chains)[:, 0]
    # tau_int ~ 1 time unit = 10 retained samples
    n_eff = x.size / 20
    se = np.sqrt(2.0 / n_eff)
    assert abs(x.var() - 1.0) < 3 * se


def test_ou_weak_convergence_halving_dt():
    # Coupled-noise comparison: the fine path uses increments z, the coarse
    # path their pairwise sums, so the dt bias is isolated from MC noise.
    n_coarse, chains = 31_250, 32
    dt = 0.01
    gen = np.random.default_rng(7)
    xc = np.zeros(chains)
    xf = np.zeros(chains)
    coarse_samples, fine_samples = [], []
    for k in range(n_coarse):
        z = gen.standard_normal((2, chains))
        for half in range(2):
            xf = xf + (-xf) * (dt / 2) + np.sqrt(2 * dt / 2) * z[half]
        zc = (z[0] + z[1]) / np.sqrt(2.0)
        xc = xc + (-xc) * dt + np.sqrt(2 * dt) * zc
        if k >= 1000 and k % 10 == 0:
            coarse_samples.append(xc.copy())
            fine_samples.append(xf.copy())
    v_coarse = np.concatenate(coarse_samples).var()
    v_fine = np.concatenate(fine_samples).var()
    n_eff = len(coarse_samples) * chains / 20
    se = np.sqrt(2.0 / n_eff)
    assert abs(v_coarse - v_fine) < se


def test_triad_drift_and_noise_at_origin():
    model = sde.make_triad()
    np.testing.assert_allclose(model.drift(np.zeros(3)), np.zeros(3))
    assert model.noise(np.zeros(3))[2] == pytest.approx(1.5)
    assert not model.additive


@given(st.floats(min_value=-50, max_value=50, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_triad_noise_amplitude_bounded(u1):
    val = sde.triad_sigma_tau(np.array([u1]))[0]
    assert 0.0 <= val <= 3.0


def test_barotropic_damping_vanishes_at_background_state():
    p = sde.BarotropicModelParams()
    model = sde.make_barotropic(p)
    x = np.array([p.x1_star, 0, 0, p.x4_star, 0, 0], dtype=float)
    d = model.drift(x)
    assert d[0] == pytest.approx(0.0)
    assert d[3] == pytest.approx(0.0)


def test_invalid_params_raise_construction_error():
    with pytest.raises(ConstructionError):
        sde.make_scalar(sde.ScalarModelParams(c=-1.0))
    with pytest.raises(ConstructionError):
        sde.make_triad(sde.TriadModelParams(d_u=0.0))
    with pytest.raises(ConstructionError):
        sde.make_barotropic(sde.BarotropicModelParams(sigma=0.0))


def test_blowup_raises_with_step():
    model = sde.SdeModel(1, lambda x: x**3, lambda x: np.zeros_like(x), additive=True)
    with pytest.raises(IntegrationError) as exc:
        sde.euler_maruyama(model, 10.0, dt=1.0, n_steps=50, seed=0)
    assert exc.value.step is not None


def test_trajectory_reproducible_for_fixed_seed_and_member():
    model = sde.make_triad()
    a = sde.euler_maruyama(model, np.zeros(3), dt=0.01, n_steps=500, seed=42, member=3)
    b = sde.euler_maruyama(model, np.zeros(3), dt=0.01, n_steps=500, seed=42, member=3)
    np.testing.assert_array_equal(a.states, b.states)


def test_ensemble_members_use_distinct_streams():
    model = sde.ornstein_uhlenbeck()
    init = np.zeros((2, 1))
    spec = sde.EnsembleSpec(n_members=2, burn_in=0.0, horizon=1.0, seed=5)
    members = sde.ensemble_run(model, spec, init, dt=0.01)
    assert not np.allclose(members[0].states, members[1].states)
    # member trajectory equals a solo run with the same (seed, member) keying
    solo = sde.euler_maruyama(model, np.zeros(1), dt=0.01, n_steps=100, seed=5, member=1)
    np.testing.assert_array_equal(members[1].states, solo.states)


def test_ensemble_zero_horizon_returns_initial_states():
    model = sde.ornstein_uhlenbeck()
    init = np.arange(6, dtype=float).reshape(6, 1)
    spec = sde.EnsembleSpec(n_members=6, burn_in=0.0, horizon=0.0, seed=0)
    members = sde.ensemble_run(model, spec, init, dt=0.01)
    for m, traj in enumerate(members):
        np.testing.assert_array_equal(traj.states, init[m][None, :])


def test_ensemble_requires_enough_initial_states():
    model = sde.ornstein_uhlenbeck()
    spec = sde.EnsembleSpec(n_members=10, burn_in=0.0, horizon=1.0, seed=0)
    with pytest.raises(InsufficientDataError):
        sde.ensemble_run(model, spec, np.zeros((3, 1)), dt=0.01)


def test_ou_ensemble_mean_decay():
    model = sde.ornstein_uhlenbeck()
    x0 = 2.0
    spec = sde.EnsembleSpec(n_members=512, burn_in=0.0, horizon=1.0, seed=9)
    members = sde.ensemble_run(model, spec, np.full((512, 1), x0), dt=0.01, stride=10)
    states = np.stack([m.states[:, 0] for m in members])  # (M, T)
    t = members[0].times()
    mean = states.mean(axis=0)
    se = states.std(axis=0) / np.sqrt(512)
    expected = x0 * np.exp(-t)
    assert np.all(np.abs(mean - expected) < 3 * se + 1e-9)


def test_normalize_shifted_data():
    gen = np.random.default_rng(0)
    base = gen.standard_normal((500, 2))
    shifted = sde.Trajectory(base + 5.0, dt=0.1)
    out, mean, std = sde.normalize(shifted)
    np.testing.assert_allclose(mean, base.mean(axis=0) + 5.0)
    np.testing.assert_allclose(out.states.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.states.var(axis=0), 1.0, rtol=1e-12)


def test_normalize_two_point_data_is_identity():
    traj = sde.Trajectory(np.array([[-1.0], [1.0]]), dt=1.0)
    out, mean, std = sde.normalize(traj)
    np.testing.assert_allclose(out.states, traj.states)
    assert mean[0] == 0.0 and std[0] == 1.0


def test_normalize_zero_variance_rejected():
    traj = sde.Trajectory(np.ones((10, 1)), dt=1.0)
    with pytest.raises(DegenerateDataError):
        sde.normalize(traj)


@given(st.integers(min_value=0, max_value=2**31))
@settings(max_examples=30, deadline=None)
def test_normalization_round_trip(seed):
    gen = np.random.default_rng(seed)
    states = gen.standard_normal((64, 3)) * gen.uniform(0.5, 4.0, 3) + gen.uniform(-5, 5, 3)
    traj = sde.Trajectory(states, dt=0.01)
    out, mean, std = sde.normalize(traj)
    back = sde.denormalize(out, mean, std)
    np.testing.assert_allclose(back.states, states, atol=1e-12)


def test_langevin_linear_score_is_ou():
    class LinearScore:
        dim = 1

        def evaluate(self, x):
            return -x

    traj = sde.langevin_sample(LinearScore(), 0.0, dt=0.01, n_steps=200_000, seed=3, stride=10)
    x = traj.states[2000:, 0]
    n_eff = x.size / 20
    assert abs(x.var() - 1.0) < 3 * np.sqrt(2.0 / n_eff)


def test_langevin_zero_score_is_brownian():
    class ZeroScore:
        dim = 1

        def evaluate(self, x):
            return np.zeros_like(x)

    # pure diffusion: Var[x(t)] = 2t; average over many chains
    chains = sde.langevin_chains(
        ZeroScore(), np.zeros((256, 1)), n_chains=256, samples_per_chain=100, dt=0.01, seed=4
    )
    states = np.stack([c.states[:, 0] for c in chains])  # (M, T)
    t_final = chains[0].times()[-1] + chains[0].sample_dt  # row k is after (k+1) steps here
    var = states[:, -1].var()
    se = var * np.sqrt(2.0 / 256)
    assert abs(var - 2 * t_final) < 3 * se + 0.05


def test_decorrelation_lag_on_ou():
    model = sde.ornstein_uhlenbeck()
    traj = sde.euler_maruyama(model, 0.0, dt=0.01, n_steps=200_000, seed=11)
    lag = sde.decorrelation_lag(traj.states, threshold=0.2)
    # OU acf = exp(-t): crosses 0.2 at t = 1.61, i.e. lag ~161 steps of 0.01
    assert 100 < lag < 260


def test_trajectory_io_round_trips(tmp_path):
    model = sde.make_triad()
    traj = sde.euler_maruyama(model, np.zeros(3), dt=0.01, n_steps=200, seed=1, stride=2)
    bpath = tmp_path / "traj.bin"
    sde.save_trajectory_binary(bpath, traj)
    back = sde.load_trajectory_binary(bpath)
    np.testing.assert_array_equal(back.states, traj.states)
    assert back.dt == traj.dt and back.stride == traj.stride

    cpath = tmp_path / "traj.csv"
    sde.save_trajectory_csv(cpath, traj)
    back_csv = sde.load_trajectory_csv(cpath, dt=0.01, stride=2)
    np.testing.assert_allclose(back_csv.states, traj.states, atol=1e-12)
