"""Euler-Maruyama integration, ensembles, normalization, Langevin sampling.

Noise streams are keyed by (seed, member), so a member's trajectory is
bit-identical however many members run alongside it and however the steps
are chunked internally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .. import rng
from ..errors import ConstructionError, DegenerateDataError, InsufficientDataError, IntegrationError
from .models import SdeModel

_CHUNK_FLOATS = 1 << 22  # noise pre-generation buffer size per chunk


@dataclass
class Trajectory:
    """Time-ordered states (T, dim); row k sits at time k*stride*dt.

    Row 0 is the initial state, so the simulated span is (T-1)*stride*dt.
    """

    states: np.ndarray
    dt: float
    stride: int = 1
    normalization: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=np.float64))

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def sample_dt(self) -> float:
        return self.dt * self.stride

    @property
    def span(self) -> float:
        return (len(self) - 1) * self.sample_dt

    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.sample_dt


@dataclass(frozen=True)
class EnsembleSpec:
    n_members: int
    burn_in: float
    horizon: float
    seed: int = 0

    def __post_init__(self):
        if self.n_members < 1 or self.burn_in < 0 or self.horizon < 0:
            raise ConstructionError("invalid ensemble spec")


def _step(model: SdeModel, x: np.ndarray, dt: float, sqrt_dt: float, z: np.ndarray) -> np.ndarray:
    if model.diagonal_noise:
        return x + model.drift(x) * dt + model.noise(x) * (sqrt_dt * z)
    amp = model.noise(x)
    return x + model.drift(x) * dt + np.einsum("...ij,...j->...i", amp, z) * sqrt_dt


def _records_per_chunk(n_members: int, stride: int, wdim: int) -> int:
    return max(1, _CHUNK_FLOATS // max(1, n_members * stride * wdim))


def _advance(
    model: SdeModel,
    x: np.ndarray,
    gens: Sequence[np.random.Generator],
    dt: float,
    n_steps: int,
    out: np.ndarray | None,
    stride: int,
    step_offset: int = 0,
) -> np.ndarray:
    """Step a batch of states, optionally recording every `stride` steps."""
    m, _ = x.shape
    wdim = model.wiener_dim
    sqrt_dt = np.sqrt(dt)
    n_records = n_steps // stride if out is not None else 0
    rpc = _records_per_chunk(m, stride, wdim)
    done = 0
    rec = 0
    while done < n_steps:
        take = min(n_steps - done, rpc * stride)
        z = np.stack([g.standard_normal((take, wdim)) for g in gens], axis=1)  # (take, M, w)
        for s in range(take):
            x = _step(model, x, dt, sqrt_dt, z[s])
            done += 1
            if out is not None and done % stride == 0:
                if not np.isfinite(x).all():
                    raise IntegrationError(
                        f"non-finite state at step {step_offset + done}", step=step_offset + done
                    )
                out[rec] = x
                rec += 1
        if out is None and not np.isfinite(x).all():
            raise IntegrationError(
                f"non-finite state within burn-in by step {step_offset + done}",
                step=step_offset + done,
            )
    if out is not None and rec != n_records:
        raise AssertionError("record bookkeeping error")
    return x


def euler_maruyama(
    model: SdeModel,
    x0: np.ndarray | float,
    dt: float,
    n_steps: int,
    seed: int,
    stride: int = 1,
    member: int = 0,
) -> Trajectory:
    """Single-chain Euler-Maruyama: x_{k+1} = x_k + F(x_k) dt + sigma(x_k) sqrt(dt) z_k."""
    if dt <= 0:
        raise ConstructionError("dt must be positive")
    x = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x.shape != (model.dim,):
        raise ConstructionError(f"x0 shape {x.shape} != ({model.dim},)")
    if not np.isfinite(x).all():
        raise ConstructionError("x0 must be finite")
    n_rec = n_steps // stride
    out = np.empty((n_rec, 1, model.dim))
    _advance(model, x[None, :], [rng.stream(seed, member)], dt, n_rec * stride, out, stride)
    states = np.concatenate([x[None, :], out[:, 0, :]], axis=0)
    return Trajectory(states, dt=dt, stride=stride)


def stationary_chains(
    model: SdeModel,
    n_chains: int,
    samples_per_chain: int,
    dt: float,
    stride: int,
    burn_in: float,
    seed: int,
    x0: np.ndarray | None = None,
) -> list[Trajectory]:
    """Independent chains relaxed to stationarity, recorded every `stride` steps.

    The pooled rows across chains serve as steady-state samples; each chain is
    also a valid time series for lagged statistics.
    """
    n = model.dim
    if x0 is None:
        x0 = np.zeros(n)
    x = np.tile(np.asarray(x0, dtype=np.float64), (n_chains, 1))
    gens = [rng.stream(seed, m) for m in range(n_chains)]
    n_burn = int(round(burn_in / dt))
    x = _advance(model, x, gens, dt, n_burn, None, stride)
    out = np.empty((samples_per_chain, n_chains, n))
    _advance(model, x, gens, dt, samples_per_chain * stride, out, stride, step_offset=n_burn)
    return [Trajectory(out[:, m, :], dt=dt, stride=stride) for m in range(n_chains)]


def pool_states(chains: Sequence[Trajectory]) -> np.ndarray:
    return np.concatenate([t.states for t in chains], axis=0)


def ensemble_run(
    model: SdeModel,
    spec: EnsembleSpec,
    initial_draws: Trajectory | np.ndarray,
    dt: float,
    stride: int = 1,
    drift_extra: Callable[[np.ndarray], np.ndarray] | None = None,
    kick: Callable[[np.ndarray], np.ndarray] | None = None,
) -> list[Trajectory]:
    """Independent members from given initial states, distinct noise streams.

    `kick` displaces each member once after burn-in (impulse perturbations);
    `drift_extra` adds a constant-in-time forcing term to the drift (step
    perturbations).  Both default to the unperturbed dynamics.
    """
    states0 = initial_draws.states if isinstance(initial_draws, Trajectory) else np.atleast_2d(initial_draws)
    if states0.shape[0] < spec.n_members:
        raise InsufficientDataError(
            f"need {spec.n_members} initial states, got {states0.shape[0]}"
        )
    run_model = model
    if drift_extra is not None:
        base_drift = model.drift
        run_model = replace(model, drift=lambda x: base_drift(x) + drift_extra(x))

    x = states0[: spec.n_members].astype(np.float64).copy()
    gens = [rng.stream(spec.seed, m) for m in range(spec.n_members)]
    n_burn = int(round(spec.burn_in / dt))
    x = _advance(run_model, x, gens, dt, n_burn, None, stride)
    if kick is not None:
        x = x + kick(x)
    n_rec = int(round(spec.horizon / dt)) // stride
    out = np.empty((n_rec, spec.n_members, model.dim))
    _advance(run_model, x, gens, dt, n_rec * stride, out, stride, step_offset=n_burn)
    return [
        Trajectory(np.concatenate([x[m][None, :], out[:, m, :]], axis=0), dt=dt, stride=stride)
        for m in range(spec.n_members)
    ]


def langevin_sample(
    score,
    x0: np.ndarray | float,
    dt: float,
    n_steps: int,
    seed: int,
    stride: int = 1,
) -> Trajectory:
    """Integrate dx = s(x) dt + sqrt(2) dW with the given score model."""
    model = _langevin_model(score)
    try:
        return euler_maruyama(model, x0, dt, n_steps, seed, stride=stride)
    except IntegrationError as err:
        raise IntegrationError(
            f"Langevin sampling blew up at step {err.step}; try a smaller dt", step=err.step
        ) from err


def langevin_chains(
    score,
    x0_pool: np.ndarray,
    n_chains: int,
    samples_per_chain: int,
    dt: float,
    seed: int,
    burn_in: float = 0.0,
    stride: int = 1,
) -> list[Trajectory]:
    """Batched Langevin sampling started from rows of `x0_pool`."""
    model = _langevin_model(score)
    if x0_pool.shape[0] < n_chains:
        raise InsufficientDataError("not enough initial states for the requested chains")
    x = x0_pool[:n_chains].astype(np.float64).copy()
    gens = [rng.stream(seed, m) for m in range(n_chains)]
    try:
        x = _advance(model, x, gens, dt, int(round(burn_in / dt)), None, stride)
        out = np.empty((samples_per_chain, n_chains, model.dim))
        _advance(model, x, gens, dt, samples_per_chain * stride, out, stride)
    except IntegrationError as err:
        raise IntegrationError(
            f"Langevin sampling blew up at step {err.step}; try a smaller dt", step=err.step
        ) from err
    return [Trajectory(out[:, m, :], dt=dt, stride=stride) for m in range(n_chains)]


def _langevin_model(score) -> SdeModel:
    dim = score.dim

    def noise(x):
        return np.broadcast_to(np.full(dim, np.sqrt(2.0)), x.shape)

    return SdeModel(dim, score.evaluate, noise, additive=True, name="langevin")


def normalize(traj: Trajectory) -> tuple[Trajectory, np.ndarray, np.ndarray]:
    """Per-dimension zero mean, unit variance (population convention)."""
    if len(traj) < 2:
        raise InsufficientDataError("need at least two samples to normalize")
    mean = traj.states.mean(axis=0)
    std = traj.states.std(axis=0)  # ddof=0
    if np.any(std == 0.0):
        raise DegenerateDataError(f"zero-variance dimensions: {np.where(std == 0.0)[0].tolist()}")
    out = Trajectory(
        (traj.states - mean) / std, dt=traj.dt, stride=traj.stride, normalization=(mean, std)
    )
    return out, mean, std


def apply_normalization(states: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (states - mean) / std


def denormalize(traj: Trajectory, mean: np.ndarray, std: np.ndarray) -> Trajectory:
    return Trajectory(traj.states * std + mean, dt=traj.dt, stride=traj.stride)
