"""Fluctuation-dissipation response machinery.

The impulse-response function of an observable A under a perturbation
u(x) f(t) is the steady-state correlation R(t) = <A(x(t)) B(x(0))> with the
conjugate observable B(x) = -div u(x) - u(x) . score(x).  Responses to a
general temporal profile follow by convolution, and ensemble differencing
of perturbed/unperturbed runs provides ground truth for validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConstructionError, DimensionError, InsufficientDataError
from .scores import NormalizationTransform, ScoreModel
from .sde.integrators import EnsembleSpec, Trajectory, ensemble_run
from .sde.models import SdeModel
from .sde.stats import decorrelation_lag


@dataclass(frozen=True)
class Perturbation:
    """Spatial forcing direction u(x) with its state-space divergence.

    `constant` marks state-independent u, for which responses are reported
    per unit amplitude.  div_u may be a callable or a precomputed constant.
    """

    dim: int
    u: Callable[[np.ndarray], np.ndarray]
    div_u: Callable[[np.ndarray], np.ndarray] | float
    constant: bool
    amplitude: float = 1.0
    name: str = ""

    def divergence(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if callable(self.div_u):
            return np.asarray(self.div_u(x), dtype=np.float64)
        return np.broadcast_to(np.float64(self.div_u), x.shape[:-1])


def constant_perturbation(direction: np.ndarray, amplitude: float = 1.0, name: str = "") -> Perturbation:
    direction = np.atleast_1d(np.asarray(direction, dtype=np.float64))
    vec = amplitude * direction

    def u(x):
        return np.broadcast_to(vec, np.asarray(x).shape)

    return Perturbation(direction.size, u, 0.0, constant=True, amplitude=amplitude, name=name or "constant")


def triad_damping_perturbation(delta_d_tau: float = -0.4) -> Perturbation:
    """Damping change of the fast triad variable: u(x) = (0, 0, -tau) * delta.

    With the published delta_d_tau = -0.4 this is u = (0, 0, 0.4 tau) and
    div u = 0.4, stored rather than recomputed.
    """

    def u(x):
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        out[..., 2] = -delta_d_tau * x[..., 2]
        return out

    return Perturbation(3, u, -delta_d_tau, constant=False, amplitude=1.0, name="triad-damping")


def normalized_perturbation(pert: Perturbation, transform: NormalizationTransform) -> Perturbation:
    """Express an original-coordinate perturbation in normalized coordinates.

    For y = (x - m)/s: u_y(y) = u_x(x(y))/s and div_y u_y(y) = div_x u_x(x(y)).
    """

    def u(y):
        return pert.u(transform.to_original(y)) / transform.std

    def div(y):
        return pert.divergence(transform.to_original(y))

    return Perturbation(
        pert.dim, u, div, constant=pert.constant, amplitude=pert.amplitude, name=pert.name
    )


@dataclass
class ConjugateObservable:
    """B(x) = -div u(x) - u(x) . s(x)."""

    score: ScoreModel
    pert: Perturbation

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return -self.pert.divergence(x) - np.sum(self.pert.u(x) * self.score.evaluate(x), axis=-1)


def conjugate(score: ScoreModel, pert: Perturbation) -> ConjugateObservable:
    if score.dim != pert.dim:
        raise DimensionError(f"score dim {score.dim} != perturbation dim {pert.dim}")
    return ConjugateObservable(score, pert)


@dataclass(frozen=True)
class MomentObservable:
    """(x_i - mu_i)^order with a fixed reference mean from unperturbed data."""

    component: int
    order: int
    mu_ref: float = 0.0
    centered: bool = True

    def __post_init__(self):
        if not (1 <= self.order <= 5):
            raise ConstructionError("moment order must be in 1..5")

    @property
    def id(self) -> str:
        return f"x{self.component + 1}^m{self.order}"

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        v = np.asarray(states, dtype=np.float64)[..., self.component]
        if self.centered:
            v = v - self.mu_ref
        return v**self.order


@dataclass
class ResponseSeries:
    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    observable: str
    method: str

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.stderr = np.asarray(self.stderr, dtype=np.float64)
        if self.lags[0] != 0.0 or np.any(np.diff(self.lags) <= 0):
            raise ConstructionError("lags must increase strictly from 0")


def response_series(
    traj: Trajectory | Sequence[Trajectory],
    A: MomentObservable,
    B: ConjugateObservable,
    max_lag: float,
    lag_stride: int = 1,
    method: str = "gfdt",
    block_length: int | None = None,
    normalize_by_amplitude: bool = True,
) -> ResponseSeries:
    """R(t_k) = time average of A(x_{m+k}) B(x_m) over origins m.

    Accepts a single trajectory or a list of independent chains (pooled).
    Standard errors come from non-overlapping block means; blocks never
    span chains.  For state-independent perturbations the series is
    divided by the perturbation amplitude.
    """
    chains = [traj] if isinstance(traj, Trajectory) else list(traj)
    sample_dt = chains[0].sample_dt
    lag_dt = sample_dt * lag_stride
    n_lags = int(np.floor(max_lag / lag_dt + 1e-9)) + 1
    lag_samples = np.arange(n_lags) * lag_stride
    t_min = min(len(c) for c in chains)
    pairs_at_max = sum(max(0, len(c) - lag_samples[-1]) for c in chains)
    if pairs_at_max < 1000:
        need = lag_samples[-1] + 1000
        raise InsufficientDataError(
            f"only {pairs_at_max} origin pairs at max lag; need chains of ~{need} samples"
        )
    if t_min <= lag_samples[-1]:
        raise InsufficientDataError("a chain is shorter than the requested max lag")

    a_series = [A.evaluate(c.states) for c in chains]
    b_series = [B.evaluate(c.states) for c in chains]

    if block_length is None:
        tau = decorrelation_lag(b_series[0][: min(len(b_series[0]), 50_000)][:, None])
        block_length = 50 * tau
    n_origin_min = t_min - lag_samples[-1]
    block_length = int(max(1, min(block_length, n_origin_min // 2 if len(chains) == 1 else n_origin_min)))

    values = np.empty(n_lags)
    stderr = np.empty(n_lags)
    for j, k in enumerate(lag_samples):
        prods = [a[k:] * b[: len(b) - k if k else None] for a, b in zip(a_series, b_series)]
        total = sum(p.sum() for p in prods)
        count = sum(p.size for p in prods)
        values[j] = total / count
        block_means = []
        for p in prods:
            nb = p.size // block_length
            if nb >= 1:
                block_means.append(p[: nb * block_length].reshape(nb, block_length).mean(axis=1))
        bm = np.concatenate(block_means)
        stderr[j] = bm.std(ddof=1) / np.sqrt(bm.size) if bm.size > 1 else np.inf

    if normalize_by_amplitude and B.pert.constant and B.pert.amplitude != 0:
        values = values / B.pert.amplitude
        stderr = stderr / abs(B.pert.amplitude)
    return ResponseSeries(lag_samples * sample_dt, values, stderr, A.id, method)


@dataclass(frozen=True)
class TemporalProfile:
    """f(t): impulse (area = amplitude), constant step, or sampled values."""

    kind: str
    amplitude: float = 1.0
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("impulse", "constant", "sampled"):
            raise ConstructionError(f"unknown temporal profile {self.kind!r}")
        if self.kind == "sampled" and self.values is None:
            raise ConstructionError("sampled profile needs values")


def convolve_response(series: ResponseSeries, f: TemporalProfile) -> ResponseSeries:
    """<dA(t)> = integral_0^t R(t - t') f(t') dt' by the trapezoid rule."""
    t = series.lags
    r = series.values
    if f.kind == "impulse":
        vals = f.amplitude * r
        errs = abs(f.amplitude) * series.stderr
    else:
        if f.kind == "constant":
            fv = np.full_like(r, f.amplitude)
        else:
            fv = np.asarray(f.values, dtype=np.float64)
            if fv.shape != r.shape:
                raise InsufficientDataError("sampled profile must cover the series lag grid")
        dt = t[1] - t[0] if t.size > 1 else 0.0
        vals = np.zeros_like(r)
        errs = np.zeros_like(r)
        for k in range(t.size):
            integrand = r[: k + 1][::-1] * fv[: k + 1]
            vals[k] = np.trapz(integrand, dx=dt)
            errs[k] = np.trapz(series.stderr[: k + 1][::-1] * np.abs(fv[: k + 1]), dx=dt)
    return ResponseSeries(t, vals, errs, series.observable, series.method + "+conv")


def ensemble_truth(
    model: SdeModel,
    pert: Perturbation,
    spec: EnsembleSpec,
    observables: Sequence[MomentObservable],
    initial_draws: Trajectory | np.ndarray,
    dt: float,
    transform: NormalizationTransform | None = None,
    kick_amplitude: float = 0.1,
    lag_stride: int = 1,
    mode: str = "impulse",
) -> dict[str, ResponseSeries]:
    """Ground-truth responses by differencing paired perturbed/unperturbed runs.

    Members share noise streams (common random numbers).  `pert` is given in
    original model coordinates; observables are evaluated in normalized
    coordinates via `transform`.  Impulse mode kicks x += eps*u(x) once at
    t=0; step mode adds eps*u(x) to the drift for t >= 0.  Responses are
    divided by eps (and by the perturbation amplitude when state-independent).
    """
    if mode not in ("impulse", "step"):
        raise ConstructionError(f"unknown truth mode {mode!r}")
    eps = kick_amplitude
    unpert = ensemble_run(model, spec, initial_draws, dt, stride=lag_stride)
    if mode == "impulse":
        pert_members = ensemble_run(
            model, spec, initial_draws, dt, stride=lag_stride, kick=lambda x: eps * pert.u(x)
        )
    else:
        pert_members = ensemble_run(
            model, spec, initial_draws, dt, stride=lag_stride, drift_extra=lambda x: eps * pert.u(x)
        )

    states_u = np.stack([m.states for m in unpert])  # (M, T, n)
    states_p = np.stack([m.states for m in pert_members])
    if transform is not None:
        states_u = transform.to_normalized(states_u)
        states_p = transform.to_normalized(states_p)
    lags = unpert[0].times()
    denom = eps * (pert.amplitude if pert.constant and pert.amplitude != 0 else 1.0)

    out: dict[str, ResponseSeries] = {}
    for obs in observables:
        diff = (obs.evaluate(states_p) - obs.evaluate(states_u)) / denom  # (M, T)
        vals = diff.mean(axis=0)
        errs = diff.std(axis=0, ddof=1) / np.sqrt(diff.shape[0])
        out[obs.id] = ResponseSeries(lags, vals, errs, obs.id, "ensemble-truth")
    return out


@dataclass
class MomentDeltas:
    """Plateau values of convolved responses, keyed by moment order."""

    deltas: dict[int, float]
    stderr: dict[int, float]
    warnings: list[str] = field(default_factory=list)


def moment_deltas(
    series_by_order: dict[int, ResponseSeries],
    f: TemporalProfile,
    horizon: float | None = None,
) -> MomentDeltas:
    """Long-time values of <dA(t)> per moment order, with a trend check."""
    deltas: dict[int, float] = {}
    errs: dict[int, float] = {}
    warnings: list[str] = []
    for order, series in sorted(series_by_order.items()):
        conv = convolve_response(series, f)
        mask = conv.lags <= (horizon if horizon is not None else conv.lags[-1])
        idx = np.nonzero(mask)[0]
        tail = idx[-max(2, idx.size // 4):]
        plateau = conv.values[tail].mean()
        half = tail.size // 2
        first, second = conv.values[tail[:half]].mean(), conv.values[tail[half:]].mean()
        scale = conv.stderr[tail].mean()
        if abs(second - first) > 3.0 * max(scale, 1e-12):
            warnings.append(f"order {order}: plateau trend {second - first:+.3e} exceeds 3 SE")
        deltas[order] = float(plateau)
        errs[order] = float(scale)
    return MomentDeltas(deltas, errs, warnings)
