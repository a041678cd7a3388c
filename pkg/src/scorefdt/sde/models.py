"""The three reduced-order stochastic models with their published parameters.

All drift and noise maps are vectorized over a leading batch axis so that
ensembles of states step in lockstep.  Noise is diagonal for every model in
this family; the integrator also accepts full matrices for generality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConstructionError


@dataclass(frozen=True)
class SdeModel:
    """dx = drift(x) dt + noise(x) dW, Ito convention.

    noise(x) returns diagonal amplitudes of shape (..., dim) when
    diagonal_noise is set, otherwise a full (..., dim, noise_dim) matrix.
    The additive flag asserts that noise does not depend on the state.
    """

    dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    noise: Callable[[np.ndarray], np.ndarray]
    additive: bool
    name: str = ""
    diagonal_noise: bool = True
    noise_dim: int | None = None

    @property
    def wiener_dim(self) -> int:
        return self.dim if self.noise_dim is None else self.noise_dim


@dataclass(frozen=True)
class ScalarModelParams:
    """Cubic scalar model; defaults are the published coefficients."""

    a: float = -0.0222
    b: float = -0.2
    c: float = 0.0494
    F: float = 0.6
    sigma: float = 0.7071


@dataclass(frozen=True)
class TriadModelParams:
    """Slow-fast triad; the tau noise amplitude is 1.5*(tanh(u1)+1)."""

    d_u: float = 0.2
    omega: float = 0.4
    d_tau: float = 2.0
    sigma_u1: float = 0.3
    sigma_u2: float = 0.3


def triad_sigma_tau(u1: np.ndarray) -> np.ndarray:
    return 1.5 * (np.tanh(u1) + 1.0)


@dataclass(frozen=True)
class BarotropicModelParams:
    """Six-mode stochastic barotropic model coefficients."""

    alpha1: float = 0.86322463
    alpha2: float = 0.81394451
    beta1: float = 0.89887640
    beta2: float = 0.48780488
    delta1: float = 1.38115941
    delta2: float = -0.12882575
    gamma1_tilde: float = 0.19206748
    gamma2_tilde: float = 0.07682699
    gamma1: float = 0.05395154
    gamma2: float = 0.04684573
    epsilon: float = 1.44050611
    C: float = 0.1
    x1_star: float = 0.95
    x4_star: float = -0.76095
    sigma: float = 0.01


def make_scalar(params: ScalarModelParams = ScalarModelParams()) -> SdeModel:
    """dx = (F + a x + b x^2 - c x^3) dt + sigma dW."""
    if params.c <= 0 or params.sigma <= 0:
        raise ConstructionError("scalar model needs c > 0 (confining) and sigma > 0")
    a, b, c, F = params.a, params.b, params.c, params.F
    sigma = params.sigma

    def drift(x):
        return F + a * x + b * x**2 - c * x**3

    def noise(x):
        return np.broadcast_to(np.array([sigma]), x.shape)

    return SdeModel(1, drift, noise, additive=True, name="scalar")


def make_triad(params: TriadModelParams = TriadModelParams()) -> SdeModel:
    if params.d_u <= 0 or params.d_tau <= 0:
        raise ConstructionError("triad model needs positive dampings")
    d_u, om, d_tau = params.d_u, params.omega, params.d_tau
    s1, s2 = params.sigma_u1, params.sigma_u2

    def drift(x):
        u1, u2, tau = x[..., 0], x[..., 1], x[..., 2]
        return np.stack(
            [-d_u * u1 - om * u2 + tau, -d_u * u2 + om * u1, -d_tau * tau], axis=-1
        )

    def noise(x):
        out = np.empty_like(x)
        out[..., 0] = s1
        out[..., 1] = s2
        out[..., 2] = triad_sigma_tau(x[..., 0])
        return out

    return SdeModel(3, drift, noise, additive=False, name="triad")


def make_barotropic(params: BarotropicModelParams = BarotropicModelParams()) -> SdeModel:
    if params.C <= 0 or params.sigma <= 0:
        raise ConstructionError("barotropic model needs C > 0 and sigma > 0")
    p = params

    def drift(x):
        x1, x2, x3, x4, x5, x6 = (x[..., i] for i in range(6))
        return np.stack(
            [
                p.gamma1_tilde * x3 - p.C * (x1 - p.x1_star),
                -(p.alpha1 * x1 - p.beta1) * x3 - p.C * x2 - p.delta1 * x4 * x6,
                (p.alpha1 * x1 - p.beta1) * x2 - p.gamma1 * x1 - p.C * x3 + p.delta1 * x4 * x5,
                p.gamma2_tilde * x6 - p.C * (x4 - p.x4_star) + p.epsilon * (x2 * x6 - x3 * x5),
                -(p.alpha2 * x1 - p.beta2) * x6 - p.C * x5 - p.delta2 * x4 * x3,
                (p.alpha2 * x1 - p.beta2) * x5 - p.gamma2 * x4 - p.C * x6 + p.delta2 * x4 * x2,
            ],
            axis=-1,
        )

    sigma = p.sigma

    def noise(x):
        return np.broadcast_to(np.full(6, sigma), x.shape)

    return SdeModel(6, drift, noise, additive=True, name="barotropic")


def ornstein_uhlenbeck(rate: float = 1.0, diffusion: float = np.sqrt(2.0)) -> SdeModel:
    """dx = -rate*x dt + diffusion dW; handy analytic test model."""

    def drift(x):
        return -rate * x

    def noise(x):
        return np.broadcast_to(np.array([diffusion]), x.shape)

    return SdeModel(1, drift, noise, additive=True, name="ou")
