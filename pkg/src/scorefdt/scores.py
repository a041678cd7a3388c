"""Score models: evaluable maps x -> grad log rho_S(x).

Three variants: analytic closures, the Gaussian (quasi-linear) score
-Sigma^{-1}(x - mu), and neural interpolants.  A score fitted in normalized
coordinates carries its normalization so it can be evaluated consistently
in either frame: for y = (x - m)/s the densities relate by
rho_X(x) = rho_Y(y)/prod(s), hence s_X(x) = s_Y(y)/s componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import DegenerateDataError, DimensionError


@dataclass(frozen=True)
class NormalizationTransform:
    """Componentwise y = (x - mean)/std."""

    mean: np.ndarray
    std: np.ndarray

    def to_normalized(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def to_original(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self.std + self.mean

    @staticmethod
    def identity(dim: int) -> "NormalizationTransform":
        return NormalizationTransform(np.zeros(dim), np.ones(dim))


class ScoreModel:
    """Base interface: evaluate(x) -> score, vectorized over leading axes."""

    variant: str = "base"
    dim: int = 0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)


class AnalyticScore(ScoreModel):
    variant = "analytic"

    def __init__(self, fn, dim: int):
        self.fn = fn
        self.dim = dim

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.asarray(self.fn(x), dtype=np.float64)


class GaussianScore(ScoreModel):
    """s(x) = -Sigma^{-1} (x - mu); exact for Gaussian steady states."""

    variant = "gaussian"

    def __init__(self, mean: np.ndarray, cov: np.ndarray):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
        self.dim = self.mean.size
        cond = np.linalg.cond(cov)
        if not np.isfinite(cond) or cond > 1e12:
            raise DegenerateDataError(f"singular sample covariance (condition number {cond:.3e})")
        self.cov = cov
        self.precision = np.linalg.inv(cov)

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        return -(x - self.mean) @ self.precision.T


def gaussian_score(samples: np.ndarray) -> GaussianScore:
    """Fit mean and covariance (population convention) from samples."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    mean = samples.mean(axis=0)
    d = samples - mean
    cov = d.T @ d / samples.shape[0]
    return GaussianScore(mean, cov)


class NeuralScore(ScoreModel):
    """Network interpolant evaluated in the coordinates it was fitted in.

    Grid-shaped networks flatten their output to the row-major state vector
    so all score variants share the (..., dim) convention.
    """

    variant = "neural"

    def __init__(
        self,
        spec: nn.NetworkSpec,
        params: nn.NetworkParams,
        normalization: NormalizationTransform | None = None,
        fit_mse: float | None = None,
    ):
        self.spec = spec
        self.params = params
        self.normalization = normalization
        self.fit_mse = fit_mse
        if isinstance(spec, nn.DenseNetworkSpec):
            self.dim = spec.output_dim
            self._grid = None
        else:
            self.dim = spec.grid_size**2
            self._grid = spec.grid_size

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self._grid is None:
            return nn.forward(self.spec, self.params, x)
        n = self._grid
        single = x.ndim == 1
        flat = np.atleast_2d(x)
        if flat.shape[-1] != n * n:
            raise DimensionError(f"expected flattened {n}x{n} states, got {flat.shape}")
        out = nn.forward(self.spec, self.params, flat.reshape(-1, n, n))
        out = out.reshape(-1, n * n)
        return out[0] if single else out


class TransformedScore(ScoreModel):
    """View of a score defined in original coordinates, seen in normalized ones.

    s_Y(y) = std * s_X(mean + std*y).
    """

    def __init__(self, base: ScoreModel, transform: NormalizationTransform):
        self.base = base
        self.transform = transform
        self.dim = base.dim
        self.variant = base.variant

    def evaluate(self, y):
        x = self.transform.to_original(y)
        return self.base.evaluate(x) * self.transform.std


class ShiftedScaledScore(ScoreModel):
    """Componentwise affine correction s'(x) = scale * s(x) + shift."""

    def __init__(self, base: ScoreModel, scale: np.ndarray, shift: np.ndarray):
        self.base = base
        self.scale = np.asarray(scale, dtype=np.float64)
        self.shift = np.asarray(shift, dtype=np.float64)
        self.dim = base.dim
        self.variant = base.variant

    def evaluate(self, x):
        return self.base.evaluate(x) * self.scale + self.shift
