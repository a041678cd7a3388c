"""Adam optimization, mean-squared-error training, and gradient evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import rng
from ..errors import ConstructionError, DimensionError, TrainingDivergedError
from . import autodiff as ad
from .autodiff import Tensor
from .networks import NetworkParams, NetworkSpec, TapeNet, init_params


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int
    epochs: int
    learning_rate: float = 1e-3
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0 or self.learning_rate <= 0:
            raise ConstructionError("invalid training config")


def adam_step(params: NetworkParams, grad: np.ndarray, config: TrainConfig) -> None:
    """One in-place Adam update with bias correction."""
    params.adam_step += 1
    t = params.adam_step
    params.adam_m = config.beta1 * params.adam_m + (1 - config.beta1) * grad
    params.adam_v = config.beta2 * params.adam_v + (1 - config.beta2) * grad**2
    m_hat = params.adam_m / (1 - config.beta1**t)
    v_hat = params.adam_v / (1 - config.beta2**t)
    params.values = params.values - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)


def gradient(spec: NetworkSpec, params: NetworkParams, loss_closure: Callable[[TapeNet], Tensor]) -> np.ndarray:
    """Gradient of a scalar loss closure w.r.t. the flat parameter vector."""
    p = Tensor(params.values)
    loss = loss_closure(TapeNet(spec, p))
    if loss.value.size != 1:
        raise DimensionError("loss closure must return a scalar")
    ad.backward(loss)
    return p.grad if p.grad is not None else np.zeros_like(params.values)


def mse_loss(net: TapeNet, x: np.ndarray, y: np.ndarray) -> Tensor:
    diff = ad.sub(net(x), Tensor(np.asarray(y, dtype=np.float64)))
    return ad.mean_all(ad.square(diff))


def train_mse(
    spec: NetworkSpec,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
    params: NetworkParams | None = None,
) -> NetworkParams:
    """Minibatch Adam on mean-squared error.

    Batch order is reshuffled each epoch from a stream keyed by
    (config.seed, epoch), so training is reproducible and the zero-epoch
    case returns the initialization unchanged.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    n = inputs.shape[0]
    if n == 0 or targets.shape[0] != n:
        raise DimensionError("dataset empty or inputs/targets misaligned")
    if config.batch_size > n:
        raise ConstructionError(f"batch size {config.batch_size} exceeds dataset size {n}")

    params = init_params(spec) if params is None else params
    for epoch in range(config.epochs):
        perm = rng.stream(config.seed, 0x7472, epoch).permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            p = Tensor(params.values)
            loss = mse_loss(TapeNet(spec, p), inputs[idx], targets[idx])
            if not np.isfinite(loss.value):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}", epoch=epoch
                )
            ad.backward(loss)
            adam_step(params, p.grad, config)
            epoch_loss += float(loss.value)
            n_batches += 1
        params.loss_history.append(epoch_loss / n_batches)
    if params.loss_history:
        params.final_loss = params.loss_history[-1]
    return params
