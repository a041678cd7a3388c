from .networks import (
    ConvNetworkSpec,
    DenseNetworkSpec,
    NetworkParams,
    NetworkSpec,
    TapeNet,
    forward,
    init_params,
    param_count,
)
from .training import TrainConfig, adam_step, gradient, mse_loss, train_mse
from .io import load_params, save_params, save_training_meta, spec_from_dict, spec_to_dict

__all__ = [
    "ConvNetworkSpec",
    "DenseNetworkSpec",
    "NetworkParams",
    "NetworkSpec",
    "TapeNet",
    "TrainConfig",
    "adam_step",
    "forward",
    "gradient",
    "init_params",
    "load_params",
    "mse_loss",
    "param_count",
    "save_params",
    "save_training_meta",
    "spec_from_dict",
    "spec_to_dict",
    "train_mse",
]
