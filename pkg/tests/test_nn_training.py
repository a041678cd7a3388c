"""Forward oracles, MSE training, serialization, reproducibility."""

import numpy as np
import pytest

from scorefdt import nn
from scorefdt.errors import ConstructionError, TrainingDivergedError
from scorefdt.nn import autodiff as ad


def test_zero_weight_network_outputs_zero():
    spec = nn.DenseNetworkSpec((3, 5, 2), seed=0)
    params = nn.init_params(spec)
    params.values[:] = 0.0
    out = nn.forward(spec, params, np.array([0.3, -1.2, 4.0]))
    np.testing.assert_array_equal(out, np.zeros(2))

    cspec = nn.ConvNetworkSpec(grid_size=8, base_channels=2, down_levels=1, residual_blocks=1)
    cparams = nn.init_params(cspec)
    cparams.values[:] = 0.0
    cout = nn.forward(cspec, cparams, np.ones((8, 8)))
    np.testing.assert_array_equal(cout, np.zeros((8, 8)))


def test_identity_layer_passes_input_through():
    spec = nn.DenseNetworkSpec((3, 3), activations=("identity",))
    params = nn.init_params(spec)
    params.values[:9] = np.eye(3).reshape(-1)
    params.values[9:] = 0.0
    v = np.array([1.5, -2.0, 0.25])
    np.testing.assert_allclose(nn.forward(spec, params, v), v)


def test_swish_at_zero_is_zero():
    assert ad.swish_np(np.array([0.0]))[0] == 0.0
    # zero pre-activation layer emits zero through swish
    spec = nn.DenseNetworkSpec((2, 4, 1), seed=3)
    params = nn.init_params(spec)
    params.values[:] = 0.0
    assert nn.forward(spec, params, np.array([2.0, -7.0])).item() == 0.0


def test_forward_finite_for_finite_inputs():
    gen = np.random.default_rng(0)
    spec = nn.DenseNetworkSpec((4, 16, 16, 4), seed=9)
    params = nn.init_params(spec)
    out = nn.forward(spec, params, 100.0 * gen.standard_normal((64, 4)))
    assert np.isfinite(out).all()


def test_param_count_pure_function_of_spec():
    spec = nn.ConvNetworkSpec(grid_size=32, base_channels=8, down_levels=3, residual_blocks=2)
    n = nn.param_count(spec)
    assert n == nn.init_params(spec).values.size
    # lifting + 3 down + 2*2 residual + 3 up + projection = 12 conv layers
    assert len(spec.conv_layers()) == 12


def test_shape_mismatch_raises():
    spec = nn.DenseNetworkSpec((3, 2))
    params = nn.init_params(spec)
    with pytest.raises(Exception):
        nn.forward(spec, params, np.zeros(4))


def test_train_linear_fit_matches_least_squares():
    # y = 3x + 1 on a grid: single identity-activation layer recovers (3, 1)
    x = np.linspace(-1, 1, 64)[:, None]
    y = 3.0 * x + 1.0
    spec = nn.DenseNetworkSpec((1, 1), activations=("identity",), seed=0)
    config = nn.TrainConfig(batch_size=64, epochs=3000, learning_rate=0.05, seed=1)
    params = nn.train_mse(spec, x, y, config)
    assert params.values[0] == pytest.approx(3.0, abs=1e-3)
    assert params.values[1] == pytest.approx(1.0, abs=1e-3)


def test_zero_epochs_returns_initial_params():
    spec = nn.DenseNetworkSpec((2, 3, 1), seed=5)
    init = nn.init_params(spec)
    out = nn.train_mse(
        spec,
        np.zeros((4, 2)),
        np.zeros((4, 1)),
        nn.TrainConfig(batch_size=4, epochs=0),
        params=init.copy(),
    )
    np.testing.assert_array_equal(out.values, init.values)
    assert out.final_loss is None


def test_bias_only_constant_target_loss_is_variance():
    # model = bias initialized to the target mean: MSE equals the population variance
    gen = np.random.default_rng(7)
    y = gen.standard_normal((128, 1)) * 2.0 + 0.5
    spec = nn.DenseNetworkSpec((1, 1), activations=("identity",), seed=0)
    params = nn.init_params(spec)
    params.values[0] = 0.0  # weight
    params.values[1] = y.mean()  # bias
    x = np.zeros((128, 1))
    # single full-batch epoch records the loss before the update
    out = nn.train_mse(spec, x, y, nn.TrainConfig(batch_size=128, epochs=1), params=params)
    assert out.final_loss == pytest.approx(np.var(y), rel=1e-12)


def test_full_batch_loss_nonincreasing_small_lr():
    gen = np.random.default_rng(11)
    x = gen.standard_normal((32, 2))
    y = (x[:, :1] - 0.3 * x[:, 1:]) ** 2
    spec = nn.DenseNetworkSpec((2, 8, 1), seed=2)
    params = nn.train_mse(spec, x, y, nn.TrainConfig(batch_size=32, epochs=50, learning_rate=1e-3))
    losses = np.array(params.loss_history)
    assert (np.diff(losses) <= 1e-12).all()


def test_training_divergence_raises_with_epoch():
    x = np.array([[1.0], [2.0]])
    y = np.array([[1.0], [0.0]])
    spec = nn.DenseNetworkSpec((1, 1), activations=("identity",))
    with pytest.raises(TrainingDivergedError) as exc:
        nn.train_mse(spec, x, y, nn.TrainConfig(batch_size=2, epochs=5, learning_rate=1e200))
    assert exc.value.epoch is not None


def test_batch_size_exceeding_dataset_rejected():
    spec = nn.DenseNetworkSpec((1, 1))
    with pytest.raises(ConstructionError):
        nn.train_mse(spec, np.zeros((2, 1)), np.zeros((2, 1)), nn.TrainConfig(batch_size=3, epochs=1))


def test_training_reproducible_bit_identical():
    gen = np.random.default_rng(13)
    x = gen.standard_normal((40, 2))
    y = np.tanh(x[:, :1])
    spec = nn.DenseNetworkSpec((2, 6, 1), seed=4)
    cfg = nn.TrainConfig(batch_size=8, epochs=20, seed=21)
    a = nn.train_mse(spec, x, y, cfg)
    b = nn.train_mse(spec, x, y, cfg)
    np.testing.assert_array_equal(a.values, b.values)


def test_conv_layers_commute_with_cyclic_shifts():
    gen = np.random.default_rng(17)
    x = gen.standard_normal((1, 3, 8, 8))
    w = gen.standard_normal((2, 3, 3, 3))
    b = gen.standard_normal(2)
    out = ad.conv2d_periodic_np(x, w, b)
    for shift in [(1, 0), (0, 3), (5, 2)]:
        xs = np.roll(x, shift, axis=(2, 3))
        np.testing.assert_allclose(
            ad.conv2d_periodic_np(xs, w, b), np.roll(out, shift, axis=(2, 3)), atol=1e-12
        )


def test_params_serialization_round_trip(tmp_path):
    spec = nn.ConvNetworkSpec(grid_size=8, base_channels=2, down_levels=1, residual_blocks=1, seed=3)
    params = nn.init_params(spec)
    params.adam_m[:] = 0.25
    params.adam_step = 17
    path = tmp_path / "net.bin"
    nn.save_params(path, spec, params)
    spec2, params2 = nn.load_params(path)
    assert spec2 == spec
    assert params2.adam_step == 17
    np.testing.assert_array_equal(params2.values, params.values)
    np.testing.assert_array_equal(params2.adam_m, params.adam_m)

    nn.save_training_meta(tmp_path / "net.meta.json", nn.TrainConfig(4, 2), 0.5)
    assert (tmp_path / "net.meta.json").exists()


def test_dense_serialization_round_trip(tmp_path):
    spec = nn.DenseNetworkSpec((2, 5, 2), seed=8)
    params = nn.init_params(spec)
    nn.save_params(tmp_path / "d.bin", spec, params)
    spec2, params2 = nn.load_params(tmp_path / "d.bin")
    assert spec2 == spec
    out_a = nn.forward(spec, params, np.array([0.1, -0.2]))
    out_b = nn.forward(spec2, params2, np.array([0.1, -0.2]))
    np.testing.assert_array_equal(out_a, out_b)
