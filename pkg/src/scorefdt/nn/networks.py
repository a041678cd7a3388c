"""Network specifications, parameter packing, and forward evaluation.

Two architectures cover all score estimators in the package: a dense
multilayer perceptron for low-dimensional states and a convolutional
encoder-decoder with skip connections for gridded states.  Parameters live
in a single flat float64 vector so the optimizer and the serializer never
need to know the layer structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng
from ..errors import ConstructionError, DimensionError
from . import autodiff as ad
from .autodiff import Tensor

_ACTIVATIONS = ("swish", "identity")


@dataclass(frozen=True)
class DenseNetworkSpec:
    """Fully connected network: widths[0] inputs -> widths[-1] outputs."""

    layer_widths: tuple[int, ...]
    activations: tuple[str, ...] | None = None  # default: swish hidden, identity output
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_widths) < 2 or any(w < 1 for w in self.layer_widths):
            raise ConstructionError(f"layer widths must be >=2 positive ints, got {self.layer_widths}")
        if self.activations is not None:
            if len(self.activations) != len(self.layer_widths) - 1:
                raise ConstructionError("need one activation per layer")
            for a in self.activations:
                if a not in _ACTIVATIONS:
                    raise ConstructionError(f"unknown activation {a!r}")

    @property
    def input_dim(self) -> int:
        return self.layer_widths[0]

    @property
    def output_dim(self) -> int:
        return self.layer_widths[-1]

    def layer_activations(self) -> tuple[str, ...]:
        if self.activations is not None:
            return self.activations
        n_layers = len(self.layer_widths) - 1
        return ("swish",) * (n_layers - 1) + ("identity",)


@dataclass(frozen=True)
class ConvNetworkSpec:
    """Periodic conv encoder-decoder with additive skip connections.

    Channel counts double at each downsampling level and halve back up;
    residual blocks act at the bottleneck resolution.
    """

    grid_size: int
    base_channels: int
    down_levels: int
    residual_blocks: int
    in_channels: int = 1
    out_channels: int = 1
    kernel_size: int = 3
    padding: str = "periodic"
    seed: int = 0

    def __post_init__(self):
        if self.grid_size % (2**self.down_levels) != 0:
            raise ConstructionError(
                f"grid size {self.grid_size} not divisible by 2^{self.down_levels}"
            )
        if self.padding != "periodic":
            raise ConstructionError("only periodic padding is supported")
        if min(self.grid_size, self.base_channels, self.kernel_size) < 1 or self.down_levels < 0:
            raise ConstructionError("invalid conv spec")
        if self.kernel_size % 2 != 1:
            raise ConstructionError("kernel size must be odd")

    def conv_layers(self) -> list[tuple[int, int, int]]:
        """(in_channels, out_channels, stride) for every conv, in order."""
        base, levels = self.base_channels, self.down_levels
        layers = [(self.in_channels, base, 1)]  # lifting
        for l in range(levels):
            layers.append((base * 2**l, base * 2 ** (l + 1), 2))
        cb = base * 2**levels
        for _ in range(self.residual_blocks):
            layers.append((cb, cb, 1))
            layers.append((cb, cb, 1))
        for l in reversed(range(levels)):
            layers.append((base * 2 ** (l + 1), base * 2**l, 1))
        layers.append((base, self.out_channels, 1))  # projection
        return layers


NetworkSpec = DenseNetworkSpec | ConvNetworkSpec


@dataclass
class NetworkParams:
    """Flat parameter vector plus Adam moment accumulators."""

    values: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray
    adam_step: int = 0
    final_loss: float | None = None
    loss_history: list[float] = field(default_factory=list)

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            self.values.copy(),
            self.adam_m.copy(),
            self.adam_v.copy(),
            self.adam_step,
            self.final_loss,
            list(self.loss_history),
        )


def _dense_segments(spec: DenseNetworkSpec) -> list[tuple[int, int, tuple[int, ...]]]:
    segs = []
    off = 0
    for w_in, w_out in zip(spec.layer_widths[:-1], spec.layer_widths[1:]):
        segs.append((off, off + w_in * w_out, (w_in, w_out)))
        off += w_in * w_out
        segs.append((off, off + w_out, (w_out,)))
        off += w_out
    return segs


def _conv_segments(spec: ConvNetworkSpec) -> list[tuple[int, int, tuple[int, ...]]]:
    k = spec.kernel_size
    segs = []
    off = 0
    for c_in, c_out, _ in spec.conv_layers():
        segs.append((off, off + c_out * c_in * k * k, (c_out, c_in, k, k)))
        off += c_out * c_in * k * k
        segs.append((off, off + c_out, (c_out,)))
        off += c_out
    return segs


def _segments(spec: NetworkSpec) -> list[tuple[int, int, tuple[int, ...]]]:
    if isinstance(spec, DenseNetworkSpec):
        return _dense_segments(spec)
    return _conv_segments(spec)


def param_count(spec: NetworkSpec) -> int:
    return _segments(spec)[-1][1]


def init_params(spec: NetworkSpec) -> NetworkParams:
    """Scaled uniform init with variance 2/(fan_in + fan_out); zero biases."""
    n = param_count(spec)
    values = np.zeros(n)
    gen = rng.stream(spec.seed, 0x6E6E)
    segs = _segments(spec)
    for weight_seg, _bias_seg in zip(segs[0::2], segs[1::2]):
        start, stop, shape = weight_seg
        if len(shape) == 2:
            fan_in, fan_out = shape
        else:
            fan_in = shape[1] * shape[2] * shape[3]
            fan_out = shape[0] * shape[2] * shape[3]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        values[start:stop] = gen.uniform(-limit, limit, size=stop - start)
    return NetworkParams(values, np.zeros(n), np.zeros(n))


class TapeNet:
    """Callable network view over a flat parameter Tensor (autodiff mode)."""

    def __init__(self, spec: NetworkSpec, params: Tensor):
        self.spec = spec
        self.params = params
        self._segs = _segments(spec)

    def _weights(self) -> list[tuple[Tensor, Tensor]]:
        out = []
        for wseg, bseg in zip(self._segs[0::2], self._segs[1::2]):
            out.append(
                (
                    ad.take_slice(self.params, wseg[0], wseg[1], wseg[2]),
                    ad.take_slice(self.params, bseg[0], bseg[1], bseg[2]),
                )
            )
        return out

    def __call__(self, x: np.ndarray) -> Tensor:
        if isinstance(self.spec, DenseNetworkSpec):
            return self._forward_dense(x)
        return self._forward_conv(x)

    def _forward_dense(self, x: np.ndarray) -> Tensor:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.spec.input_dim:
            raise DimensionError(f"input dim {x.shape[1]} != spec {self.spec.input_dim}")
        h = Tensor(x)
        for (w, b), act in zip(self._weights(), self.spec.layer_activations()):
            h = ad.add(ad.matmul(h, w), b)
            if act == "swish":
                h = ad.swish(h)
        return h

    def _forward_conv(self, x: np.ndarray) -> Tensor:
        x = _as_grid_batch(x, self.spec)
        weights = self._weights()
        spec = self.spec
        idx = 0

        h = ad.swish(ad.conv2d_periodic(Tensor(x), *weights[idx]))
        idx += 1
        skips = [h]
        for _ in range(spec.down_levels):
            h = ad.swish(ad.conv2d_periodic(h, *weights[idx], stride=2))
            idx += 1
            skips.append(h)
        for _ in range(spec.residual_blocks):
            inner = ad.swish(ad.conv2d_periodic(h, *weights[idx]))
            idx += 1
            inner = ad.conv2d_periodic(inner, *weights[idx])
            idx += 1
            h = ad.add(h, inner)
        for l in reversed(range(spec.down_levels)):
            h = ad.conv2d_periodic(ad.upsample2(h), *weights[idx])
            idx += 1
            h = ad.swish(ad.add(h, skips[l]))
        return ad.conv2d_periodic(h, *weights[idx])


def _as_grid_batch(x: np.ndarray, spec: ConvNetworkSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = spec.grid_size
    if x.ndim == 2 and x.shape == (n, n):
        x = x[None, None]
    elif x.ndim == 3 and x.shape[1:] == (n, n):
        x = x[:, None]
    elif x.ndim != 4:
        raise DimensionError(f"expected ({n},{n}) grids, got shape {x.shape}")
    if x.shape[1] != spec.in_channels or x.shape[2:] != (n, n):
        raise DimensionError(f"grid batch shape {x.shape} does not match spec")
    return x


def _np_weights(spec: NetworkSpec, values: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    segs = _segments(spec)
    if values.shape != (segs[-1][1],):
        raise DimensionError(f"parameter vector length {values.size} != {segs[-1][1]}")
    return [
        (values[w0:w1].reshape(ws), values[b0:b1].reshape(bs))
        for (w0, w1, ws), (b0, b1, bs) in zip(segs[0::2], segs[1::2])
    ]


def forward(spec: NetworkSpec, params: NetworkParams | np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the network (plain numpy, no tape)."""
    values = params.values if isinstance(params, NetworkParams) else np.asarray(params)
    weights = _np_weights(spec, values)
    if isinstance(spec, DenseNetworkSpec):
        xa = np.asarray(x, dtype=np.float64)
        single = xa.ndim == 1
        h = np.atleast_2d(xa)
        if h.shape[1] != spec.input_dim:
            raise DimensionError(f"input dim {h.shape[1]} != spec {spec.input_dim}")
        for (w, b), act in zip(weights, spec.layer_activations()):
            h = h @ w + b
            if act == "swish":
                h = ad.swish_np(h)
        return h[0] if single else h

    xa = np.asarray(x, dtype=np.float64)
    single = xa.ndim == 2
    h = _as_grid_batch(xa, spec)
    idx = 0
    h = ad.swish_np(ad.conv2d_periodic_np(h, *weights[idx]))
    idx += 1
    skips = [h]
    for _ in range(spec.down_levels):
        h = ad.swish_np(ad.conv2d_periodic_np(h, *weights[idx], stride=2))
        idx += 1
        skips.append(h)
    for _ in range(spec.residual_blocks):
        inner = ad.swish_np(ad.conv2d_periodic_np(h, *weights[idx]))
        idx += 1
        inner = ad.conv2d_periodic_np(inner, *weights[idx])
        idx += 1
        h = h + inner
    for l in reversed(range(spec.down_levels)):
        h = ad.conv2d_periodic_np(ad.upsample2_np(h), *weights[idx])
        idx += 1
        h = ad.swish_np(h + skips[l])
    out = ad.conv2d_periodic_np(h, *weights[idx])
    if single:
        return out[0, 0] if spec.out_channels == 1 else out[0]
    return out[:, 0] if spec.out_channels == 1 else out
