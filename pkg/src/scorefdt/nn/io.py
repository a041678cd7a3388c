"""Parameter serialization: text header + little-endian float64 payload."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import ScoreFdtError
from .networks import ConvNetworkSpec, DenseNetworkSpec, NetworkParams, NetworkSpec, param_count

_MAGIC = "SCOREFDT-NN 1"


def spec_to_dict(spec: NetworkSpec) -> dict:
    d = asdict(spec)
    d["kind"] = "dense" if isinstance(spec, DenseNetworkSpec) else "conv"
    return d


def spec_from_dict(d: dict) -> NetworkSpec:
    d = dict(d)
    kind = d.pop("kind")
    if kind == "dense":
        if d.get("layer_widths") is not None:
            d["layer_widths"] = tuple(d["layer_widths"])
        if d.get("activations") is not None:
            d["activations"] = tuple(d["activations"])
        return DenseNetworkSpec(**d)
    if kind == "conv":
        return ConvNetworkSpec(**d)
    raise ScoreFdtError(f"unknown network kind {kind!r}")


def save_params(path: str | Path, spec: NetworkSpec, params: NetworkParams) -> None:
    header = "\n".join(
        [
            _MAGIC,
            json.dumps(spec_to_dict(spec), sort_keys=True),
            f"count {params.values.size}",
            f"seed {spec.seed}",
            f"adam_step {params.adam_step}",
            "DATA",
        ]
    )
    payload = np.concatenate([params.values, params.adam_m, params.adam_v]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(payload.tobytes())


def load_params(path: str | Path) -> tuple[NetworkSpec, NetworkParams]:
    with open(path, "rb") as fh:
        raw = fh.read()
    head, _, rest = raw.partition(b"DATA\n")
    lines = head.decode("ascii").splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ScoreFdtError(f"{path}: not a scorefdt parameter file")
    spec = spec_from_dict(json.loads(lines[1]))
    count = int(lines[2].split()[1])
    adam_step = int(lines[4].split()[1])
    if count != param_count(spec):
        raise ScoreFdtError(f"{path}: header count {count} inconsistent with spec")
    flat = np.frombuffer(rest, dtype="<f8")
    if flat.size != 3 * count:
        raise ScoreFdtError(f"{path}: payload truncated")
    values, m, v = flat[:count], flat[count : 2 * count], flat[2 * count :]
    return spec, NetworkParams(values.copy(), m.copy(), v.copy(), adam_step)


def save_training_meta(path: str | Path, config, final_loss: float | None, extra: dict | None = None) -> None:
    """JSON sidecar next to a parameter file."""
    meta = {"train_config": asdict(config), "final_loss": final_loss}
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
