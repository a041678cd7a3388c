"""Trajectory persistence: CSV for inspection, packed binary for bulk runs."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ScoreFdtError
from .integrators import Trajectory

_MAGIC = b"SFDTRAJ1"


def save_trajectory_csv(path: str | Path, traj: Trajectory) -> None:
    header = "t," + ",".join(f"x{i + 1}" for i in range(traj.dim))
    data = np.column_stack([traj.times(), traj.states])
    np.savetxt(path, data, delimiter=",", header=header, comments="")


def load_trajectory_csv(path: str | Path, dt: float | None = None, stride: int = 1) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    times, states = data[:, 0], data[:, 1:]
    if dt is None:
        dt = float(times[1] - times[0]) / stride if len(times) > 1 else 1.0
    return Trajectory(states, dt=dt, stride=stride)


def save_trajectory_binary(path: str | Path, traj: Trajectory) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IId", traj.dim, traj.stride, traj.dt))
        fh.write(np.ascontiguousarray(traj.states, dtype="<f8").tobytes())


def load_trajectory_binary(path: str | Path) -> Trajectory:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ScoreFdtError(f"{path}: bad magic {magic!r}")
        dim, stride, dt = struct.unpack("<IId", fh.read(16))
        flat = np.frombuffer(fh.read(), dtype="<f8")
    if flat.size % dim != 0:
        raise ScoreFdtError(f"{path}: payload not a multiple of dim={dim}")
    return Trajectory(flat.reshape(-1, dim).copy(), dt=dt, stride=stride)
