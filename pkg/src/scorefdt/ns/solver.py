"""Pseudospectral 2-D vorticity solver on a periodic [0, 2pi)^2 grid.

d_t zeta = J(psi, zeta) - A d_x zeta + D zeta + forcing,  psi = inv_lap zeta

with J the advection Jacobian (computed pseudospectrally, 2/3-rule
dealiased), D the hypo/hyper-viscous dissipation plus mean-mode damping,
and a white-in-time random-wave forcing on a low-wavenumber ring.  Time
stepping is RK4 on the nonlinear/advection terms with an exact integrating
factor for the linear spectral dissipation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .. import rng
from ..errors import CflError, ConstructionError, IntegrationError
from ..response import Perturbation, constant_perturbation

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RingForcing:
    """Gaussian amplitudes, refreshed every step, on modes k_min <= |k| <= k_max."""

    k_min: float = 1.0
    k_max: float = 2.0
    amplitude: float = 0.35  # per-component std per unit sqrt(time); O(1) stationary RMS

    def __post_init__(self):
        if self.amplitude < 0 or self.k_min < 0 or self.k_max < self.k_min:
            raise ConstructionError("invalid forcing spec")


@dataclass(frozen=True)
class NsParams:
    grid_size: int = 32
    nu_hypo: float = 1e-2  # on inverse biharmonic
    nu_hyper: float = 1e-5  # on biharmonic
    nu_mean: float = 1.0 / _TWO_PI**2  # damping of the domain integral
    mean_advection: float = np.pi
    forcing: RingForcing = RingForcing()
    cfl_safety: float = 0.7

    def __post_init__(self):
        if min(self.nu_hypo, self.nu_hyper, self.nu_mean) < 0:
            raise ConstructionError("viscosities must be nonnegative")
        if self.grid_size < 4 or self.grid_size % 2:
            raise ConstructionError("grid size must be an even integer >= 4")


class SpectralWorkspace:
    """Precomputed wavenumber arrays and masks for one grid size (rfft2 layout)."""

    def __init__(self, params: NsParams):
        n = params.grid_size
        self.n = n
        self.params = params
        kx_full = scipy.fft.fftfreq(n, 1.0 / n)
        ky = kx_full[: n // 2 + 1]  # rfft axis
        self.kx = kx_full[:, None]
        self.ky = ky[None, :]
        self.k2 = self.kx**2 + self.ky**2
        k2_safe = np.where(self.k2 == 0, 1.0, self.k2)
        self.inv_k2 = np.where(self.k2 == 0, 0.0, 1.0 / k2_safe)
        k_cut = n // 3
        self.dealias = (np.abs(self.kx) <= k_cut) & (np.abs(self.ky) <= k_cut)
        # linear dissipation multiplier; mean mode handled by the integral term
        lin = -params.nu_hypo * self.inv_k2**2 - params.nu_hyper * self.k2**2
        lin[0, 0] = -params.nu_mean * _TWO_PI**2
        self.linear = lin
        self._forcing_basis = self._build_forcing_basis(params.forcing)

    def _build_forcing_basis(self, forcing: RingForcing) -> np.ndarray:
        n = self.n
        x = np.arange(n) * (_TWO_PI / n)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        fields = []
        for i in range(-n // 2 + 1, n // 2 + 1):
            for j in range(0, n // 2 + 1):
                if j == 0 and i <= 0:
                    continue  # one representative per +/-k pair, no mean mode
                if forcing.k_min**2 <= i * i + j * j <= forcing.k_max**2:
                    phase = i * xx + j * yy
                    fields.append(np.cos(phase))
                    fields.append(np.sin(phase))
        if not fields:
            return np.zeros((0, n, n))
        return np.stack(fields)

    @property
    def n_forcing_modes(self) -> int:
        return self._forcing_basis.shape[0]

    def forcing_field(self, seed: int, step_index: int) -> np.ndarray:
        amp = self.params.forcing.amplitude
        if amp == 0.0 or self.n_forcing_modes == 0:
            return np.zeros((self.n, self.n))
        coeffs = rng.stream(seed, 0x4E53, step_index).standard_normal(self.n_forcing_modes)
        return amp * np.einsum("m,mxy->xy", coeffs, self._forcing_basis)


def poisson_invert(zeta: np.ndarray, workspace: SpectralWorkspace | None = None) -> np.ndarray:
    """Streamfunction psi = inv_lap zeta; the mean of psi is set to the mean of zeta."""
    zeta = np.asarray(zeta, dtype=np.float64)
    ws = workspace or SpectralWorkspace(NsParams(grid_size=zeta.shape[0]))
    zh = scipy.fft.rfft2(zeta)
    ph = -zh * ws.inv_k2
    ph[0, 0] = zh[0, 0]  # mean-preserving convention
    return scipy.fft.irfft2(ph, s=zeta.shape)


def _nonlinear_rhs(zh: np.ndarray, ws: SpectralWorkspace) -> tuple[np.ndarray, float]:
    """Dealiased J(psi, zeta) - A d_x zeta in spectral space, plus max |velocity|."""
    zh_t = np.where(ws.dealias, zh, 0.0)
    ph = -zh_t * ws.inv_k2
    shape = (ws.n, ws.n)
    zx = scipy.fft.irfft2(1j * ws.kx * zh_t, s=shape)
    zy = scipy.fft.irfft2(1j * ws.ky * zh_t, s=shape)
    px = scipy.fft.irfft2(1j * ws.kx * ph, s=shape)
    py = scipy.fft.irfft2(1j * ws.ky * ph, s=shape)
    jac = scipy.fft.rfft2(px * zy - zx * py)
    rhs = np.where(ws.dealias, jac, 0.0) - ws.params.mean_advection * (1j * ws.kx) * zh
    umax = max(np.abs(py).max(), np.abs(px).max())  # u = d_y psi, v = -d_x psi
    return rhs, umax


def step(
    state: np.ndarray,
    params: NsParams,
    dt: float,
    seed: int,
    step_index: int,
    workspace: SpectralWorkspace | None = None,
) -> np.ndarray:
    """Advance one step: integrating-factor RK4 plus the stochastic increment."""
    ws = workspace or SpectralWorkspace(params)
    zh = scipy.fft.rfft2(np.asarray(state, dtype=np.float64))

    f1, umax = _nonlinear_rhs(zh, ws)
    dx = _TWO_PI / ws.n
    dt_max = params.cfl_safety * dx / (umax + params.mean_advection + 1e-12)
    if dt > dt_max:
        raise CflError(f"dt={dt:.3e} exceeds CFL bound {dt_max:.3e} at step {step_index}")

    e_half = np.exp(0.5 * dt * ws.linear)
    e_full = e_half * e_half
    f2, _ = _nonlinear_rhs(e_half * (zh + 0.5 * dt * f1), ws)
    f3, _ = _nonlinear_rhs(e_half * zh + 0.5 * dt * f2, ws)
    f4, _ = _nonlinear_rhs(e_full * zh + dt * e_half * f3, ws)
    zh_new = e_full * zh + (dt / 6.0) * (e_full * f1 + 2.0 * e_half * (f2 + f3) + f4)

    out = scipy.fft.irfft2(zh_new, s=(ws.n, ws.n))
    out = out + np.sqrt(dt) * ws.forcing_field(seed, step_index)
    if not np.isfinite(out).all():
        raise IntegrationError(f"non-finite vorticity at step {step_index}", step=step_index)
    return out


def run_to_stationarity(
    params: NsParams,
    dt: float,
    n_snapshots: int,
    snapshot_stride: int,
    seed: int,
    burn_in_steps: int = 5000,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Snapshots (S, n, n) collected every `snapshot_stride` steps after burn-in."""
    if snapshot_stride < 1:
        raise ConstructionError("snapshot stride must be >= 1")
    ws = SpectralWorkspace(params)
    state = np.zeros((ws.n, ws.n)) if initial is None else np.asarray(initial, dtype=np.float64).copy()
    snaps = np.empty((n_snapshots, ws.n, ws.n))
    k = 0
    for i in range(burn_in_steps + n_snapshots * snapshot_stride):
        state = step(state, params, dt, seed, i, workspace=ws)
        if i >= burn_in_steps and (i - burn_in_steps + 1) % snapshot_stride == 0:
            snaps[k] = state
            k += 1
    return snaps


def pixel_perturbation(i: int, j: int, amplitude: float, grid_size: int = 32) -> Perturbation:
    """Constant state-space forcing at one pixel of the flattened (row-major) field."""
    if not (0 <= i < grid_size and 0 <= j < grid_size):
        raise ConstructionError(f"pixel ({i},{j}) outside {grid_size}x{grid_size} grid")
    direction = np.zeros(grid_size * grid_size)
    direction[i * grid_size + j] = 1.0
    return constant_perturbation(direction, amplitude=amplitude, name=f"pixel({i},{j})")


def energy(zeta: np.ndarray, workspace: SpectralWorkspace | None = None) -> float:
    """Kinetic energy (1/2) <|grad psi|^2> = (1/2) <psi * zeta> up to the mean mode."""
    ws = workspace or SpectralWorkspace(NsParams(grid_size=zeta.shape[0]))
    zh = scipy.fft.rfft2(zeta)
    spec = np.abs(zh) ** 2 * ws.inv_k2
    weights = np.full(ws.ky.shape[1], 2.0)
    weights[0] = 1.0
    if ws.n % 2 == 0:
        weights[-1] = 1.0
    return 0.5 * float((spec * weights).sum()) / ws.n**4


def enstrophy(zeta: np.ndarray) -> float:
    return 0.5 * float(np.mean(np.asarray(zeta) ** 2))
