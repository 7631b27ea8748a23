"""Space-time Fourier data of windowed trajectories and the X, Y, Z norms.

The time transform uses the same unitary normalisation as the spatial one,

    F_t f(tau) = (2 pi)^(-1/2) int exp(-i t tau) f(t) dt,

approximated by a Riemann sum over the saved time slices after zero padding,
so tau is sampled on a uniform grid of step 2 pi / (L dt).  L is always odd,
which makes the tau grid exactly symmetric about 0.

Norms are computed for the explicit cutoff extension chi_T u only; no
infimum over extensions is attempted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .torus import SQRT_2PI, TWO_PI, Trajectory, bracket, coeffs_to_values, resample_coeffs, wavenumbers

CUTOFF_DESCRIPTION = (
    "chi(t) = 1 on |t| <= 1, 0 on |t| >= 2, "
    "h(2-|t|) / (h(2-|t|) + h(|t|-1)) between, h(s) = exp(-1/s)"
)


def _h(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s, dtype=float)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def cutoff(t) -> np.ndarray:
    """Smooth C-infinity cutoff: 1 on [-1, 1], supported in (-2, 2)."""
    a = np.abs(np.asarray(t, dtype=float))
    up, down = _h(2.0 - a), _h(a - 1.0)
    out = np.ones_like(a)
    mid = (a > 1.0) & (a < 2.0)
    out[mid] = up[mid] / (up[mid] + down[mid])
    out[a >= 2.0] = 0.0
    return out


def cutoff_T(t, T: float) -> np.ndarray:
    """chi_T(t) = chi(t / T)."""
    return cutoff(np.asarray(t, dtype=float) / T)


@dataclass(frozen=True, eq=False)
class SpaceTimeSpectrum:
    """F(chi_T u)(tau, xi); ``values`` rows follow ``tau`` (ascending), columns FFT order in xi."""

    n_modes: int
    n_time: int
    tau_step: float
    values: np.ndarray
    T: float
    pad_factor: int
    cutoff: str = CUTOFF_DESCRIPTION
    tau: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = (self.n_time - 1) // 2
        object.__setattr__(self, "tau", self.tau_step * np.arange(-h, h + 1, dtype=float))

    @property
    def xi(self) -> np.ndarray:
        return wavenumbers(self.n_modes)


def window_slices(u: Trajectory, T: float) -> tuple:
    """Times and coefficient rows of ``u`` inside [-2T, 2T]; DomainError if not covered."""
    if not T > 0:
        raise ConfigurationError("window half-width T must be positive")
    tol = 1e-9 * max(1.0, u.dt)
    if u.t0 > -2.0 * T + tol or u.t_end < 2.0 * T - tol:
        raise DomainError(f"trajectory window [{u.t0}, {u.t_end}] does not cover [-{2 * T}, {2 * T}]")
    times = u.times
    sel = np.abs(times) <= 2.0 * T + tol
    return times[sel], u.coeffs[sel]


def spacetime_fourier(u: Trajectory, T: float, pad_factor: int = 8,
                      apply_cutoff: bool = True) -> SpaceTimeSpectrum:
    """Space-time transform of chi_T u with time zero padding by ``pad_factor``."""
    if int(pad_factor) < 4:
        raise ConfigurationError("pad_factor must be >= 4")
    times, coeffs = window_slices(u, T)
    if apply_cutoff:
        coeffs = coeffs * cutoff_T(times, T)[:, None]
    n_win = coeffs.shape[0]
    L = int(pad_factor) * n_win
    if L % 2 == 0:
        L += 1
    spec = np.fft.fft(coeffs, n=L, axis=0)
    spec = np.fft.fftshift(spec, axes=0)
    h = (L - 1) // 2
    tau_step = TWO_PI / (L * u.dt)
    tau = tau_step * np.arange(-h, h + 1, dtype=float)
    spec *= (u.dt / SQRT_2PI) * np.exp(-1j * times[0] * tau)[:, None]
    return SpaceTimeSpectrum(u.n_modes, L, tau_step, spec, T, int(pad_factor))


def _weights(S: SpaceTimeSpectrum, s: float, b: float, sign: int) -> np.ndarray:
    xi = S.xi
    modulation = bracket(S.tau[:, None] + sign * (xi * xi)[None, :])
    return bracket(xi)[None, :] ** s * modulation ** b


def xsb_norm(S: SpaceTimeSpectrum, s: float, b: float, sign: int = 1) -> float:
    """||.||_{X_{s,b}} (sign +1) or ||.||_{X^-_{s,b}} (sign -1), tau integral as a Riemann sum."""
    w = _weights(S, 2.0 * s, 2.0 * b, 1 if sign >= 0 else -1)
    return float(math.sqrt(S.tau_step * np.sum(w * np.abs(S.values) ** 2)))


def ysb_norm(S: SpaceTimeSpectrum, s: float, b: float, sign: int = 1) -> float:
    """||.||_{Y_{s,b}}: L^2 in xi of the weighted L^1 norm in tau."""
    w = _weights(S, s, b, 1 if sign >= 0 else -1)
    cols = S.tau_step * np.sum(w * np.abs(S.values), axis=0)
    return float(math.sqrt(np.sum(cols ** 2)))


def z_norm(S: SpaceTimeSpectrum, s: float) -> float:
    """||.||_{Z_s} = ||.||_{X_{s,1/2}} + ||.||_{Y_{s,0}}."""
    return xsb_norm(S, s, 0.5) + ysb_norm(S, s, 0.0)


# ---------------------------------------------------------------------------
# physical-space norms of the windowed field
# ---------------------------------------------------------------------------

def windowed_coeffs(u: Trajectory, T: float, apply_cutoff: bool = True) -> tuple:
    times, coeffs = window_slices(u, T)
    if apply_cutoff:
        coeffs = coeffs * cutoff_T(times, T)[:, None]
    return times, coeffs


def lp_t_hs_norm(u: Trajectory, T: float, p: float, s: float, apply_cutoff: bool = True) -> float:
    """||chi_T u||_{L^p_t H^s_x} with a Riemann sum in t."""
    _, c = windowed_coeffs(u, T, apply_cutoff)
    hs = np.sqrt(np.sum(bracket(wavenumbers(u.n_modes)) ** (2 * s) * np.abs(c) ** 2, axis=1))
    if math.isinf(p):
        return float(hs.max())
    return float((u.dt * np.sum(hs ** p)) ** (1.0 / p))


def lp_tx_norm(u: Trajectory, T: float, p: float, apply_cutoff: bool = True) -> float:
    """||chi_T u||_{L^p_{t,x}}; x quadrature on the 2x padded grid."""
    _, c = windowed_coeffs(u, T, apply_cutoff)
    m = 2 * u.n_modes
    vals = np.abs(coeffs_to_values(resample_coeffs(c, m)))
    return float((u.dt * TWO_PI / m * np.sum(vals ** p)) ** (1.0 / p))


__all__ = [
    "SpaceTimeSpectrum",
    "cutoff",
    "cutoff_T",
    "spacetime_fourier",
    "xsb_norm",
    "ysb_norm",
    "z_norm",
    "lp_t_hs_norm",
    "lp_tx_norm",
    "window_slices",
    "windowed_coeffs",
]
