"""Periodic complex fields on the torus R/2piZ and their linear calculus.

Fourier coefficients follow the unitary convention

    coeff(xi) = (2 pi)^(-1/2) * integral_0^{2pi} exp(-i x xi) f(x) dx,

approximated on the grid x_j = 2 pi j / N by the trapezoidal rule, so that
``coeffs = sqrt(2 pi) / N * fft(values)``.  With this normalisation
``sum |coeff|^2 = ||f||_{L^2}^2`` and Sobolev norms are plain weighted sums.
Coefficient arrays are kept in numpy FFT order; ``wavenumbers(n)`` gives the
matching integer frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi
SQRT_2PI = math.sqrt(TWO_PI)


def check_grid_size(n: int) -> int:
    """Validate a grid size: a power of two and at least 4."""
    n = int(n)
    if n < 4 or n & (n - 1):
        raise ConfigurationError(f"grid size must be a power of two >= 4, got {n}")
    return n


def wavenumbers(n: int) -> np.ndarray:
    """Integer frequencies (as floats) in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
    return np.fft.fftfreq(n, 1.0 / n)


def nyquist_mask(n: int) -> np.ndarray:
    """Boolean mask that is False only at the unpaired mode -N/2."""
    mask = np.ones(n, dtype=bool)
    mask[n // 2] = False
    return mask


def grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def bracket(a):
    """Japanese bracket <a> = (1 + |a|^2)^(1/2)."""
    return np.sqrt(1.0 + np.square(a))


def values_to_coeffs(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    return np.fft.fft(values, axis=-1) * (SQRT_2PI / n)


def coeffs_to_values(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    return np.fft.ifft(coeffs, axis=-1) * (n / SQRT_2PI)


def resample_coeffs(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad or truncate coefficient arrays (last axis) to grid size ``m``.

    When padding, the Nyquist coefficient of the source grid is split evenly
    between +N/2 and -N/2 so that the resampled field interpolates the
    original samples.  The 1/N normalisation is built into ``coeffs`` so the
    coefficients themselves do not need rescaling.
    """
    n = coeffs.shape[-1]
    if m == n:
        return coeffs.copy()
    out = np.zeros(coeffs.shape[:-1] + (m,), dtype=complex)
    if m > n:
        h = n // 2
        out[..., :h] = coeffs[..., :h]
        out[..., m - h + 1:] = coeffs[..., h + 1:]
        out[..., h] = 0.5 * coeffs[..., h]
        out[..., m - h] = 0.5 * coeffs[..., h]
    else:
        h = m // 2
        out[..., :h] = coeffs[..., :h]
        out[..., h + 1:] = coeffs[..., n - h + 1:]
        # the new Nyquist slot collects both +-m/2 modes
        out[..., h] = coeffs[..., h] + coeffs[..., n - h]
    return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TorusField:
    """One time slice of a complex 2pi-periodic function.

    ``values`` holds the N grid samples; ``coeffs`` is computed at
    construction and both arrays are read-only afterwards.
    """

    values: np.ndarray
    t: float = 0.0
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 1:
            raise ConfigurationError("TorusField values must be one-dimensional")
        check_grid_size(vals.shape[0])
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "coeffs", _readonly(values_to_coeffs(vals)))

    # construction helpers -------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs, t: float = 0.0) -> "TorusField":
        c = np.asarray(coeffs, dtype=complex)
        check_grid_size(c.shape[-1])
        return cls(coeffs_to_values(c), t)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int,
                      t: float = 0.0) -> "TorusField":
        x = grid(check_grid_size(n))
        return cls(np.broadcast_to(func(x), x.shape), t)

    @classmethod
    def from_modes(cls, amplitudes: Mapping[int, complex], n: int,
                   t: float = 0.0) -> "TorusField":
        """Trigonometric polynomial sum_k amplitudes[k] * exp(i k x)."""
        n = check_grid_size(n)
        x = grid(n)
        vals = np.zeros(n, dtype=complex)
        for k, a in amplitudes.items():
            if not -n // 2 < k < n // 2:
                raise ConfigurationError(f"mode {k} not representable on N={n}")
            vals += a * np.exp(1j * k * x)
        return cls(vals, t)

    @classmethod
    def zeros(cls, n: int, t: float = 0.0) -> "TorusField":
        return cls(np.zeros(check_grid_size(n), dtype=complex), t)

    # accessors ------------------------------------------------------------

    @property
    def n_modes(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return grid(self.n_modes)

    @property
    def xi(self) -> np.ndarray:
        return wavenumbers(self.n_modes)

    def coeff(self, xi: int) -> complex:
        n = self.n_modes
        if not -n // 2 <= xi < n // 2:
            raise IndexError(f"frequency {xi} outside [-{n // 2}, {n // 2 - 1}]")
        return complex(self.coeffs[int(xi) % n])

    def centered(self):
        """Return (xi, coeffs) ordered from -N/2 to N/2-1."""
        return np.fft.fftshift(self.xi), np.fft.fftshift(self.coeffs)

    def with_time(self, t: float) -> "TorusField":
        return TorusField(self.values, t)

    def conj(self) -> "TorusField":
        return TorusField(np.conj(self.values), self.t)

    def resample(self, m: int) -> "TorusField":
        return TorusField.from_coeffs(resample_coeffs(self.coeffs, check_grid_size(m)), self.t)

    # arithmetic on samples ------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TorusField):
            return TorusField(self.values + other.values, self.t)
        return TorusField(self.values + other, self.t)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TorusField):
            return TorusField(self.values - other.values, self.t)
        return TorusField(self.values - other, self.t)

    def __mul__(self, other):
        if isinstance(other, TorusField):
            return TorusField(self.values * other.values, self.t)
        return TorusField(self.values * other, self.t)

    __rmul__ = __mul__

    def __neg__(self):
        return TorusField(-self.values, self.t)

    # serialisation --------------------------------------------------------

    def to_record(self) -> dict:
        samples = np.empty(2 * self.n_modes)
        samples[0::2] = self.values.real
        samples[1::2] = self.values.imag
        return {"n_modes": self.n_modes, "t": self.t, "samples": samples.tolist()}

    @classmethod
    def from_record(cls, record: Mapping) -> "TorusField":
        s = np.asarray(record["samples"], dtype=float)
        n = int(record["n_modes"])
        if s.shape != (2 * n,):
            raise ConfigurationError("sample count does not match n_modes")
        return cls(s[0::2] + 1j * s[1::2], float(record.get("t", 0.0)))


# ---------------------------------------------------------------------------
# Spectral operations on single slices
# ---------------------------------------------------------------------------

def to_spectral(f: TorusField) -> np.ndarray:
    """Fourier coefficient table of ``f`` in FFT order (see ``wavenumbers``)."""
    return f.coeffs.copy()


def from_spectral(coeffs, t: float = 0.0) -> TorusField:
    return TorusField.from_coeffs(coeffs, t)


def apply_multiplier(f: TorusField, symbol: np.ndarray, odd: bool = False) -> TorusField:
    """Multiply coefficients by ``symbol``; odd symbols drop the Nyquist mode."""
    c = f.coeffs * symbol
    if odd:
        c[f.n_modes // 2] = 0.0
    return TorusField.from_coeffs(c, f.t)


def derivative(f: TorusField) -> TorusField:
    return apply_multiplier(f, 1j * f.xi, odd=True)


def bessel_potential(f: TorusField, s: float) -> TorusField:
    """J^s f: multiply coeff(xi) by <xi>^s."""
    return apply_multiplier(f, bracket(f.xi) ** s)


def sobolev_norm(f: TorusField, s: float) -> float:
    w = bracket(f.xi) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def lp_norm(f: TorusField, p: float) -> float:
    """L^p([0, 2pi]) norm by the periodic trapezoidal rule.

    For p > 2 the field is first resampled on a 2x zero-padded grid, which
    makes the rule exact for |f|^p that are trigonometric polynomials of
    degree < 2N (e.g. p = 4, 6 on band-limited input).
    """
    if p < 1:
        raise ConfigurationError(f"L^p norm needs p >= 1, got {p}")
    vals = f.values
    if p > 2:
        vals = coeffs_to_values(resample_coeffs(f.coeffs, 2 * f.n_modes))
    a = np.abs(vals)
    if math.isinf(p):
        return float(a.max())
    return float((TWO_PI / a.size * np.sum(a ** p)) ** (1.0 / p))


def free_propagator(f: TorusField, t: float) -> TorusField:
    """W(t) f: coeff(xi) -> exp(-i t xi^2) coeff(xi)."""
    xi = f.xi
    return TorusField.from_coeffs(f.coeffs * np.exp(-1j * t * xi * xi), f.t + t)


def translate(f: TorusField, a: float) -> TorusField:
    """Return x -> f(x + a) via the spectral phase exp(i a xi), Nyquist as xi = -N/2."""
    if a == 0.0:
        return f
    return apply_multiplier(f, np.exp(1j * a * f.xi), odd=False)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Slices u(t0 + k dt, .) for k = 0..n_slices-1 on a common grid.

    Values are stored as an (n_slices, N) array; ``coeffs`` is the matching
    spectral table, computed once at construction.
    """

    t0: float
    dt: float
    values: np.ndarray
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise ConfigurationError("Trajectory values must be (n_slices, N)")
        check_grid_size(vals.shape[1])
        if not self.dt > 0:
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "coeffs", _readonly(values_to_coeffs(vals)))

    @classmethod
    def from_slices(cls, slices: Sequence[TorusField], t0: float, dt: float) -> "Trajectory":
        sizes = {s.n_modes for s in slices}
        if len(sizes) != 1:
            raise ConfigurationError("all slices must share the grid size")
        return cls(t0, dt, np.stack([s.values for s in slices]))

    @classmethod
    def from_coeffs(cls, t0: float, dt: float, coeffs) -> "Trajectory":
        return cls(t0, dt, coeffs_to_values(np.asarray(coeffs, dtype=complex)))

    @property
    def n_slices(self) -> int:
        return self.values.shape[0]

    @property
    def n_modes(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_slices)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.n_slices - 1)

    @property
    def slices(self) -> tuple:
        return tuple(self.slice(k) for k in range(self.n_slices))

    def slice(self, k: int) -> TorusField:
        return TorusField(self.values[k], self.t0 + k * self.dt)

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        """Index of the slice at time ``t``; DomainError if ``t`` is not a grid time."""
        k = int(round((t - self.t0) / self.dt))
        if not 0 <= k < self.n_slices or abs(self.t0 + k * self.dt - t) > tol * max(1.0, self.dt):
            raise DomainError(f"time {t} is not a slice of the window "
                              f"[{self.t0}, {self.t_end}] with step {self.dt}")
        return k

    def map_coeffs(self, func) -> "Trajectory":
        return Trajectory.from_coeffs(self.t0, self.dt, func(self.coeffs))

    def to_record(self) -> dict:
        return {
            "t0": self.t0,
            "dt": self.dt,
            "n_slices": self.n_slices,
            "n_modes": self.n_modes,
            "slices": [s.to_record() for s in self.slices],
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Trajectory":
        slices = [TorusField.from_record(r) for r in record["slices"]]
        if len(slices) != int(record["n_slices"]):
            raise ConfigurationError("n_slices does not match the stored slices")
        traj = cls.from_slices(slices, record["t0"], record["dt"])
        if traj.n_modes != int(record["n_modes"]):
            raise ConfigurationError("n_modes does not match the stored slices")
        return traj


def galilean_shift(u: Trajectory, mu: float) -> Trajectory:
    """tau_mu u(t, x) = u(t, x + 2 mu t), slice by slice via exp(i 2 mu t xi).

    The Nyquist coefficient is kept and shifted as xi = -N/2, so the shift is
    unitary on the grid and tau_{-mu} tau_mu is the identity for any field,
    band-limited or not.
    """
    if mu == 0.0:
        return u
    xi = wavenumbers(u.n_modes)
    phase = np.exp(1j * 2.0 * mu * np.outer(u.times, xi))
    return Trajectory.from_coeffs(u.t0, u.dt, u.coeffs * phase)


def save_trajectory(u: Trajectory, path) -> Path:
    """Write ``u`` as JSON (``.json``) or as a binary ``.npz`` record."""
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(u.to_record()))
    else:
        samples = np.empty((u.n_slices, 2 * u.n_modes))
        samples[:, 0::2] = u.values.real
        samples[:, 1::2] = u.values.imag
        with open(path, "wb") as fh:
            np.savez(fh, t0=u.t0, dt=u.dt, n_slices=u.n_slices,
                     n_modes=u.n_modes, samples=samples)
    return path


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    if path.suffix == ".json":
        return Trajectory.from_record(json.loads(path.read_text()))
    with np.load(path) as data:
        s = data["samples"]
        if s.shape != (int(data["n_slices"]), 2 * int(data["n_modes"])):
            raise ConfigurationError("binary trajectory header does not match samples")
        return Trajectory(float(data["t0"]), float(data["dt"]), s[:, 0::2] + 1j * s[:, 1::2])
