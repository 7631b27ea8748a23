"""Time integration of the periodic DNLS and its gauge-equivalent equation.

Both equations have the form u_t = i u_xx + N(u).  In Fourier variables the
linear part is the diagonal phase exp(-i t xi^2), which the integrating
factor RK4 scheme absorbs exactly; only N is stepped by RK4.

    DNLS:    N(u) = lam d_x(|u|^2 u)
    gauged:  N(v) = -v^2 d_x conj(v) + i/2 |v|^4 v - i mu |v|^2 v + i psi(v) v

mu is the mass of the initial datum and stays frozen; psi is re-evaluated
from the current stage value.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import BlowUpError, ConfigurationError
from .gauge import gauge_forward, gauge_slice, mass
from .torus import (
    TWO_PI,
    TorusField,
    Trajectory,
    bracket,
    check_grid_size,
    coeffs_to_values,
    resample_coeffs,
    values_to_coeffs,
    wavenumbers,
)

log = logging.getLogger(__name__)

EQUATIONS = ("dnls", "gauged")
DEALIAS_MODES = ("two_thirds", "pad2x", "off")
INTEGRATORS = ("if_rk4", "split_step")
BLOWUP_SENTINEL = 1e6


@dataclass(frozen=True)
class SolverConfig:
    equation: str = "dnls"
    lam: float = 1.0
    n_modes: int = 64
    dt: float = 1e-4
    t_final: float = 1.0
    dealias: str = "two_thirds"
    integrator: str = "if_rk4"
    backward: bool = False
    save_every: int = 1

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ConfigurationError(f"equation must be one of {EQUATIONS}")
        if self.dealias not in DEALIAS_MODES:
            raise ConfigurationError(f"dealias must be one of {DEALIAS_MODES}")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {INTEGRATORS}")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if not self.t_final > 0:
            raise ConfigurationError("t_final must be positive")
        if self.equation == "gauged" and self.lam != 1.0:
            raise ConfigurationError("the gauged equation is written for lambda = 1")
        if int(self.save_every) < 1:
            raise ConfigurationError("save_every must be >= 1")
        check_grid_size(self.n_modes)


# ---------------------------------------------------------------------------
# pseudo-spectral products
# ---------------------------------------------------------------------------

def _grid_sizes(n: int, dealias: str) -> tuple:
    """Grid sizes used for cubic and quintic products."""
    if dealias == "pad2x":
        return 2 * n, 4 * n
    if dealias == "two_thirds":
        return n, 2 * n
    return n, n


def _output_mask(n: int, dealias: str) -> np.ndarray:
    xi = wavenumbers(n)
    mask = np.ones(n)
    mask[n // 2] = 0.0
    if dealias == "two_thirds":
        mask[np.abs(xi) > n / 3.0] = 0.0
    return mask


def _on(c: np.ndarray, m: int) -> np.ndarray:
    return coeffs_to_values(resample_coeffs(c, m))


def _back(vals: np.ndarray, n: int) -> np.ndarray:
    return resample_coeffs(values_to_coeffs(vals), n)


def _dnls_coeffs(c: np.ndarray, lam: float, dealias: str) -> np.ndarray:
    n = c.shape[-1]
    m3, _ = _grid_sizes(n, dealias)
    u = _on(c, m3)
    w = _back(np.abs(u) ** 2 * u, n)
    return lam * 1j * wavenumbers(n) * w * _output_mask(n, dealias)


def _mean_axis(vals: np.ndarray) -> np.ndarray:
    return np.mean(vals, axis=-1, keepdims=True)


def _psi_coeffs(c: np.ndarray, mu: float) -> np.ndarray:
    """psi for each row of ``c`` (keepdims), quadrature on the 2x grid."""
    n = c.shape[-1]
    m = 2 * n
    cm = resample_coeffs(c, m)
    v = coeffs_to_values(cm)
    vx = coeffs_to_values(1j * wavenumbers(m) * cm)
    im_term = _mean_axis(2.0 * np.imag(np.conj(vx) * v))
    quart = _mean_axis(np.abs(v) ** 4)
    return im_term - 0.5 * quart + mu * mu


def _gauged_coeffs(c: np.ndarray, mu: float, dealias: str) -> np.ndarray:
    n = c.shape[-1]
    xi = wavenumbers(n)
    m3, m5 = _grid_sizes(n, dealias)
    v = _on(c, m3)
    vx = _on(1j * xi * c, m3)
    cubic = -v * v * np.conj(vx) - 1j * mu * np.abs(v) ** 2 * v
    out = _back(cubic, n)
    v5 = _on(c, m5)
    out = out + _back(0.5j * np.abs(v5) ** 4 * v5, n)
    out = out + 1j * _psi_coeffs(c, mu) * c
    return out * _output_mask(n, dealias)


def _gauged_delta_coeffs(ca: np.ndarray, cd: np.ndarray, mu: float,
                         dealias: str) -> np.ndarray:
    """N(a + d) - N(a) for the gauged nonlinearity, expanded so that every
    term carries a factor of d (no cancellation when d is tiny)."""
    n = ca.shape[-1]
    xi = wavenumbers(n)
    m3, m5 = _grid_sizes(n, dealias)
    a, d = _on(ca, m3), _on(cd, m3)
    ax, dx = _on(1j * xi * ca, m3), _on(1j * xi * cd, m3)
    b = a + d
    q = 2.0 * np.real(np.conj(a) * d) + np.abs(d) ** 2  # |a+d|^2 - |a|^2
    cubic = -((2.0 * a * d + d * d) * np.conj(ax) + b * b * np.conj(dx))
    cubic = cubic - 1j * mu * (np.abs(b) ** 2 * d + q * a)
    out = _back(cubic, n)

    a5, d5 = _on(ca, m5), _on(cd, m5)
    b5 = a5 + d5
    q5 = 2.0 * np.real(np.conj(a5) * d5) + np.abs(d5) ** 2
    quint = np.abs(b5) ** 4 * d5 + q5 * (np.abs(b5) ** 2 + np.abs(a5) ** 2) * a5
    out = out + _back(0.5j * quint, n)

    m = 2 * n
    ap, dp = _on(ca, m), _on(cd, m)
    apx, dpx = _on(1j * xi * ca, m), _on(1j * xi * cd, m)
    qp = 2.0 * np.real(np.conj(ap) * dp) + np.abs(dp) ** 2
    dpsi = _mean_axis(2.0 * np.imag(np.conj(apx) * dp + np.conj(dpx) * ap + np.conj(dpx) * dp))
    dpsi = dpsi - 0.5 * _mean_axis(qp * (np.abs(ap + dp) ** 2 + np.abs(ap) ** 2))
    psi_b = _psi_coeffs(ca + cd, mu)
    out = out + 1j * (psi_b * cd + dpsi * ca)
    return out * _output_mask(n, dealias)


def nonlinearity_dnls(u: TorusField, lam: float, dealias: str = "two_thirds") -> TorusField:
    """lam d_x(|u|^2 u) with the chosen dealiasing."""
    return TorusField.from_coeffs(_dnls_coeffs(u.coeffs, lam, dealias), u.t)


def nonlinearity_gauged(v: TorusField, mu: float, dealias: str = "two_thirds") -> TorusField:
    """-v^2 d_x conj(v) + i/2 |v|^4 v - i mu |v|^2 v + i psi(v) v."""
    return TorusField.from_coeffs(_gauged_coeffs(v.coeffs, mu, dealias), v.t)


def _rhs(cfg: SolverConfig, mu: float):
    if cfg.equation == "dnls":
        return lambda c: _dnls_coeffs(c, cfg.lam, cfg.dealias)
    return lambda c: _gauged_coeffs(c, mu, cfg.dealias)


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

def _if_rk4_step(c, rhs, e_half, e_full, h):
    k1 = rhs(c)
    k2 = rhs(e_half * (c + 0.5 * h * k1))
    k3 = rhs(e_half * c + 0.5 * h * k2)
    k4 = rhs(e_full * c + h * e_half * k3)
    return e_full * c + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def _split_step(c, rhs, e_half, e_full, h):
    c = e_half * c
    k1 = rhs(c)
    k2 = rhs(c + 0.5 * h * k1)
    k3 = rhs(c + 0.5 * h * k2)
    k4 = rhs(c + h * k3)
    c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return e_half * c


def _march(c0: np.ndarray, cfg: SolverConfig, rhs, n_steps: int, h: float, t_start: float):
    """Advance ``n_steps`` steps of signed size ``h``; returns saved coefficient rows."""
    xi = wavenumbers(c0.shape[-1])
    lin = -1j * xi * xi
    e_half = np.exp(0.5 * h * lin)
    e_full = np.exp(h * lin)
    step = _if_rk4_step if cfg.integrator == "if_rk4" else _split_step
    weight = bracket(xi)
    saved = [c0.copy()]
    c = c0.copy()
    for k in range(1, n_steps + 1):
        c = step(c, rhs, e_half, e_full, h)
        norm = math.sqrt(float(np.sum(weight * np.abs(c) ** 2)))
        if not np.isfinite(norm) or norm > BLOWUP_SENTINEL:
            t_bad = t_start + k * h
            raise BlowUpError(
                f"blow-up detected at t={t_bad:.6g} (H^1/2 norm {norm:.3g})",
                last_time=t_start + (k - 1) * h,
                trajectory=np.array(saved),
            )
        if k % cfg.save_every == 0:
            saved.append(c.copy())
    return saved


def solve(u0: TorusField, cfg: SolverConfig, mu: float | None = None) -> Trajectory:
    """Evolve ``u0`` with ``cfg``; slices every ``save_every`` steps.

    The step is shrunk so that an integer number of steps covers
    [0, t_final].  With ``cfg.backward`` the window is [-t_final, t_final].
    ``mu`` overrides the frozen mass of the gauged equation.
    """
    if u0.n_modes != cfg.n_modes:
        u0 = u0.resample(cfg.n_modes)
    n_steps = max(1, math.ceil(cfg.t_final / cfg.dt - 1e-9))
    n_steps += (-n_steps) % cfg.save_every
    h = cfg.t_final / n_steps
    if cfg.equation == "gauged" and mu is None:
        mu = mass(u0)
    rhs = _rhs(cfg, mu)
    c0 = u0.coeffs.copy()
    try:
        fwd = _march(c0, cfg, rhs, n_steps, h, 0.0)
        if not cfg.backward:
            return Trajectory.from_coeffs(0.0, h * cfg.save_every, np.array(fwd))
        bwd = _march(c0, cfg, rhs, n_steps, -h, 0.0)
    except BlowUpError as exc:
        if exc.trajectory is not None:
            exc.trajectory = Trajectory.from_coeffs(0.0, abs(h) * cfg.save_every, exc.trajectory)
        raise
    rows = np.array(bwd[:0:-1] + fwd)
    return Trajectory.from_coeffs(-cfg.t_final, h * cfg.save_every, rows)


# ---------------------------------------------------------------------------
# conservation monitors
# ---------------------------------------------------------------------------

def energy_terms(u: TorusField, lam: float = 1.0) -> tuple:
    """(||u_x||^2, 3/2 lam Im int |u|^2 u conj(u_x), lam^2/2 ||u||_6^6).

    For lam = 1 the sum is the conserved energy; general lam follows from the
    rescaling u -> |lam|^{1/2} u(t, sign(lam) x) onto the lam = 1 equation.
    Quadrature on a 4x padded grid is exact for band-limited u.
    """
    n = u.n_modes
    m = 4 * n
    c = resample_coeffs(u.coeffs, m)
    v = coeffs_to_values(c)
    vx = coeffs_to_values(1j * wavenumbers(m) * c)
    w = TWO_PI / m
    kinetic = w * float(np.sum(np.abs(vx) ** 2))
    mixed = 1.5 * lam * w * float(np.sum(np.imag(np.abs(v) ** 2 * v * np.conj(vx))))
    sextic = 0.5 * lam * lam * w * float(np.sum(np.abs(v) ** 6))
    return kinetic, mixed, sextic


def energy(u: TorusField, lam: float = 1.0) -> float:
    return float(sum(energy_terms(u, lam)))


@dataclass
class ConservedReport:
    times: list
    mass: list
    energy: list
    drift: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.times, self.mass, self.energy))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "mass", "energy"])
            for row in self.rows():
                writer.writerow([repr(float(x)) for x in row])
        return path


def _relative_drift(q: np.ndarray, scale: float) -> float:
    q0 = q[0]
    denom = abs(q0) if abs(q0) >= 1e-12 * scale else scale
    if denom == 0.0:
        return 0.0
    return float(np.max(np.abs(q - q0)) / denom)


def conserved_report(u: Trajectory, lam: float = 1.0) -> ConservedReport:
    """Mass ||u(t)||^2 and energy E(t) along ``u`` with their max relative drift.

    When |q(0)| is negligible against the size of its constituents (e.g. a
    plane wave with E = 0) the drift is measured against that size instead.
    """
    masses, energies, scales = [], [], []
    for s in u.slices:
        masses.append(float(np.sum(np.abs(s.coeffs) ** 2)))
        terms = energy_terms(s, lam)
        energies.append(sum(terms))
        scales.append(sum(abs(x) for x in terms))
    m = np.array(masses)
    e = np.array(energies)
    drift = {
        "mass": _relative_drift(m, m[0]),
        "energy": _relative_drift(e, scales[0]),
    }
    return ConservedReport(u.times.tolist(), masses, energies, drift)


# ---------------------------------------------------------------------------
# Picard / Duhamel iteration for the gauged equation
# ---------------------------------------------------------------------------

@dataclass
class PicardResult:
    iterates: list
    differences: list
    ratios: list
    diverged: bool = False

    @property
    def fixed_point(self) -> Trajectory:
        return self.iterates[-1]


def sup_h_half(c: np.ndarray) -> float:
    """max over rows of the H^1/2 norm of coefficient rows ``c``."""
    w = bracket(wavenumbers(c.shape[-1]))
    return float(np.sqrt(np.max(np.sum(w * np.abs(c) ** 2, axis=-1))))


def picard_iterate(v0: TorusField, T: float, n_iter: int, cfg: SolverConfig) -> PicardResult:
    """Iterate v <- W(t) v0 + int_0^t W(t - t') N(v)(t') dt' on [0, T].

    The Duhamel integral is taken in the interaction picture by cumulative
    composite Simpson on the grid t_k = k dt.  Successive differences
    delta_m = v^(m+1) - v^(m) are propagated directly through
    N(v^(m-1) + delta_{m-1}) - N(v^(m-1)), so their size is resolved far
    below the rounding level of the iterates themselves.
    """
    if n_iter < 1:
        raise ConfigurationError("n_iter must be >= 1")
    if v0.n_modes != cfg.n_modes:
        v0 = v0.resample(cfg.n_modes)
    n_steps = max(2, math.ceil(T / cfg.dt - 1e-9))
    h = T / n_steps
    times = h * np.arange(n_steps + 1)
    xi = wavenumbers(cfg.n_modes)
    phase = np.exp(-1j * np.outer(times, xi * xi))
    mu = mass(v0)

    def duhamel(f):
        g = np.conj(phase) * f
        acc = (cumulative_simpson(g.real, dx=h, axis=0, initial=0.0)
               + 1j * cumulative_simpson(g.imag, dx=h, axis=0, initial=0.0))
        return phase * acc

    current = phase * v0.coeffs
    iterates = [Trajectory.from_coeffs(0.0, h, current)]
    delta = duhamel(_gauged_coeffs(current, mu, cfg.dealias))
    prev = current
    diffs, ratios = [], []
    diverged, run = False, 0
    for m in range(n_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            if m > 0:
                delta = duhamel(_gauged_delta_coeffs(prev, delta, mu, cfg.dealias))
            prev = current
            current = current + delta
            diffs.append(sup_h_half(delta))
        iterates.append(Trajectory.from_coeffs(0.0, h, current))
        if not np.isfinite(diffs[-1]):
            diverged = True
            log.warning("Picard iteration overflowed at m=%d: T=%g too large", m, T)
            break
        if len(diffs) > 1:
            r = diffs[-1] / diffs[-2] if diffs[-2] > 0 else 0.0
            ratios.append(r)
            run = run + 1 if r > 1.0 else 0
            if run >= 3 and not diverged:
                diverged = True
                log.warning("Picard iteration diverging at m=%d: T=%g too large", m, T)
        if diffs[-1] == 0.0:
            break
    return PicardResult(iterates, diffs, ratios, diverged)


# ---------------------------------------------------------------------------
# gauge equivalence
# ---------------------------------------------------------------------------

def gauge_equivalence_check(u0: TorusField, T: float, cfg: SolverConfig) -> float:
    """sup_t ||G(u)(t) - v(t)||_{H^1/2} for u from DNLS (lam = 1) and v from
    the gauged equation started at G(u0)."""
    if u0.n_modes != cfg.n_modes:
        u0 = u0.resample(cfg.n_modes)
    base = replace(cfg, t_final=T, backward=False)
    u = solve(u0, replace(base, equation="dnls", lam=1.0))
    v = solve(gauge_slice(u0), replace(base, equation="gauged", lam=1.0), mu=mass(u0))
    gu = gauge_forward(u)
    return sup_h_half(gu.coeffs - v.coeffs)


def plane_wave(amplitude: float, k: int, n_modes: int, t: float = 0.0,
               lam: float = 1.0) -> TorusField:
    """Exact DNLS plane wave A exp(i(kx - omega t)), omega = k^2 - lam A^2 k."""
    omega = k * k - lam * amplitude * amplitude * k
    return TorusField.from_modes({k: amplitude * np.exp(-1j * omega * t)}, n_modes, t)


__all__ = [
    "SolverConfig",
    "ConservedReport",
    "PicardResult",
    "nonlinearity_dnls",
    "nonlinearity_gauged",
    "solve",
    "energy",
    "energy_terms",
    "conserved_report",
    "picard_iterate",
    "gauge_equivalence_check",
    "plane_wave",
    "sup_h_half",
]
