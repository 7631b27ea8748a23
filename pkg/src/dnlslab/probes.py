"""Empirical ratio probes for the space-time estimates.

Every probe returns LHS / RHS with all constants set to one, evaluated on a
declared sample family.  Nothing is asserted here: callers compare the sup
ratio across refinements (grid size, time padding, sample count).

Sample families (band |xi| <= band, time grid on [-2, 2]):

    free      W(t) u0 for random u0
    offshell  sum_xi a_xi exp(i xi x - i (xi^2 + w_xi) t), random w_xi
    plane     A exp(i (k x - k^2 t))

Fields that enter an estimate with support in |t| <= 1 are multiplied by
chi_{1/2}; norms are then taken with the chi_1 window, which equals one on
that support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .spacetime import (
    cutoff_T,
    lp_t_hs_norm,
    lp_tx_norm,
    spacetime_fourier,
    xsb_norm,
    ysb_norm,
    z_norm,
)
from .torus import Trajectory, bracket, coeffs_to_values, values_to_coeffs, wavenumbers

FAMILIES = ("free", "offshell", "plane")
PROBES = (
    "sobolev",
    "x_in_y",
    "strichartz",
    "cutoff_y",
    "cutoff_x",
    "linear_homogeneous",
    "linear_inhomogeneous",
    "trilinear_x",
    "trilinear_y",
    "quintic",
    "cubic_poly",
    "gen_trilinear",
)


@dataclass(frozen=True)
class ProbeSetup:
    n_modes: int = 32
    dt: float = 1.0 / 128.0
    pad_factor: int = 8
    n_samples: int = 6
    band: int = 3
    seed: int = 0
    window: float = 1.0

    def doubled(self) -> "ProbeSetup":
        """Double grid size, time padding and sample count together."""
        return replace(self, n_modes=2 * self.n_modes, pad_factor=2 * self.pad_factor,
                       n_samples=2 * self.n_samples)

    @property
    def times(self) -> np.ndarray:
        m = int(round(2.0 * self.window / self.dt))
        return self.dt * np.arange(-m, m + 1)


@dataclass
class ProbeResult:
    name: str
    ratios: list
    anomalies: int = 0
    details: dict = field(default_factory=dict)

    @property
    def sup(self) -> float:
        return float(max(self.ratios)) if self.ratios else 0.0

    def summary(self) -> dict:
        return {"probe": self.name, "sup_ratio": self.sup, "samples": len(self.ratios),
                "anomalies": self.anomalies}


def safe_ratio(lhs: float, rhs: float) -> tuple:
    """(ratio, anomaly): 0/0 -> 0; positive/0 -> inf and flagged."""
    if rhs == 0.0:
        return (0.0, False) if lhs == 0.0 else (math.inf, True)
    return lhs / rhs, False


# ---------------------------------------------------------------------------
# sample families
# ---------------------------------------------------------------------------

def _rng(setup: ProbeSetup, index: int, slot: int = 0):
    return np.random.default_rng([setup.seed, index, slot])


def sample_field(setup: ProbeSetup, index: int, slot: int = 0, family: str | None = None) -> Trajectory:
    """Deterministic sample ``index`` (independent of n_samples, so doubling nests)."""
    rng = _rng(setup, index, slot)
    family = family or FAMILIES[index % len(FAMILIES)]
    n = setup.n_modes
    xi = wavenumbers(n)
    t = setup.times
    band = np.abs(xi) <= setup.band
    a = np.zeros(n, dtype=complex)
    if family == "plane":
        k = int(rng.integers(-setup.band, setup.band + 1))
        a[k % n] = rng.uniform(0.5, 1.5) * np.exp(2j * math.pi * rng.uniform())
        omega = np.zeros(n)
    else:
        m = int(band.sum())
        a[band] = (rng.normal(size=m) + 1j * rng.normal(size=m)) * np.exp(-0.5 * np.abs(xi[band]))
        omega = np.zeros(n)
        if family == "offshell":
            omega[band] = rng.normal(scale=2.0, size=m)
    phase = np.exp(-1j * np.outer(t, xi * xi + omega))
    return Trajectory.from_coeffs(t[0], setup.dt, phase * a)


def _times_cut(u: Trajectory, T: float) -> Trajectory:
    w = cutoff_T(u.times, T)[:, None]
    return Trajectory(u.t0, u.dt, u.values * w)


def _conj(u: Trajectory) -> Trajectory:
    return Trajectory(u.t0, u.dt, np.conj(u.values))


def _product(*fields: Trajectory) -> Trajectory:
    vals = fields[0].values.copy()
    for f in fields[1:]:
        vals = vals * f.values
    return Trajectory(fields[0].t0, fields[0].dt, vals)


def _dx(u: Trajectory) -> Trajectory:
    c = u.coeffs * (1j * wavenumbers(u.n_modes))
    c[:, u.n_modes // 2] = 0.0
    return Trajectory.from_coeffs(u.t0, u.dt, c)


def _spec(u: Trajectory, setup: ProbeSetup, cut: bool = True):
    return spacetime_fourier(u, setup.window, setup.pad_factor, apply_cutoff=cut)


# ---------------------------------------------------------------------------
# individual probes; each returns (lhs, rhs)
# ---------------------------------------------------------------------------

def _sobolev(setup, k, p=4.0, s=0.5, b=0.25):
    u = sample_field(setup, k)
    return lp_t_hs_norm(u, setup.window, p, s), xsb_norm(_spec(u, setup), s, b)


def _x_in_y(setup, k, s=0.5, b1=0.0, b2=0.6):
    S = _spec(sample_field(setup, k), setup)
    return ysb_norm(S, s, b1), xsb_norm(S, s, b2)


def _strichartz(setup, k, b=0.4):
    u = sample_field(setup, k)
    return lp_tx_norm(u, setup.window, 4.0), xsb_norm(_spec(u, setup), 0.0, b)


def _cutoff_y(setup, k, s=0.5, T=0.5):
    u = _times_cut(sample_field(setup, k), setup.window)
    inner = _times_cut(u, T)
    return (ysb_norm(_spec(inner, setup, cut=False), s, 0.0),
            ysb_norm(_spec(u, setup, cut=False), s, 0.0))


def _cutoff_x(setup, k, s=0.5, T=0.5, b1=0.1, b2=0.4):
    u = _times_cut(sample_field(setup, k), setup.window)
    inner = _times_cut(u, T)
    return (xsb_norm(_spec(inner, setup, cut=False), s, b1),
            T ** (b2 - b1) * xsb_norm(_spec(u, setup, cut=False), s, b2))


def _linear_homogeneous(setup, k, s=0.5):
    u = sample_field(setup, k, family="free")
    u0 = u.coeffs[u.index_of(0.0)]
    h = math.sqrt(float(np.sum(bracket(wavenumbers(u.n_modes)) ** (2 * s) * np.abs(u0) ** 2)))
    return z_norm(_spec(u, setup), s), h


def duhamel_from_zero(f: Trajectory) -> Trajectory:
    """int_0^t W(t - t') f(t') dt' on the grid of ``f`` (cumulative Simpson)."""
    xi = wavenumbers(f.n_modes)
    phase = np.exp(-1j * np.outer(f.times, xi * xi))
    g = np.conj(phase) * f.coeffs
    acc = (cumulative_simpson(g.real, dx=f.dt, axis=0, initial=0.0)
           + 1j * cumulative_simpson(g.imag, dx=f.dt, axis=0, initial=0.0))
    acc = acc - acc[f.index_of(0.0)]
    return Trajectory.from_coeffs(f.t0, f.dt, phase * acc)


def _linear_inhomogeneous(setup, k, s=0.5):
    f = _times_cut(sample_field(setup, k), setup.window)
    d = duhamel_from_zero(f)
    Sf = _spec(f, setup, cut=False)
    return z_norm(_spec(d, setup), s), ysb_norm(Sf, s, -1.0) + xsb_norm(Sf, s, -0.5)


def _supported(setup, k, slot):
    return _times_cut(sample_field(setup, k, slot), 0.5 * setup.window)


def _xn(u, setup, s=0.5, b=0.5, sign=1):
    return xsb_norm(_spec(u, setup), s, b, sign)


def _trilinear(setup, k, y: bool):
    u1, u2 = _supported(setup, k, 1), _supported(setup, k, 2)
    u3 = _conj(_supported(setup, k, 3))
    S = _spec(_product(u1, u2, _dx(u3)), setup)
    lhs = ysb_norm(S, 0.5, -1.0) if y else xsb_norm(S, 0.5, -0.5)
    rhs = _xn(u1, setup) * _xn(u2, setup) * _xn(u3, setup, sign=-1)
    return lhs, rhs


def _quintic(setup, k, delta=0.05):
    u = [_supported(setup, k, j) for j in range(1, 6)]
    u[0], u[1] = _conj(u[0]), _conj(u[1])
    lhs = xsb_norm(_spec(_product(*u), setup), 0.5, -0.375 - delta)
    rhs = _xn(u[0], setup, sign=-1) * _xn(u[1], setup, sign=-1)
    for j in range(2, 5):
        rhs *= _xn(u[j], setup)
    return lhs, rhs


def _cubic_poly(setup, k, delta=0.05):
    u1 = _conj(_supported(setup, k, 1))
    u2, u3 = _supported(setup, k, 2), _supported(setup, k, 3)
    lhs = xsb_norm(_spec(_product(u1, u2, u3), setup), 0.5, -0.375 - delta)
    return lhs, _xn(u1, setup, sign=-1) * _xn(u2, setup) * _xn(u3, setup)


def _gen_trilinear(setup, k, s=1.0):
    u = [_supported(setup, k, j) for j in (1, 2, 3)]
    S = _spec(_product(u[0], u[1], _dx(_conj(u[2]))), setup)
    lhs = ysb_norm(S, s, -1.0) + xsb_norm(S, s, -0.5)
    hi = [_xn(v, setup, s=s) for v in u]
    lo = [_xn(v, setup) for v in u]
    rhs = sum(hi[j] * math.prod(lo[i] for i in range(3) if i != j) for j in range(3))
    return lhs, rhs


_PROBE_FUNCS = {
    "sobolev": _sobolev,
    "x_in_y": _x_in_y,
    "strichartz": _strichartz,
    "cutoff_y": _cutoff_y,
    "cutoff_x": _cutoff_x,
    "linear_homogeneous": _linear_homogeneous,
    "linear_inhomogeneous": _linear_inhomogeneous,
    "trilinear_x": lambda setup, k: _trilinear(setup, k, False),
    "trilinear_y": lambda setup, k: _trilinear(setup, k, True),
    "quintic": _quintic,
    "cubic_poly": _cubic_poly,
    "gen_trilinear": _gen_trilinear,
}


def ratio_probe(name: str, setup: ProbeSetup | None = None) -> ProbeResult:
    """Evaluate probe ``name`` on samples 0..n_samples-1 of ``setup``."""
    if name not in _PROBE_FUNCS:
        raise KeyError(f"unknown probe {name!r}; choose from {PROBES}")
    setup = setup or ProbeSetup()
    ratios, anomalies = [], 0
    for k in range(setup.n_samples):
        lhs, rhs = _PROBE_FUNCS[name](setup, k)
        r, bad = safe_ratio(lhs, rhs)
        ratios.append(r)
        anomalies += int(bad)
    return ProbeResult(name, ratios, anomalies)


def refinement_study(name: str, setup: ProbeSetup | None = None) -> dict:
    """Sup ratio at ``setup`` and at its doubled refinement, plus their quotient."""
    setup = setup or ProbeSetup()
    a = ratio_probe(name, setup)
    b = ratio_probe(name, setup.doubled())
    change = max(a.sup, b.sup) / min(a.sup, b.sup) if min(a.sup, b.sup) > 0 else math.inf
    return {"probe": name, "base": a.sup, "refined": b.sup, "change": change,
            "anomalies": a.anomalies + b.anomalies}


# ---------------------------------------------------------------------------
# high-to-low interaction family u = n^{-s} chi W(t) exp(i n x)
# ---------------------------------------------------------------------------

def highfreq_trilinear_ratio(n: int, s: float, n_modes: int = 128, dt: float = 1.0 / 512.0,
                             pad_factor: int = 8) -> float:
    """||u^2 d_x conj(u)||_{X_{s,-1/2}} / ||u||_{X_{s,1/2}}^3 for u = chi_{1/2} W(t) e^{inx}.

    For this family the ratio behaves like n^{1-2s}; the amplitude n^{-s}
    cancels, so it is omitted.
    """
    setup = ProbeSetup(n_modes=n_modes, dt=dt, pad_factor=pad_factor)
    t = setup.times
    xi = wavenumbers(n_modes)
    c = np.zeros(n_modes, dtype=complex)
    c[n % n_modes] = math.sqrt(2.0 * math.pi)
    u = Trajectory.from_coeffs(t[0], dt, np.exp(-1j * np.outer(t, xi * xi)) * c)
    u = _times_cut(u, 0.5)
    w = _product(u, u, _dx(_conj(u)))
    return xsb_norm(_spec(w, setup), s, -0.5) / _xn(u, setup, s=s) ** 3


def fit_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


__all__ = [
    "FAMILIES",
    "PROBES",
    "ProbeSetup",
    "ProbeResult",
    "safe_ratio",
    "sample_field",
    "duhamel_from_zero",
    "ratio_probe",
    "refinement_study",
    "highfreq_trilinear_ratio",
    "fit_slope",
]
