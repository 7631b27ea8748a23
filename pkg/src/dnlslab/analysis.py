"""Scenario checks: the high-frequency growth law of the first Picard iterate,
the Gagliardo-Nirenberg inequality and the small-mass a-priori H^1 bound."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .errors import ConfigurationError, PreconditionError, ResolutionError
from .evolution import SolverConfig, energy_terms, solve
from .torus import (
    SQRT_2PI,
    TWO_PI,
    TorusField,
    bracket,
    coeffs_to_values,
    resample_coeffs,
    sobolev_norm,
    values_to_coeffs,
    wavenumbers,
)

APRIORI_DELTA_LIMIT = math.sqrt(2.0 / 3.0)


# ---------------------------------------------------------------------------
# growth law for data n^{-s} exp(inx)
# ---------------------------------------------------------------------------

def _grid_for(n: int) -> int:
    m = 4
    while m // 2 <= n:
        m *= 2
    return m


def illposed_duhamel(n: int, s: float, t: float, n_modes: int | None = None,
                     n_nodes: int = 65) -> tuple:
    """First nonlinear Picard term int_0^t W(-t') (w^2 d_x conj(w)) dt', w = W(t') u0.

    u0 = n^{-s} exp(inx).  Returns (closed form, composite Simpson value,
    H^s norm of the closed form).  The closed form is -i t n^{1-3s} exp(inx).
    """
    n_modes = _grid_for(n) if n_modes is None else int(n_modes)
    if n < 1 or n >= n_modes // 2:
        raise ResolutionError(f"frequency n={n} is not resolved on N={n_modes}")
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise ConfigurationError("n_nodes must be odd and >= 3")
    amp = float(n) ** (-s)
    u0 = TorusField.from_modes({n: amp}, n_modes)
    closed = TorusField.from_modes({n: -1j * t * float(n) ** (1.0 - 3.0 * s)}, n_modes)
    xi = wavenumbers(n_modes)
    nodes = np.linspace(0.0, t, n_nodes)
    rows = []
    for tp in nodes:
        c = u0.coeffs * np.exp(-1j * tp * xi * xi)
        w = coeffs_to_values(c)
        dwbar = np.conj(coeffs_to_values(1j * xi * c))
        g = values_to_coeffs(w * w * dwbar) * np.exp(1j * tp * xi * xi)
        rows.append(g)
    rows = np.array(rows)
    if t == 0.0:
        integral = np.zeros(n_modes, dtype=complex)
    else:
        integral = simpson(rows.real, x=nodes, axis=0) + 1j * simpson(rows.imag, x=nodes, axis=0)
    numeric = TorusField.from_coeffs(integral)
    hs = abs(t) * float(n) ** (1.0 - 3.0 * s) * float(bracket(n)) ** s * SQRT_2PI
    return closed, numeric, hs


@dataclass
class ExponentFit:
    s: float
    t: float
    slope: float
    expected: float
    table: list = field(default_factory=list)

    def write_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "norm", "corrected_norm", "loglog_residual"])
            for row in self.table:
                w.writerow([repr(v) for v in row])
        return path


def illposed_exponent_fit(s: float, t: float, n_list) -> ExponentFit:
    """Least-squares slope of log ||.||_{H^s} against log n.

    Norms are divided by <n>^s / n^s so the fit isolates the n^{1-2s} law.
    """
    ns = [int(n) for n in n_list]
    if len(ns) < 3:
        raise ConfigurationError("exponent fit needs at least three values of n")
    norms, corrected = [], []
    for n in ns:
        _, numeric, _ = illposed_duhamel(n, s, t)
        h = sobolev_norm(numeric, s)
        norms.append(h)
        corrected.append(h * float(n) ** s / float(bracket(n)) ** s)
    lx, ly = np.log(ns), np.log(corrected)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    table = [(n, a, b, float(r)) for n, a, b, r in zip(ns, norms, corrected, resid)]
    return ExponentFit(float(s), float(t), float(slope), 1.0 - 2.0 * s, table)


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg
# ---------------------------------------------------------------------------

def _padded_values(f: TorusField, factor: int = 4):
    c = resample_coeffs(f.coeffs, factor * f.n_modes)
    return coeffs_to_values(c), c


def gn_check(f: TorusField) -> tuple:
    """(||f||_6^3, ||f||_2^2 (||f_x||_2 + ||f||_2 / 2pi), ok).

    The sixth power is integrated on a 4x padded grid, which is exact for
    band-limited f.
    """
    vals, c = _padded_values(f)
    m = vals.size
    l6 = (TWO_PI / m * float(np.sum(np.abs(vals) ** 6))) ** (1.0 / 6.0)
    l2 = math.sqrt(float(np.sum(np.abs(f.coeffs) ** 2)))
    dx = math.sqrt(float(np.sum((f.xi ** 2) * np.abs(f.coeffs) ** 2)))
    lhs = l6 ** 3
    rhs = l2 ** 2 * (dx + l2 / TWO_PI)
    return lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-10))


def random_trig_poly(rng, n_modes: int = 32, band: int | None = None) -> TorusField:
    """Random complex trigonometric polynomial with random band and amplitude scale."""
    band = int(rng.integers(0, n_modes // 2)) if band is None else band
    xi = wavenumbers(n_modes)
    sel = np.abs(xi) <= band
    c = np.zeros(n_modes, dtype=complex)
    k = int(sel.sum())
    c[sel] = (rng.normal(size=k) + 1j * rng.normal(size=k)) * rng.uniform(0.01, 3.0)
    return TorusField.from_coeffs(c)


# ---------------------------------------------------------------------------
# a-priori H^1 bound under small mass
# ---------------------------------------------------------------------------

@dataclass
class AprioriReport:
    delta: float
    energy0: float
    calibration: float
    x_max: float
    h1_bound: float
    C_delta: float
    max_h1: float
    max_quadratic: float
    energy_drift: float
    ok: bool
    times: list = field(default_factory=list)
    h1_norms: list = field(default_factory=list)
    quadratic: list = field(default_factory=list)

    def to_dict(self, series: bool = False) -> dict:
        d = asdict(self)
        if not series:
            for k in ("times", "h1_norms", "quadratic"):
                d.pop(k)
        return d


def apriori_x_max(delta: float, K: float) -> float:
    """Largest X >= 0 with (1 - 3/2 delta^2) X^2 - 3/(4 pi) delta^3 X <= K."""
    a = 1.0 - 1.5 * delta * delta
    b = 3.0 * delta ** 3 / (4.0 * math.pi)
    return (b + math.sqrt(b * b + 4.0 * a * max(K, 0.0))) / (2.0 * a)


def apriori_bound_scenario(u0: TorusField, delta: float, t_final: float,
                           cfg: SolverConfig | None = None) -> AprioriReport:
    """Evolve DNLS (lambda = 1) from ``u0`` and compare ||u(t)||_{H^1} with the
    bound that follows from energy conservation and Gagliardo-Nirenberg.

    The constant on the right of the energy inequality is calibrated as
    K = max(E(0), 0): the left side is the conserved energy itself.
    """
    if not delta < APRIORI_DELTA_LIMIT:
        raise PreconditionError(f"delta={delta} must be below sqrt(2/3)")
    l2 = sobolev_norm(u0, 0.0)
    if l2 > delta * (1.0 + 1e-12):
        raise PreconditionError(f"||u0||_L2 = {l2:.6g} exceeds delta = {delta}")
    if cfg is None:
        cfg = SolverConfig(n_modes=u0.n_modes, dt=1e-3, t_final=t_final, save_every=10)
    else:
        cfg = SolverConfig(equation="dnls", lam=1.0, n_modes=cfg.n_modes, dt=cfg.dt,
                           t_final=t_final, dealias=cfg.dealias, integrator=cfg.integrator,
                           save_every=cfg.save_every)
    traj = solve(u0, cfg)
    e0 = float(sum(energy_terms(u0)))
    K = max(e0, 0.0)
    a = 1.0 - 1.5 * delta * delta
    b = 3.0 * delta ** 3 / (4.0 * math.pi)
    x_max = apriori_x_max(delta, K)
    bound = math.sqrt(delta * delta + x_max * x_max)
    C = bound / (1.0 + sobolev_norm(u0, 1.0)) ** 3
    h1, quad, energies, scales = [], [], [], []
    for s in traj.slices:
        h1.append(sobolev_norm(s, 1.0))
        x = math.sqrt(float(np.sum(s.xi ** 2 * np.abs(s.coeffs) ** 2)))
        quad.append(a * x * x - b * x)
        terms = energy_terms(s)
        energies.append(sum(terms))
        scales.append(sum(abs(v) for v in terms))
    scale = max(abs(e0), scales[0])
    drift = max(abs(e - e0) for e in energies) / scale if scale > 0 else 0.0
    ok = max(h1) <= bound * (1.0 + 1e-12)
    return AprioriReport(delta, e0, K, x_max, bound, C, max(h1), max(quad), drift, ok,
                         traj.times.tolist(), h1, quad)


__all__ = [
    "illposed_duhamel",
    "illposed_exponent_fit",
    "ExponentFit",
    "gn_check",
    "random_trig_poly",
    "apriori_x_max",
    "apriori_bound_scenario",
    "AprioriReport",
    "APRIORI_DELTA_LIMIT",
]
