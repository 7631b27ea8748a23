"""Trilinear Fourier multipliers, their pointwise bounds and the resonance identity.

Notation: for a point (tau_1, tau_2, tau_3, xi_1, xi_2, xi_3) write
tau = sum tau_j, xi = sum xi_j and the four modulations

    s0 = <tau + xi^2>, s1 = <tau_1 + xi_1^2>, s2 = <tau_2 + xi_2^2>, s3 = <tau_3 - xi_3^2>.

Region A_j is where s_j is the largest of the four; ties set every tied
indicator.  Grid checks sample tau around the characteristic values
tau_j = -xi_j^2 (tau_3 = +xi_3^2) on dyadic shells plus uniform draws.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

BOUND1_CONSTANT = 16.0
BOUND2_CONSTANT = 128.0
DEFAULT_DELTA = 1.0 / 24.0
# relative slack allowed for floating-point rounding when flagging a violation
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class MultiplierPoint:
    xi1: int
    xi2: int
    xi3: int
    tau1: float
    tau2: float
    tau3: float

    @property
    def xi(self) -> int:
        return self.xi1 + self.xi2 + self.xi3

    @property
    def tau(self):
        return self.tau1 + self.tau2 + self.tau3

    def as_arrays(self) -> tuple:
        return tuple(np.array([float(v)]) for v in
                     (self.tau1, self.tau2, self.tau3, self.xi1, self.xi2, self.xi3))


def _br(a):
    return np.sqrt(1.0 + a * a)


def _modulations(t1, t2, t3, x1, x2, x3):
    x = x1 + x2 + x3
    t = t1 + t2 + t3
    return (_br(t + x * x), _br(t1 + x1 * x1), _br(t2 + x2 * x2), _br(t3 - x3 * x3))


def _indicators(sig):
    top = np.maximum(np.maximum(sig[0], sig[1]), np.maximum(sig[2], sig[3]))
    return tuple((s >= top).astype(float) for s in sig)


def multiplier_arrays(t1, t2, t3, x1, x2, x3) -> dict:
    """|M|, M0..M3 and N evaluated elementwise on arrays."""
    s0, s1, s2, s3 = sig = _modulations(t1, t2, t3, x1, x2, x3)
    x = x1 + x2 + x3
    a0, a1, a2, a3 = _indicators(sig)
    bx1, bx2, bx3 = np.sqrt(_br(x1)), np.sqrt(_br(x2)), np.sqrt(_br(x3))
    r0, r1, r2, r3 = np.sqrt(s0), np.sqrt(s1), np.sqrt(s2), np.sqrt(s3)
    m_abs = np.sqrt(_br(x)) * np.abs(x3) / (r0 * r1 * r2 * r3 * bx1 * bx2 * bx3)
    base = bx1 * bx2
    return {
        "M": m_abs,
        "M0": a0 / (base * r1 * r2 * r3),
        "M1": a1 / (base * r0 * r2 * r3),
        "M2": a2 / (base * r0 * r1 * r3),
        "M3": a3 / (base * r0 * r1 * r2),
        "N": 1.0 / (r0 * r1 * r2 * r3),
        "sigma": sig,
        "indicators": (a0, a1, a2, a3),
    }


def multiplier_tilde_arrays(t1, t2, t3, x1, x2, x3, delta: float = DEFAULT_DELTA) -> dict:
    """|M~| = |M| / s0^(1/2), M~0 with the delta-shifted weights, M~j = M_j / s0^(1/2), N~."""
    if not 0.0 < delta < 1.0 / 6.0:
        raise ConfigurationError("delta must lie in (0, 1/6)")
    base = multiplier_arrays(t1, t2, t3, x1, x2, x3)
    s0, s1, s2, s3 = base["sigma"]
    x = x1 + x2 + x3
    r0 = np.sqrt(s0)
    e = 0.5 + delta
    m0 = base["indicators"][0] / (
        _br(x) ** (0.5 - 3 * delta) * np.sqrt(_br(x1) * _br(x2)) * _br(x3) ** (0.5 - 3 * delta)
        * s1 ** e * s2 ** e * s3 ** e)
    return {
        "M": base["M"] / r0,
        "M0": m0,
        "M1": base["M1"] / r0,
        "M2": base["M2"] / r0,
        "M3": base["M3"] / r0,
        "N": base["N"] / r0,
        "sigma": base["sigma"],
        "indicators": base["indicators"],
    }


def multiplier_M(p: MultiplierPoint) -> float:
    """|M| at a single point."""
    return float(multiplier_arrays(*p.as_arrays())["M"][0])


def multiplier_parts(p: MultiplierPoint) -> tuple:
    """(M0, M1, M2, M3, N) at a single point."""
    d = multiplier_arrays(*p.as_arrays())
    return tuple(float(d[k][0]) for k in ("M0", "M1", "M2", "M3", "N"))


def multiplier_tilde(p: MultiplierPoint, delta: float = DEFAULT_DELTA) -> tuple:
    """(|M~|, (M~0, M~1, M~2, M~3, N~)) at a single point."""
    d = multiplier_tilde_arrays(*p.as_arrays(), delta=delta)
    return float(d["M"][0]), tuple(float(d[k][0]) for k in ("M0", "M1", "M2", "M3", "N"))


def resonance_check(p: MultiplierPoint) -> float:
    """|tau + xi^2 - (tau_1 + xi_1^2 + tau_2 + xi_2^2 + tau_3 - xi_3^2) - 2(xi - xi_1)(xi - xi_2)|.

    Integer and Fraction inputs are evaluated exactly; floats in double precision.
    """
    xi = p.xi
    lhs = p.tau + xi * xi - (p.tau1 + p.xi1 ** 2 + p.tau2 + p.xi2 ** 2 + p.tau3 - p.xi3 ** 2)
    res = lhs - 2 * (xi - p.xi1) * (xi - p.xi2)
    if isinstance(res, (int, Fraction)):
        return abs(res)
    return abs(float(res))


def resonance_residuals(t1, t2, t3, x1, x2, x3) -> np.ndarray:
    x = x1 + x2 + x3
    t = t1 + t2 + t3
    lhs = t + x * x - (t1 + x1 * x1 + t2 + x2 * x2 + t3 - x3 * x3)
    return np.abs(lhs - 2.0 * (x - x1) * (x - x2))


# ---------------------------------------------------------------------------
# grid verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Exhaustive xi box |xi_j| <= xi_max with dyadic plus random tau sampling."""

    xi_max: int = 16
    max_power: int = 10
    n_shell: int = 8
    n_uniform: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.xi_max < 1:
            raise ConfigurationError("xi_max must be >= 1")

    def offsets(self) -> np.ndarray:
        pw = 2.0 ** np.arange(self.max_power + 1)
        return np.concatenate([[0.0], pw, -pw])

    @property
    def samples_per_triple(self) -> int:
        return 4 * self.offsets().size + self.n_shell + self.n_uniform

    @property
    def n_points(self) -> int:
        return (2 * self.xi_max + 1) ** 3 * self.samples_per_triple


@dataclass
class BoundReport:
    points_checked: int
    max_ratio: float
    violations: list = field(default_factory=list)
    constant: float = BOUND1_CONSTANT
    delta: float | None = None

    def summary(self) -> dict:
        out = {
            "points_checked": int(self.points_checked),
            "max_ratio": float(self.max_ratio),
            "violations": len(self.violations),
        }
        if self.delta is not None:
            out["delta"] = float(self.delta)
        return out

    def write_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi1", "xi2", "xi3", "tau1", "tau2", "tau3", "lhs", "rhs", "slack"])
            for row in self.violations:
                w.writerow([repr(v) for v in row])
        return path

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.summary(), sort_keys=True, indent=2))
        return path


def _tau_samples(spec: GridSpec, x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, rng) -> tuple:
    """tau offsets sigma_j = tau_j - c_j for a block of xi triples; returns tau arrays (n_triples, K)."""
    d = spec.offsets()
    nd = d.size
    n = x1.size
    x = x1 + x2 + x3
    res = (2.0 * (x - x1) * (x - x2))[:, None]
    sig = np.zeros((n, 4 * nd + spec.n_shell, 3))
    sig[:, 0:nd, 0] = d
    sig[:, nd:2 * nd, 1] = d
    sig[:, 2 * nd:3 * nd, 2] = d
    # prescribe the output modulation tau + xi^2 = d with sigma_1 = sigma_2 = 0
    sig[:, 3 * nd:4 * nd, 2] = d[None, :] - res
    if spec.n_shell:
        mag = 2.0 ** rng.uniform(0.0, spec.max_power, size=(n, spec.n_shell, 3))
        signs = rng.choice([-1.0, 1.0], size=(n, spec.n_shell, 3))
        sig[:, 4 * nd:, :] = mag * signs
    c = np.stack([-(x1 * x1), -(x2 * x2), x3 * x3], axis=1)[:, None, :]
    taus = sig + c
    if spec.n_uniform:
        lim = 4.0 * spec.xi_max ** 2
        uni = rng.uniform(-lim, lim, size=(n, spec.n_uniform, 3))
        taus = np.concatenate([taus, uni], axis=1)
    return taus[..., 0], taus[..., 1], taus[..., 2]


def _check_block(args) -> tuple:
    spec, x1_value, which, delta = args
    rng = np.random.default_rng([spec.seed, int(x1_value) + spec.xi_max])
    r = np.arange(-spec.xi_max, spec.xi_max + 1, dtype=float)
    x2, x3 = np.meshgrid(r, r, indexing="ij")
    x2, x3 = x2.ravel(), x3.ravel()
    x1 = np.full_like(x2, float(x1_value))
    t1, t2, t3 = _tau_samples(spec, x1, x2, x3, rng)
    X1, X2, X3 = (np.broadcast_to(a[:, None], t1.shape) for a in (x1, x2, x3))
    if which == 1:
        d = multiplier_arrays(t1, t2, t3, X1, X2, X3)
        const = BOUND1_CONSTANT
    else:
        d = multiplier_tilde_arrays(t1, t2, t3, X1, X2, X3, delta)
        const = BOUND2_CONSTANT
    rhs = const * (d["M0"] + d["M1"] + d["M2"] + d["M3"] + d["N"])
    lhs = d["M"]
    ratio = lhs / rhs
    bad = lhs > rhs * (1.0 + ROUNDING_SLACK)
    rows = []
    for idx in zip(*np.nonzero(bad)):
        rows.append((int(X1[idx]), int(X2[idx]), int(X3[idx]), float(t1[idx]),
                     float(t2[idx]), float(t3[idx]), float(lhs[idx]), float(rhs[idx]),
                     float(rhs[idx] - lhs[idx])))
    return int(lhs.size), float(ratio.max()), rows


def _run_grid(spec: GridSpec, which: int, delta, jobs: int) -> BoundReport:
    tasks = [(spec, v, which, delta) for v in range(-spec.xi_max, spec.xi_max + 1)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_block, tasks))
    else:
        results = [_check_block(t) for t in tasks]
    points = sum(r[0] for r in results)
    max_ratio = max(r[1] for r in results)
    rows = sorted(row for r in results for row in r[2])
    const = BOUND1_CONSTANT if which == 1 else BOUND2_CONSTANT
    return BoundReport(points, max_ratio, rows, const, None if which == 1 else delta)


def check_bound_1(spec: GridSpec | None = None, jobs: int = 1) -> BoundReport:
    """Check |M| <= 16 (M0 + M1 + M2 + M3 + N) on every sampled grid point."""
    return _run_grid(spec or GridSpec(), 1, None, jobs)


def check_bound_2(spec: GridSpec | None = None, delta: float = DEFAULT_DELTA,
                  jobs: int = 1) -> BoundReport:
    """Check |M~| <= 128 (M~0 + M~1 + M~2 + M~3 + N~) on every sampled grid point."""
    if not 0.0 < delta < 1.0 / 6.0:
        raise ConfigurationError("delta must lie in (0, 1/6)")
    return _run_grid(spec or GridSpec(), 2, delta, jobs)


def bound_ratio_at(p: MultiplierPoint, which: int = 1, delta: float = DEFAULT_DELTA) -> float:
    """lhs / rhs of the chosen bound at a single point (constant included)."""
    if which == 1:
        d = multiplier_arrays(*p.as_arrays())
        const = BOUND1_CONSTANT
    else:
        d = multiplier_tilde_arrays(*p.as_arrays(), delta=delta)
        const = BOUND2_CONSTANT
    rhs = const * (d["M0"] + d["M1"] + d["M2"] + d["M3"] + d["N"])
    return float(d["M"][0] / rhs[0])


__all__ = [
    "MultiplierPoint",
    "GridSpec",
    "BoundReport",
    "multiplier_arrays",
    "multiplier_tilde_arrays",
    "multiplier_M",
    "multiplier_parts",
    "multiplier_tilde",
    "resonance_check",
    "resonance_residuals",
    "check_bound_1",
    "check_bound_2",
    "bound_ratio_at",
]
