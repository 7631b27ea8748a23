"""Command line experiment runner.

Every subcommand prints a JSON summary on stdout and, with ``--out DIR``,
writes results.json plus CSV tables into DIR.  Exit codes: 0 when the
scenario's checks pass, 1 when a check fails, 2 for usage, configuration or
precondition errors (reported as JSON on stderr).

Values come from three layers, later ones winning: built-in defaults, the
``--config`` JSON file (flat keys, optionally overridden by a block named
after the subcommand), and explicit command line flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import BlowUpError, DNLSLabError
from .torus import TorusField, save_trajectory, sobolev_norm, wavenumbers

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def parse_number(text) -> float:
    """Accept plain floats and fractions such as ``1/24``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def parse_int_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"not a comma separated integer list: {text!r}") from exc


def random_initial(seed: int, n_modes: int, h1: float = 1.0, band: int = 4) -> TorusField:
    """Random smooth datum with exponentially decaying modes and ||u0||_{H^1} = h1."""
    rng = np.random.default_rng(seed)
    xi = wavenumbers(n_modes)
    sel = np.abs(xi) <= band
    c = np.zeros(n_modes, dtype=complex)
    m = int(sel.sum())
    c[sel] = (rng.normal(size=m) + 1j * rng.normal(size=m)) * np.exp(-np.abs(xi[sel]))
    f = TorusField.from_coeffs(c)
    return f * (h1 / sobolev_norm(f, 1.0))


def parse_init(spec: str, n_modes: int) -> tuple:
    """Initial datum from ``planewave:A,k``, ``twomode:a``, ``random:seed[,h1]`` or ``zero``.

    Returns (field, description dict).
    """
    kind, _, arg = str(spec).partition(":")
    parts = [p for p in arg.split(",") if p.strip()]
    try:
        if kind == "planewave":
            amp = parse_number(parts[0]) if parts else 1.0
            k = int(parts[1]) if len(parts) > 1 else 1
            return TorusField.from_modes({k: amp}, n_modes), {"kind": kind, "A": amp, "k": k}
        if kind == "twomode":
            a = parse_number(parts[0]) if parts else 0.5
            return TorusField.from_modes({0: a, 1: a}, n_modes), {"kind": kind, "a": a}
        if kind == "random":
            seed = int(parts[0]) if parts else 0
            h1 = parse_number(parts[1]) if len(parts) > 1 else 1.0
            return random_initial(seed, n_modes, h1), {"kind": kind, "seed": seed, "h1": h1}
        if kind == "zero":
            return TorusField.zeros(n_modes), {"kind": kind}
    except (IndexError, ValueError) as exc:
        raise UsageError(f"malformed --init {spec!r}") from exc
    raise UsageError(f"unknown --init kind {kind!r}")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serialisable: {type(o)}")


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------------------
# parameter resolution
# ---------------------------------------------------------------------------

DEFAULTS = {
    "solve": {"equation": "dnls", "lam": 1.0, "n_modes": 64, "dt": 1e-4, "t": 1.0,
              "dealias": "two_thirds", "integrator": "if_rk4", "init": "planewave:1,1",
              "save_every": 100, "backward": False, "tol": 1e-8},
    "gauge-check": {"n_modes": 128, "dt": 1e-4, "t": 0.25, "init": "twomode:0.5",
                    "dealias": "two_thirds", "tol": 1e-5},
    "conserve": {"n_modes": 64, "dt": 1e-4, "t": 1.0, "samples": 5, "seed": 0,
                 "dealias": "two_thirds", "mass_tol": 1e-10, "energy_tol": 1e-6},
    "multiplier-verify": {"xi_max": 16, "delta": "1/24", "seed": 0, "jobs": 1},
    "trilinear-sample": {"samples": 6, "seed": 0, "n_modes": 32, "pad_factor": 8, "jobs": 1},
    "strichartz-sample": {"samples": 6, "seed": 0, "n_modes": 32, "pad_factor": 8, "jobs": 1},
    "linear-sample": {"samples": 6, "seed": 0, "n_modes": 32, "pad_factor": 8, "jobs": 1},
    "illposed": {"s": 0.3, "n": "8,16,32,64", "t": 0.5, "tol": 0.05},
    "picard": {"init": "planewave:0.1,1", "t": 0.05, "iters": 6, "n_modes": 64, "dt": 1e-4,
               "dealias": "two_thirds", "tol": 1e-6},
    "gn": {"samples": 10000, "seed": 0, "n_modes": 32},
    "apriori": {"init": "planewave:0.1,1", "delta": 0.5, "t": 5.0, "n_modes": 64, "dt": 1e-3},
}

PROBE_GROUPS = {
    "trilinear-sample": ("trilinear_x", "trilinear_y", "quintic", "cubic_poly", "gen_trilinear"),
    "strichartz-sample": ("sobolev", "strichartz", "x_in_y"),
    "linear-sample": ("cutoff_y", "cutoff_x", "linear_homogeneous", "linear_inhomogeneous"),
}


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def resolve(command: str, args: argparse.Namespace) -> dict:
    params = dict(DEFAULTS[command])
    cfg = _load_config(args.config)
    block = cfg.get(command, {})
    if not isinstance(block, dict):
        raise UsageError(f"config block {command!r} must be an object")
    for source in ({k: v for k, v in cfg.items() if not isinstance(v, dict)}, block):
        for k, v in source.items():
            key = k.replace("-", "_")
            if key == "lambda":
                key = "lam"
            if key in params or key in ("out",):
                params[key] = v
    for k in params:
        v = getattr(args, k, None)
        if v is not None:
            params[k] = v
    if getattr(args, "out", None) is not None:
        params["out"] = args.out
    return params


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _solver_cfg(p: dict, equation: str = "dnls", **over):
    from .evolution import SolverConfig
    kw = dict(equation=equation, lam=float(p.get("lam", 1.0)), n_modes=int(p["n_modes"]),
              dt=parse_number(p["dt"]), t_final=parse_number(p["t"]), dealias=p.get("dealias", "two_thirds"),
              integrator=p.get("integrator", "if_rk4"),
              save_every=int(p.get("save_every", 1)), backward=bool(p.get("backward", False)))
    kw.update(over)
    return SolverConfig(**kw)


def cmd_solve(p: dict, out: Path | None) -> tuple:
    from .evolution import conserved_report, plane_wave, solve
    cfg = _solver_cfg(p, equation=p["equation"])
    u0, desc = parse_init(p["init"], cfg.n_modes)
    traj = solve(u0, cfg)
    rep = conserved_report(traj, cfg.lam)
    res = {"init": desc, "equation": cfg.equation, "lambda": cfg.lam, "n_modes": cfg.n_modes,
           "dt": cfg.dt, "t_final": cfg.t_final, "n_slices": traj.n_slices,
           "drift": rep.drift}
    passed = True
    if desc["kind"] == "planewave" and cfg.equation == "dnls":
        err = max(float(np.max(np.abs(s.values - plane_wave(desc["A"], desc["k"], cfg.n_modes,
                                                            s.t, cfg.lam).values)))
                  for s in traj.slices)
        res["planewave_error"] = err
        res["tol"] = float(p["tol"])
        passed = err < float(p["tol"])
    if out:
        save_trajectory(traj, out / "trajectory.npz")
        rep.to_csv(out / "conserved.csv")
    return res, passed


def cmd_gauge_check(p: dict, out) -> tuple:
    from .evolution import gauge_equivalence_check
    cfg = _solver_cfg(p, save_every=1)
    u0, desc = parse_init(p["init"], cfg.n_modes)
    err = gauge_equivalence_check(u0, cfg.t_final, cfg)
    return {"init": desc, "error": err, "tol": float(p["tol"]), "n_modes": cfg.n_modes,
            "dt": cfg.dt, "T": cfg.t_final}, err < float(p["tol"])


def cmd_conserve(p: dict, out) -> tuple:
    from .evolution import conserved_report, solve
    cfg = _solver_cfg(p, save_every=100)
    rows = []
    for k in range(int(p["samples"])):
        u0 = random_initial(int(p["seed"]) * 1000 + k, cfg.n_modes)
        rep = conserved_report(solve(u0, cfg))
        rows.append({"sample": k, "mass_drift": rep.drift["mass"],
                     "energy_drift": rep.drift["energy"]})
    mass = max(r["mass_drift"] for r in rows)
    en = max(r["energy_drift"] for r in rows)
    if out:
        with open(out / "drift.csv", "w") as fh:
            fh.write("sample,mass_drift,energy_drift\n")
            for r in rows:
                fh.write(f"{r['sample']},{r['mass_drift']!r},{r['energy_drift']!r}\n")
    passed = mass < float(p["mass_tol"]) and en < float(p["energy_tol"])
    return {"samples": rows, "max_mass_drift": mass, "max_energy_drift": en}, passed


def cmd_multiplier_verify(p: dict, out) -> tuple:
    from .multipliers import GridSpec, check_bound_1, check_bound_2
    spec = GridSpec(xi_max=int(p["xi_max"]), seed=int(p["seed"]))
    delta = parse_number(p["delta"])
    jobs = int(p["jobs"])
    r1 = check_bound_1(spec, jobs=jobs)
    r2 = check_bound_2(spec, delta=delta, jobs=jobs)
    res = {
        "points_checked": r1.points_checked + r2.points_checked,
        "violations": len(r1.violations) + len(r2.violations),
        "max_ratio": max(r1.max_ratio, r2.max_ratio),
        "bound1": r1.summary(),
        "bound2": r2.summary(),
    }
    if out:
        r1.write_csv(out / "violations_bound1.csv")
        r2.write_csv(out / "violations_bound2.csv")
    return res, res["violations"] == 0


def _probe_task(args):
    from .probes import refinement_study
    name, setup = args
    return refinement_study(name, setup)


def cmd_probes(command: str, p: dict, out) -> tuple:
    from .probes import ProbeSetup
    setup = ProbeSetup(n_modes=int(p["n_modes"]), pad_factor=int(p["pad_factor"]),
                       n_samples=int(p["samples"]), seed=int(p["seed"]))
    tasks = [(name, setup) for name in PROBE_GROUPS[command]]
    jobs = int(p["jobs"])
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_probe_task, tasks))
    else:
        rows = [_probe_task(t) for t in tasks]
    if out:
        with open(out / "probes.csv", "w") as fh:
            fh.write("probe,base_sup_ratio,refined_sup_ratio,change,anomalies\n")
            for r in rows:
                fh.write(f"{r['probe']},{r['base']!r},{r['refined']!r},{r['change']!r},{r['anomalies']}\n")
    passed = all(r["change"] < 2.0 and r["anomalies"] == 0 for r in rows)
    return {"probes": [{k: _finite(v) if isinstance(v, float) else v for k, v in r.items()}
                       for r in rows]}, passed


def cmd_illposed(p: dict, out) -> tuple:
    from .analysis import illposed_duhamel, illposed_exponent_fit
    s, t = parse_number(p["s"]), parse_number(p["t"])
    ns = parse_int_list(p["n"])
    fit = illposed_exponent_fit(s, t, ns)
    agree = max(float(np.max(np.abs(c.values - q.values)))
                for c, q, _ in (illposed_duhamel(n, s, t) for n in ns))
    tol = float(p["tol"])
    passed = abs(fit.slope - fit.expected) <= tol and agree < 1e-10
    if out:
        fit.write_csv(out / "fit.csv")
    return {"s": s, "t": t, "n": ns, "slope": fit.slope, "expected": fit.expected,
            "closed_vs_quadrature": agree}, passed


def cmd_picard(p: dict, out) -> tuple:
    from .evolution import sup_h_half, picard_iterate, solve
    cfg = _solver_cfg(p, equation="gauged", lam=1.0, save_every=1)
    v0, desc = parse_init(p["init"], cfg.n_modes)
    res = picard_iterate(v0, cfg.t_final, int(p["iters"]), cfg)
    ref = solve(v0, cfg)
    agree = sup_h_half(ref.coeffs - res.fixed_point.coeffs)
    ratios = res.ratios
    non_increasing = all(b <= a for a, b in zip(ratios, ratios[1:]))
    passed = all(r < 1.0 for r in ratios) and not res.diverged and agree < float(p["tol"])
    if out:
        with open(out / "picard.csv", "w") as fh:
            fh.write("m,difference,ratio\n")
            for m, d in enumerate(res.differences):
                r = repr(ratios[m - 1]) if m > 0 else ""
                fh.write(f"{m},{d!r},{r}\n")
    return {"init": desc, "T": cfg.t_final, "differences": res.differences, "ratios": ratios,
            "non_increasing": non_increasing, "diverged": res.diverged,
            "fixed_point_vs_solve": agree}, passed


def cmd_gn(p: dict, out) -> tuple:
    from .analysis import gn_check, random_trig_poly
    rng = np.random.default_rng(int(p["seed"]))
    n = int(p["n_modes"])
    violations, worst = 0, 0.0
    for _ in range(int(p["samples"])):
        lhs, rhs, ok = gn_check(random_trig_poly(rng, n))
        violations += int(not ok)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    const_err = 0.0
    for c in (0.3, 1.0, 2.5):
        lhs, rhs, _ = gn_check(TorusField.from_modes({0: c}, n))
        const_err = max(const_err, abs(lhs - rhs) / rhs)
    passed = violations == 0 and const_err < 1e-12
    return {"samples": int(p["samples"]), "violations": violations, "max_ratio": worst,
            "constant_equality_error": const_err}, passed


def cmd_apriori(p: dict, out) -> tuple:
    from .analysis import apriori_bound_scenario
    from .evolution import SolverConfig
    n = int(p["n_modes"])
    u0, desc = parse_init(p["init"], n)
    t = parse_number(p["t"])
    cfg = SolverConfig(n_modes=n, dt=parse_number(p["dt"]), t_final=t, save_every=10)
    rep = apriori_bound_scenario(u0, parse_number(p["delta"]), t, cfg)
    if out:
        with open(out / "apriori.csv", "w") as fh:
            fh.write("time,h1_norm,quadratic_lhs\n")
            for row in zip(rep.times, rep.h1_norms, rep.quadratic):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    d = rep.to_dict()
    d["init"] = desc
    return d, rep.ok


COMMANDS = {
    "solve": (cmd_solve, "evolve either equation and report conserved quantities"),
    "gauge-check": (cmd_gauge_check, "gauge equivalence error between the two equations"),
    "conserve": (cmd_conserve, "mass/energy drift table over random data"),
    "multiplier-verify": (cmd_multiplier_verify, "check both multiplier bounds on a grid"),
    "trilinear-sample": (None, "trilinear and polynomial ratio probes"),
    "strichartz-sample": (None, "embedding and Strichartz ratio probes"),
    "linear-sample": (None, "cutoff and linear estimate ratio probes"),
    "illposed": (cmd_illposed, "closed form and growth exponent fit"),
    "picard": (cmd_picard, "Picard contraction ratios for the gauged equation"),
    "gn": (cmd_gn, "Gagliardo-Nirenberg sweep"),
    "apriori": (cmd_apriori, "small-mass a-priori H^1 bound scenario"),
}

_FLAGS = {
    "equation": dict(choices=["dnls", "gauged"], help="equation to evolve"),
    "lam": dict(flags=["--lambda"], type=float, help="coupling lambda"),
    "n_modes": dict(type=int, help="grid size N (power of two)"),
    "dt": dict(type=float, help="time step"),
    "t": dict(type=str, help="final time / window T"),
    "dealias": dict(choices=["two_thirds", "pad2x", "off"], help="dealiasing mode"),
    "integrator": dict(choices=["if_rk4", "split_step"], help="time stepper"),
    "init": dict(type=str, help="planewave:A,k | twomode:a | random:seed[,h1] | zero"),
    "save_every": dict(type=int, help="store every k-th step"),
    "backward": dict(action="store_const", const=True, help="also integrate backwards in time"),
    "tol": dict(type=float, help="pass/fail tolerance"),
    "samples": dict(type=int, help="number of random samples"),
    "seed": dict(type=int, help="random seed"),
    "mass_tol": dict(type=float, help="mass drift tolerance"),
    "energy_tol": dict(type=float, help="energy drift tolerance"),
    "xi_max": dict(type=int, help="frequency box |xi_j| <= xi_max"),
    "delta": dict(type=str, help="delta parameter (fractions like 1/24 allowed)"),
    "jobs": dict(type=int, help="worker processes"),
    "pad_factor": dict(type=int, help="time zero-padding factor (>= 4)"),
    "s": dict(type=str, help="Sobolev index s"),
    "n": dict(type=str, help="comma separated frequencies"),
    "iters": dict(type=int, help="number of Picard iterations"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnlslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="JSON config file (flags override it)")
        sp.add_argument("--out", help="directory for results.json and CSV tables")
        for key in DEFAULTS[name]:
            opts = dict(_FLAGS[key])
            flags = opts.pop("flags", ["--" + key.replace("_", "-")])
            default = DEFAULTS[name][key]
            opts["help"] = f"{opts.get('help', '')} (default: {default})"
            sp.add_argument(*flags, dest=key, default=None, **opts)
    return parser


def _error(kind: str, message: str) -> int:
    sys.stderr.write(_dump({"error": kind, "message": message}) + "\n")
    return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required; see --help")
        p = resolve(args.command, args)
        out = None
        if p.get("out"):
            out = Path(p["out"])
            out.mkdir(parents=True, exist_ok=True)
        func = COMMANDS[args.command][0]
        if func is None:
            result, passed = cmd_probes(args.command, p, out)
        else:
            result, passed = func(p, out)
    except UsageError as exc:
        return _error("usage", str(exc))
    except BlowUpError as exc:
        sys.stderr.write(_dump({"error": "blow_up", "message": str(exc),
                                "last_time": exc.last_time}) + "\n")
        return EXIT_FAIL
    except DNLSLabError as exc:
        return _error(type(exc).__name__, str(exc))
    except (TypeError, ValueError) as exc:
        return _error("configuration", str(exc))
    result = {"command": args.command, "passed": bool(passed), "result": result}
    text = _dump(result)
    if out:
        (out / "results.json").write_text(text + "\n")
    sys.stdout.write(text + "\n")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
