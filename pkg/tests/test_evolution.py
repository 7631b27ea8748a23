from __future__ import annotations

import math

import numpy as np
import pytest

import dnlslab.evolution as evo
from dnlslab.errors import BlowUpError, ConfigurationError
from dnlslab.evolution import (
    SolverConfig,
    conserved_report,
    energy,
    energy_terms,
    gauge_equivalence_check,
    nonlinearity_dnls,
    nonlinearity_gauged,
    picard_iterate,
    plane_wave,
    solve,
    sup_h_half,
)
from dnlslab.gauge import mass
from dnlslab.torus import TorusField, sobolev_norm

from conftest import random_field

# Successive Picard differences for v0 = 0.1 e^{ix}, T = 0.05 (sup_t H^{1/2}),
# from an exact degree-truncated polynomial iteration in extended precision.
PICARD_DIFFERENCES = [
    1.490450089e-4, 3.726125905e-8, 1.875483024e-11,
    2.344354477e-15, 7.079948082e-19, 5.899958786e-23,
]


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        {"equation": "kdv"}, {"dealias": "half"}, {"integrator": "euler"},
        {"dt": 0.0}, {"t_final": -1.0}, {"save_every": 0}, {"n_modes": 48},
        {"equation": "gauged", "lam": 2.0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigurationError):
            SolverConfig(**kwargs)


class TestNonlinearity:
    @pytest.mark.parametrize("dealias", ["two_thirds", "pad2x", "off"])
    @pytest.mark.parametrize("lam", [1.0, -0.5])
    def test_dnls_two_mode(self, dealias, lam):
        u = TorusField.from_modes({0: 1.0, 1: 1.0}, 16)
        x = u.x
        expected = lam * (3j * np.exp(1j * x) + 2j * np.exp(2j * x) - 1j * np.exp(-1j * x))
        assert np.max(np.abs(nonlinearity_dnls(u, lam, dealias).values - expected)) < 1e-12

    @pytest.mark.parametrize("dealias", ["two_thirds", "pad2x", "off"])
    def test_gauged_plane_wave(self, dealias):
        v = TorusField.from_modes({1: 1.0}, 16)
        out = nonlinearity_gauged(v, mass(v), dealias)
        assert np.max(np.abs(out.values + 1j * v.values)) < 1e-12

    def test_two_thirds_masks_output(self, rng):
        u = random_field(rng, 32)
        c = nonlinearity_dnls(u, 1.0).coeffs
        assert np.max(np.abs(c[np.abs(u.xi) > 32 / 3])) < 1e-12


class TestSolve:
    @pytest.mark.parametrize("integrator", ["if_rk4", "split_step"])
    def test_plane_wave(self, integrator):
        cfg = SolverConfig(n_modes=32, dt=1e-3, t_final=0.5, integrator=integrator, save_every=50)
        traj = solve(plane_wave(1.0, 1, 32), cfg)
        for t, s in zip(traj.times, traj.slices):
            assert np.max(np.abs(s.values - plane_wave(1.0, 1, 32, t).values)) < 1e-9

    def test_gauged_plane_wave_solution(self):
        cfg = SolverConfig(equation="gauged", n_modes=16, dt=1e-3, t_final=0.5, save_every=100)
        traj = solve(TorusField.from_modes({1: 1.0}, 16), cfg)
        for t, s in zip(traj.times, traj.slices):
            assert np.max(np.abs(s.values - np.exp(1j * (s.x - 2 * t)))) < 1e-10

    def test_fourth_order(self):
        u0 = plane_wave(3.0, 8, 32)
        errs = []
        dts = [0.004, 0.002, 0.001]
        for dt in dts:
            traj = solve(u0, SolverConfig(n_modes=32, dt=dt, t_final=0.1))
            errs.append(np.max(np.abs(traj.slice(-1).values - plane_wave(3.0, 8, 32, 0.1).values)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert slope == pytest.approx(4.0, abs=0.2)

    def test_linear_reversibility(self, rng):
        u0 = random_field(rng, 32, band=8)
        cfg = SolverConfig(lam=0.0, n_modes=32, dt=0.01, t_final=0.3, backward=True)
        traj = solve(u0, cfg)
        assert traj.t0 == pytest.approx(-0.3)
        k0 = traj.index_of(0.0)
        assert np.max(np.abs(traj.slice(k0).values - u0.values)) < 1e-14
        for t, s in zip(traj.times, traj.slices):
            free = TorusField.from_coeffs(u0.coeffs * np.exp(-1j * t * u0.xi ** 2))
            assert np.max(np.abs(s.values - free.values)) < 1e-12

    def test_step_divides_interval(self):
        traj = solve(plane_wave(0.5, 1, 16), SolverConfig(n_modes=16, dt=0.03, t_final=0.1))
        assert traj.t_end == pytest.approx(0.1)
        assert traj.n_slices == 5

    def test_resamples_initial_data(self):
        traj = solve(plane_wave(0.5, 1, 16), SolverConfig(n_modes=32, dt=0.01, t_final=0.05))
        assert traj.n_modes == 32

    def test_blow_up_reported(self, monkeypatch):
        monkeypatch.setattr(evo, "BLOWUP_SENTINEL", 3.0)
        cfg = SolverConfig(n_modes=16, dt=0.01, t_final=1.0)
        u0 = plane_wave(1.0, 1, 16)
        assert sup_h_half(u0.coeffs[None]) < 3.0
        with pytest.raises(BlowUpError) as info:
            solve(u0 * 1.19, cfg)
        assert info.value.last_time == 0.0
        assert info.value.trajectory.n_slices == 1

    def test_nan_triggers_blow_up(self):
        u0 = TorusField.from_coeffs(np.full(16, np.nan, dtype=complex))
        with pytest.raises(BlowUpError):
            solve(u0, SolverConfig(n_modes=16, dt=0.01, t_final=0.1))


class TestConservation:
    def test_energy_examples(self):
        e = TorusField.from_modes({1: 1.0}, 16)
        kin, mixed, sextic = energy_terms(e)
        assert kin == pytest.approx(2 * math.pi)
        assert mixed == pytest.approx(-3 * math.pi)
        assert sextic == pytest.approx(math.pi)
        assert energy(e) == pytest.approx(0.0, abs=1e-12)
        assert energy(TorusField.from_modes({0: 2.0}, 8), 0.5) == pytest.approx(0.125 * 64 * 2 * math.pi)

    @pytest.mark.parametrize("lam", [1.0, -1.0, 0.5])
    def test_random_data(self, rng, lam):
        u0 = random_field(rng, 64, band=6, decay=0.5)
        u0 = u0 * (0.8 / sobolev_norm(u0, 1.0))
        traj = solve(u0, SolverConfig(lam=lam, n_modes=64, dt=1e-3, t_final=0.5, save_every=50))
        rep = conserved_report(traj, lam)
        assert rep.drift["mass"] < 1e-12
        assert rep.drift["energy"] < 1e-9

    def test_plane_wave_uses_term_scale(self):
        traj = solve(plane_wave(1.0, 1, 16), SolverConfig(n_modes=16, dt=1e-3, t_final=0.2, save_every=50))
        rep = conserved_report(traj)
        assert rep.drift["energy"] < 1e-10

    def test_csv(self, tmp_path):
        traj = solve(plane_wave(1.0, 1, 16), SolverConfig(n_modes=16, dt=0.01, t_final=0.05))
        rep = conserved_report(traj)
        lines = rep.to_csv(tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "time,mass,energy"
        assert len(lines) == traj.n_slices + 1


class TestPicard:
    def test_matches_oracle(self):
        cfg = SolverConfig(equation="gauged", n_modes=32, dt=1e-3, t_final=0.05)
        res = picard_iterate(TorusField.from_modes({1: 0.1}, 32), 0.05, 6, cfg)
        assert len(res.differences) == 6 and not res.diverged
        for got, want in zip(res.differences, PICARD_DIFFERENCES):
            assert got == pytest.approx(want, rel=1e-6)
        assert all(r < 1 for r in res.ratios)

    def test_fixed_point_matches_solve(self):
        cfg = SolverConfig(equation="gauged", n_modes=32, dt=1e-3, t_final=0.05)
        v0 = TorusField.from_modes({1: 0.1}, 32)
        res = picard_iterate(v0, 0.05, 6, cfg)
        traj = solve(v0, cfg)
        assert sup_h_half(res.fixed_point.coeffs - traj.coeffs) < 1e-10

    def test_zero_data(self):
        cfg = SolverConfig(equation="gauged", n_modes=16, dt=0.01, t_final=0.1)
        res = picard_iterate(TorusField.zeros(16), 0.1, 4, cfg)
        assert res.differences == [0.0]

    def test_rejects_zero_iterations(self):
        with pytest.raises(ConfigurationError):
            picard_iterate(TorusField.zeros(16), 0.1, 0, SolverConfig(equation="gauged", n_modes=16))

    def test_divergence_flag(self):
        cfg = SolverConfig(equation="gauged", n_modes=32, dt=1e-3, t_final=1.0)
        v0 = random_field(np.random.default_rng(3), 32, band=6, scale=3.0)
        res = picard_iterate(v0, 1.0, 6, cfg)
        assert res.diverged


class TestGaugeEquivalence:
    def test_fourth_order_while_dt_dominates(self):
        """Above the rounding floor, halving dt cuts the error by about 16x."""
        u0 = TorusField.from_modes({0: 0.5, 1: 0.5}, 128)
        errs = [gauge_equivalence_check(u0, 0.25, SolverConfig(n_modes=128, dt=dt))
                for dt in (0.025, 0.0125, 1e-3, 5e-4)]
        assert errs[0] / errs[1] > 8
        assert errs[2] / errs[3] > 8
        assert errs[3] < 1e-5
