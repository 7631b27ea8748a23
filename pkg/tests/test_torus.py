from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnlslab.errors import ConfigurationError, DomainError
from dnlslab.torus import (
    SQRT_2PI,
    TWO_PI,
    TorusField,
    Trajectory,
    bessel_potential,
    derivative,
    free_propagator,
    from_spectral,
    galilean_shift,
    load_trajectory,
    lp_norm,
    save_trajectory,
    sobolev_norm,
    to_spectral,
    translate,
)

from conftest import random_field


def direct_dft(values):
    """Oracle: coeff(xi) = sqrt(2pi)/N sum_j f(x_j) exp(-i xi x_j), by explicit summation."""
    n = len(values)
    x = TWO_PI * np.arange(n) / n
    out = {}
    for xi in range(-n // 2, n // 2):
        out[xi] = SQRT_2PI / n * sum(values[j] * np.exp(-1j * xi * x[j]) for j in range(n))
    return out


class TestSpectral:
    def test_single_mode(self):
        f = TorusField.from_function(lambda x: np.exp(1j * x), 8)
        assert f.coeff(1) == pytest.approx(SQRT_2PI, abs=1e-14)
        others = [abs(f.coeff(k)) for k in range(-4, 4) if k != 1]
        assert max(others) < 1e-14

    def test_constant(self):
        f = TorusField.from_function(lambda x: np.ones_like(x), 8)
        assert f.coeff(0) == pytest.approx(SQRT_2PI)
        assert max(abs(f.coeff(k)) for k in range(-4, 4) if k) < 1e-14

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_direct_summation_and_round_trips(self, seed):
        rng = np.random.default_rng(seed)
        vals = rng.normal(size=8) + 1j * rng.normal(size=8)
        f = TorusField(vals)
        oracle = direct_dft(vals)
        for xi, c in oracle.items():
            assert abs(f.coeff(xi) - c) < 1e-12
        back = from_spectral(to_spectral(f))
        assert np.max(np.abs(back.values - vals)) < 1e-12 * np.max(np.abs(vals))

    @pytest.mark.parametrize("n", [0, 2, 6, 12, 7])
    def test_bad_grid_sizes(self, n):
        with pytest.raises(ConfigurationError):
            TorusField(np.zeros(n))

    def test_parseval(self, rng):
        f = random_field(rng, 32)
        assert sobolev_norm(f, 0) == pytest.approx(lp_norm(f, 2), rel=1e-12)

    def test_arrays_are_read_only(self, rng):
        f = random_field(rng, 8)
        with pytest.raises(ValueError):
            f.values[0] = 1.0
        with pytest.raises(ValueError):
            f.coeffs[0] = 1.0


class TestCalculus:
    def test_derivative_examples(self):
        e = TorusField.from_modes({1: 1.0}, 8)
        assert np.allclose(derivative(e).values, 1j * e.values, atol=1e-14)
        c = TorusField.from_modes({0: 3.0}, 8)
        assert np.max(np.abs(derivative(c).values)) < 1e-14
        s = TorusField.from_function(lambda x: np.sin(3 * x), 16)
        assert np.max(np.abs(derivative(s).values - 3 * np.cos(3 * s.x))) < 1e-12

    def test_derivative_drops_nyquist(self):
        f = TorusField.from_coeffs(np.eye(8)[4])
        assert np.max(np.abs(derivative(f).values)) == 0.0

    def test_bessel_examples(self, rng):
        e = TorusField.from_modes({1: 1.0}, 8)
        assert np.allclose(bessel_potential(e, 2).values, 2 * e.values)
        c = TorusField.from_modes({0: 1.5 - 2j}, 8)
        for s in (-1.3, 0.5, 4.0):
            assert np.allclose(bessel_potential(c, s).values, c.values)
        f = random_field(rng, 32)
        g = bessel_potential(bessel_potential(f, -0.5), 0.5)
        assert np.max(np.abs(g.values - f.values)) < 1e-12

    def test_multipliers_commute(self, rng):
        f = random_field(rng, 32)
        a = derivative(bessel_potential(f, 0.7))
        b = bessel_potential(derivative(f), 0.7)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_sobolev_examples(self):
        e = TorusField.from_modes({1: 1.0}, 8)
        assert sobolev_norm(e, 0) == pytest.approx(2.50663, abs=1e-5)
        assert sobolev_norm(e, 1) == pytest.approx(math.sqrt(2) * SQRT_2PI)
        g = TorusField.from_modes({0: 1.0, 2: 1.0}, 8)
        assert sobolev_norm(g, 0.5) ** 2 == pytest.approx(TWO_PI * (1 + math.sqrt(5)), rel=1e-13)

    def test_lp_examples(self):
        one = TorusField.from_modes({0: 1.0}, 8)
        assert lp_norm(one, 2) == pytest.approx(SQRT_2PI)
        for p in (1, 3, 4.5, 6):
            assert lp_norm(TorusField.from_modes({3: 1.0}, 16), p) == pytest.approx(TWO_PI ** (1 / p))
        assert lp_norm(TorusField.from_modes({3: 1.0}, 16), math.inf) == pytest.approx(1.0)
        f = TorusField.from_modes({0: 1.0, 1: 1.0}, 8)
        assert lp_norm(f, 6) ** 6 == pytest.approx(40 * math.pi, rel=1e-12)

    def test_lp_rejects_small_p(self):
        with pytest.raises(ConfigurationError):
            lp_norm(TorusField.zeros(8), 0.5)

    def test_free_propagator_examples(self, rng):
        c = TorusField.from_modes({0: 2.0}, 8)
        assert np.allclose(free_propagator(c, 1.7).values, c.values)
        e2 = TorusField.from_modes({2: 1.0}, 8)
        assert np.max(np.abs(free_propagator(e2, math.pi).values - e2.values)) < 1e-12
        f = random_field(rng, 32)
        assert sobolev_norm(free_propagator(f, 0.37), 0.5) == pytest.approx(sobolev_norm(f, 0.5), rel=1e-12)

    def test_free_propagator_unitary_and_group(self, rng):
        f = random_field(rng, 32)
        for _ in range(5):
            s, t = rng.uniform(-2, 2), rng.uniform(-5, 5)
            assert sobolev_norm(free_propagator(f, t), s) == pytest.approx(sobolev_norm(f, s), rel=1e-12)
        a = free_propagator(free_propagator(f, 0.3), 0.9)
        b = free_propagator(f, 1.2)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_translate(self):
        f = TorusField.from_modes({2: 1.0}, 16)
        g = translate(f, 0.4)
        assert np.allclose(g.values, np.exp(2j * (f.x + 0.4)))


def _traj_from(fn, n, t0, dt, k):
    x = TWO_PI * np.arange(n) / n
    return Trajectory(t0, dt, np.array([fn(t0 + j * dt, x) for j in range(k)]))


class TestTrajectory:
    def test_galilean_examples(self, rng):
        u = _traj_from(lambda t, x: np.exp(1j * x), 16, 0.0, math.pi / 4, 3)
        assert galilean_shift(u, 0.0) is u
        w = galilean_shift(u, 1.0)
        assert np.max(np.abs(w.slice(2).values + np.exp(1j * u.slice(2).x))) < 1e-12
        const = _traj_from(lambda t, x: np.full(x.shape, 2.0 + 0j), 16, 0.0, 0.1, 4)
        assert np.allclose(galilean_shift(const, 0.7).values, const.values)

    def test_galilean_inverse_and_lp(self, rng):
        vals = np.array([random_field(rng, 32, band=10).values for _ in range(4)])
        u = Trajectory(-0.2, 0.1, vals)
        back = galilean_shift(galilean_shift(u, 0.8), -0.8)
        assert np.max(np.abs(back.values - u.values)) < 1e-12
        w = galilean_shift(u, 0.8)
        for k in range(u.n_slices):
            for p in (2, 4, 6):
                assert lp_norm(w.slice(k), p) == pytest.approx(lp_norm(u.slice(k), p), rel=1e-12)

    def test_index_of(self):
        u = Trajectory(-1.0, 0.5, np.zeros((5, 8)))
        assert u.index_of(0.0) == 2
        with pytest.raises(DomainError):
            u.index_of(0.25)
        with pytest.raises(DomainError):
            u.index_of(5.0)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            Trajectory(0.0, 0.0, np.zeros((2, 8)))
        with pytest.raises(ConfigurationError):
            Trajectory.from_slices([TorusField.zeros(8), TorusField.zeros(16)], 0.0, 1.0)

    @pytest.mark.parametrize("suffix", [".json", ".npz"])
    def test_serialisation_round_trip(self, tmp_path, rng, suffix):
        vals = np.array([random_field(rng, 16).values for _ in range(3)])
        u = Trajectory(-0.5, 0.25, vals)
        path = save_trajectory(u, tmp_path / f"u{suffix}")
        v = load_trajectory(path)
        assert (v.t0, v.dt, v.n_slices, v.n_modes) == (u.t0, u.dt, u.n_slices, u.n_modes)
        assert np.array_equal(v.values, u.values)

    def test_field_record(self, rng):
        f = random_field(rng, 8).with_time(0.3)
        rec = f.to_record()
        assert rec["n_modes"] == 8 and len(rec["samples"]) == 16
        g = TorusField.from_record(rec)
        assert g.t == 0.3 and np.array_equal(g.values, f.values)
        rec["samples"] = rec["samples"][:-1]
        with pytest.raises(ConfigurationError):
            TorusField.from_record(rec)
