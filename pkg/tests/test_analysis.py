from __future__ import annotations

import math

import numpy as np
import pytest

from dnlslab.analysis import (
    APRIORI_DELTA_LIMIT,
    apriori_bound_scenario,
    apriori_x_max,
    gn_check,
    illposed_duhamel,
    illposed_exponent_fit,
    random_trig_poly,
)
from dnlslab.errors import ConfigurationError, PreconditionError, ResolutionError
from dnlslab.evolution import SolverConfig
from dnlslab.torus import SQRT_2PI, TWO_PI, TorusField, sobolev_norm


class TestIllposed:
    @pytest.mark.parametrize("n,s,t", [(4, 0.5, 0.5), (8, 0.3, 0.2), (16, 0.0, 1.0), (3, 0.4, -0.3)])
    def test_closed_form_matches_quadrature(self, n, s, t):
        closed, numeric, hs = illposed_duhamel(n, s, t)
        assert np.max(np.abs(closed.values - numeric.values)) < 1e-10
        assert sobolev_norm(closed, s) == pytest.approx(hs, rel=1e-12)

    def test_norm_value(self):
        # |t| n^{1-3s} <n>^s sqrt(2 pi) at n = 4, s = 1/2, t = 1/2
        _, _, hs = illposed_duhamel(4, 0.5, 0.5)
        assert hs == pytest.approx(0.5 * 4 ** -0.5 * 17 ** 0.25 * SQRT_2PI, rel=1e-14)
        assert hs == pytest.approx(1.272454240, abs=1e-9)

    def test_zero_time(self):
        closed, numeric, hs = illposed_duhamel(4, 0.3, 0.0)
        assert hs == 0.0 and np.max(np.abs(numeric.values)) == 0.0

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            illposed_duhamel(8, 0.5, 0.1, n_modes=16)
        with pytest.raises(ConfigurationError):
            illposed_duhamel(4, 0.5, 0.1, n_nodes=64)

    @pytest.mark.parametrize("s", [0.0, 0.3, 0.4, 0.5])
    def test_exponent_fit(self, s, tmp_path):
        fit = illposed_exponent_fit(s, 0.5, [4, 8, 16, 32, 64])
        assert fit.slope == pytest.approx(1 - 2 * s, abs=1e-6)
        assert fit.expected == pytest.approx(1 - 2 * s)
        lines = fit.write_csv(tmp_path / "fit.csv").read_text().splitlines()
        assert lines[0] == "n,norm,corrected_norm,loglog_residual" and len(lines) == 6

    def test_fit_needs_three_points(self):
        with pytest.raises(ConfigurationError):
            illposed_exponent_fit(0.3, 0.5, [4, 8])


class TestGagliardoNirenberg:
    def test_single_mode(self):
        lhs, rhs, ok = gn_check(TorusField.from_modes({1: 1.0}, 16))
        assert lhs == pytest.approx(SQRT_2PI, rel=1e-13)
        assert rhs == pytest.approx(TWO_PI * SQRT_2PI + SQRT_2PI, rel=1e-13)
        assert rhs == pytest.approx(18.256238220353, abs=1e-11)
        assert ok

    @pytest.mark.parametrize("c", [1.0, 0.3, 2.5 - 1j])
    def test_equality_at_constants(self, c):
        lhs, rhs, ok = gn_check(TorusField.from_modes({0: c}, 8))
        assert abs(lhs - rhs) <= 1e-12 * rhs and ok

    def test_zero(self):
        assert gn_check(TorusField.zeros(8)) == (0.0, 0.0, True)

    def test_random_polynomials(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for _ in range(500):
            lhs, rhs, ok = gn_check(random_trig_poly(rng, 32))
            assert ok
            worst = max(worst, lhs / rhs)
        assert worst <= 1.0 + 1e-12

    def test_random_band(self):
        rng = np.random.default_rng(5)
        f = random_trig_poly(rng, 32, band=3)
        assert np.max(np.abs(f.coeffs[np.abs(f.xi) > 3])) < 1e-13


class TestApriori:
    def test_x_max_solves_quadratic(self):
        for delta, K in ((0.5, 0.2), (0.1, 1.0), (0.8, 0.0)):
            x = apriori_x_max(delta, K)
            a, b = 1 - 1.5 * delta ** 2, 3 * delta ** 3 / (4 * math.pi)
            assert a * x * x - b * x == pytest.approx(K, abs=1e-14)
        assert apriori_x_max(0.5, -1.0) == apriori_x_max(0.5, 0.0)

    def test_preconditions(self):
        u0 = TorusField.from_modes({1: 0.1}, 16)
        with pytest.raises(PreconditionError):
            apriori_bound_scenario(u0, APRIORI_DELTA_LIMIT, 0.1)
        with pytest.raises(PreconditionError):
            apriori_bound_scenario(TorusField.from_modes({1: 1.0}, 16), 0.5, 0.1)

    def test_short_scenario(self):
        u0 = TorusField.from_modes({1: 0.1}, 16)
        cfg = SolverConfig(n_modes=16, dt=1e-3, save_every=10)
        rep = apriori_bound_scenario(u0, 0.5, 0.5, cfg)
        assert rep.ok and rep.max_h1 <= rep.h1_bound
        assert rep.energy0 == pytest.approx(0.0618925, abs=1e-7)
        assert rep.energy_drift < 1e-10
        d = rep.to_dict()
        assert "times" not in d and d["ok"] is True
        assert len(rep.to_dict(series=True)["times"]) == len(rep.h1_norms)
