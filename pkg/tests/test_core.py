"""Tests for the sensitivity statistic, its components, and the test logic."""

import json

import numpy as np
import pytest
from mpmath import mp, mpf

from smaup import (
    DEFAULT_PARAMS,
    InvalidAlphaError,
    InvalidKError,
    SarSpec,
    SmaupParams,
    build_lattice_rook,
    estimate_rho,
    eta_of_theta,
    generate_sar,
    l_of_theta,
    m_statistic,
    min_safe_k,
    scan_k,
    smaup_test,
    tau_of_theta,
)

mp.dps = 50


def oracle_m(rho, theta, params=DEFAULT_PARAMS):
    """Independent extended-precision evaluation of the statistic."""
    b = mpf(repr(params.logistic_intercept))
    m = mpf(repr(params.logistic_slope))
    p = mpf(repr(params.power_scale))
    a = mpf(repr(params.power_exponent))
    b0 = mpf(repr(params.tau_intercept))
    b1 = mpf(repr(params.tau_slope))
    rho = mpf(repr(float(rho)))
    theta = mpf(repr(float(theta)))
    big_l = 1 / (1 + mp.e ** (b + m * theta))
    eta = p * theta ** a
    tau = b0 + b1 * theta
    return big_l / (1 + eta * mp.e ** (tau * rho))


class TestComponents:
    def test_ceiling_limit_at_zero(self):
        assert l_of_theta(1e-15) == pytest.approx(0.899166719284, abs=1e-10)

    def test_ceiling_at_0p4(self):
        assert l_of_theta(0.4) == pytest.approx(0.348781402728, abs=1e-10)

    def test_ceiling_strictly_decreasing(self):
        grid = np.linspace(0.01, 1.0, 100)
        values = l_of_theta(grid)
        assert np.all(np.diff(values) < 0)

    def test_onset_at_one(self):
        assert eta_of_theta(1.0) == pytest.approx(0.516, abs=1e-15)

    def test_onset_at_half(self):
        assert eta_of_theta(0.5) == pytest.approx(0.21145798877, abs=1e-10)

    def test_onset_strictly_increasing(self):
        grid = np.linspace(0.01, 1.0, 100)
        assert np.all(np.diff(eta_of_theta(grid)) > 0)

    def test_speed_limit_at_zero(self):
        assert tau_of_theta(0.0) == pytest.approx(5.319)

    def test_speed_at_half(self):
        assert tau_of_theta(0.5) == pytest.approx(2.553)

    def test_speed_zero_crossing(self):
        crossing = 5.319 / 5.532
        assert crossing == pytest.approx(0.961496746204, abs=1e-10)
        assert tau_of_theta(crossing) == pytest.approx(0.0, abs=1e-12)
        assert tau_of_theta(crossing - 0.01) > 0 > tau_of_theta(crossing + 0.01)


class TestStatistic:
    def test_value_at_origin_half(self):
        assert m_statistic(0.0, 0.5) == pytest.approx(0.172992540517, abs=1e-12)

    def test_values_at_strong_autocorrelation(self):
        assert m_statistic(0.9, 0.5) == pytest.approx(0.067511153007, abs=1e-12)
        assert m_statistic(-0.9, 0.5) == pytest.approx(0.2052125615, abs=1e-10)
        assert m_statistic(0.9, 0.5) < m_statistic(0.0, 0.5) < m_statistic(-0.9, 0.5)

    def test_oracle_agreement_on_grid(self):
        for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
            for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
                expected = float(oracle_m(rho, theta))
                assert m_statistic(rho, theta) == pytest.approx(expected, abs=1e-12)

    def test_bounded_by_ceiling(self):
        rhos = np.linspace(-0.99, 0.99, 41)
        thetas = np.linspace(0.01, 1.0, 50)
        for theta in thetas:
            ceiling = l_of_theta(theta)
            values = m_statistic(rhos, theta)
            assert np.all(values > 0.0)
            assert np.all(values < ceiling)
            assert ceiling < 1.0

    def test_rho_slope_sign_matches_negative_tau(self):
        step = 1e-6
        for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
            for theta in (0.1, 0.3, 0.5, 0.7, 0.9, 0.97, 0.99):
                derivative = (m_statistic(rho + step, theta) - m_statistic(rho - step, theta)) / (2 * step)
                assert np.sign(derivative) == -np.sign(tau_of_theta(theta))

    def test_strictly_decreasing_in_theta(self):
        grid = np.linspace(0.01, 0.99, 99)
        for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
            values = m_statistic(rho, grid)
            assert np.all(np.diff(values) < 0)

    def test_custom_params_flow_through(self):
        params = SmaupParams(logistic_slope=7.301)
        expected = float(oracle_m(0.0, 0.5, params))
        assert m_statistic(0.0, 0.5, params) == pytest.approx(expected, abs=1e-12)
        assert m_statistic(0.0, 0.5, params) != m_statistic(0.0, 0.5)


@pytest.fixture(scope="module")
def w30():
    return build_lattice_rook(30, 30)


@pytest.fixture(scope="module")
def flat_field(w30):
    return generate_sar(w30, SarSpec(rho=0.0, seed=101))


class TestSmaupTest:
    def test_no_aggregation_never_rejects(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=900)
        assert result.theta == 1.0
        assert result.m_value == pytest.approx(float(oracle_m(result.rho_used, 1.0)), abs=1e-12)
        assert result.m_value < 0.02  # below every tabulated critical value
        assert not any(result.decision.values())

    def test_heavy_aggregation_rejects_hard(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=90)
        assert result.m_value > 0.7  # near the theta=0.1 ceiling of ~0.815
        assert result.decision[0.01]

    def test_decision_matches_critical_comparison(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=300)
        for alpha, crit in result.critical_values.items():
            assert result.decision[alpha] == (result.m_value > crit)

    def test_pseudo_p_from_null_vector(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=900, null=[0.1, 0.2, 0.3, 0.4])
        assert result.pseudo_p is not None
        # theta=1 gives M ~ 0.005, below the entire null vector
        assert result.pseudo_p == 1.0
        result2 = smaup_test(flat_field, w30, k=900, null=[0.001, 0.002, 0.003, 0.004])
        assert result2.pseudo_p == 0.0

    def test_pseudo_p_worked_example(self):
        from smaup.stats import pseudo_p
        assert pseudo_p([0.1, 0.2, 0.3, 0.4], 0.25) == 0.5

    def test_rho_override(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=450, rho=0.25)
        assert result.rho_used == 0.25
        assert result.m_value == pytest.approx(float(oracle_m(0.25, 0.5)), abs=1e-12)

    def test_k_validation(self, w30, flat_field):
        with pytest.raises(InvalidKError):
            smaup_test(flat_field, w30, k=0)
        with pytest.raises(InvalidKError):
            smaup_test(flat_field, w30, k=901)

    def test_alpha_validation(self, w30, flat_field):
        with pytest.raises(InvalidAlphaError):
            smaup_test(flat_field, w30, k=10, alpha=0.2)

    def test_json_round_trippable(self, w30, flat_field):
        result = smaup_test(flat_field, w30, k=450, null=[0.1, 0.2])
        doc = json.loads(result.to_json())
        assert doc["n"] == 900
        assert doc["k"] == 450
        assert doc["m_value"] == result.m_value
        assert set(doc["critical_values"]) == {"0.01", "0.05", "0.1"}
        assert doc["params"]["logistic_slope"] == 7.031

    def test_significance_stars(self, w30, flat_field):
        assert smaup_test(flat_field, w30, k=90).significance_stars() == "***"
        assert smaup_test(flat_field, w30, k=900).significance_stars() == ""


class TestMinSafeK:
    def exhaustive_oracle(self, y, w, alpha, k_min, k_max, rho):
        """Brute force: smallest k whose whole upper tail is non-rejecting."""
        rejecting = {
            k: smaup_test(y, w, k, alpha=alpha, rho=rho).decision[alpha]
            for k in range(k_min, k_max + 1)
        }
        best = None
        for k in range(k_max, k_min - 1, -1):
            if rejecting[k]:
                break
            best = k
        return best

    def test_never_rejecting_variable_returns_k_min(self, w30, flat_field):
        # restrict the scan high enough that theta stays near 1
        assert min_safe_k(flat_field, w30, alpha=0.05, k_min=850, k_max=900) == 850

    def test_always_rejecting_variable_returns_none(self, w30, flat_field):
        assert min_safe_k(flat_field, w30, alpha=0.05, k_min=30, k_max=90) is None

    def test_matches_exhaustive_scan_on_206_areas(self):
        w = build_lattice_rook(2, 103)  # 206 areas, same count as a typical use case
        y = generate_sar(w, SarSpec(rho=0.0, seed=7))
        rho_hat = estimate_rho(w, y)
        answer = min_safe_k(y, w, alpha=0.05, k_min=9, k_max=206)
        oracle = self.exhaustive_oracle(y, w, 0.05, 9, 206, rho_hat)
        assert answer == oracle
        assert answer is not None
        # one step below the answer must reject, the answer itself must not
        assert smaup_test(y, w, answer, rho=rho_hat).decision[0.05] is False
        assert smaup_test(y, w, answer - 1, rho=rho_hat).decision[0.05] is True

    def test_scan_k_is_descending_and_consistent(self, w30, flat_field):
        results = scan_k(flat_field, w30, alpha=0.05, k_min=880, k_max=900)
        assert [r.k for r in results] == list(range(900, 879, -1))
        assert all(r.rho_used == results[0].rho_used for r in results)

    def test_invalid_range(self, w30, flat_field):
        with pytest.raises(InvalidKError):
            min_safe_k(flat_field, w30, k_min=0, k_max=10)
        with pytest.raises(InvalidKError):
            scan_k(flat_field, w30, k_min=50, k_max=20)
