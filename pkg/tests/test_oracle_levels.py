"""Hat-algebra solver versus the independent levels-based solver."""

from __future__ import annotations

import numpy as np
import pytest

from tariff_engine import TariffSchedule, solve_equilibrium

from levels_oracle import solve_levels, welfare_hats


def _oracle_pair(calib, rate_pct):
    """Baseline and counterfactual levels solutions for a home tariff."""
    pi0 = calib.trade_shares[:, :, 0]
    theta = float(calib.theta[0])
    labor = calib.labor_income.copy()
    deficits = calib.deficits.copy()
    tau_base = np.ones_like(pi0)
    tau_cf = tau_base.copy()
    tau_cf[0, 1] = 1.0 + rate_pct / 100.0
    base = solve_levels(pi0, tau_base, theta, labor, deficits)
    cf = solve_levels(pi0, tau_cf, theta, labor, deficits)
    return base, cf


def _hat_outcome(calib, rate_pct):
    schedule = TariffSchedule.baseline_of(calib).with_rates(calib, "USA", ["FOR"], rate_pct)
    return solve_equilibrium(calib, schedule, "no-io")


@pytest.mark.parametrize("rate_pct", [0.0, 5.0, 25.0, 50.0])
def test_hat_solver_matches_levels_oracle(two_region, rate_pct):
    base, cf = _oracle_pair(two_region, rate_pct)
    out = _hat_outcome(two_region, rate_pct)

    w_hat_oracle = cf.wages / base.wages
    np.testing.assert_allclose(out.w_hat, w_hat_oracle, rtol=1e-6)
    np.testing.assert_allclose(out.W_hat, welfare_hats(base, cf), rtol=1e-6)
    if rate_pct == 0.0:
        assert np.abs(out.T_cf).max() < 1e-8
        assert np.abs(cf.revenue).max() < 1e-12
    else:
        np.testing.assert_allclose(out.T_cf, cf.revenue, rtol=1e-6)


def test_oracle_baseline_is_fixed_point(two_region):
    base, _ = _oracle_pair(two_region, 25.0)
    np.testing.assert_allclose(base.wages, 1.0, atol=1e-12)
    np.testing.assert_allclose(base.expenditures, two_region.absorption[:, 0], rtol=1e-12)


def test_symmetric_tariff_hurts_partner_wage(two_region):
    _, cf = _oracle_pair(two_region, 25.0)
    # Home's tariff depresses the partner's relative wage (terms-of-trade shift).
    assert cf.wages[1] < 1.0
