from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tariff_engine.fiscal import (
    AnalyticParams,
    FiscalZone,
    MarginalPoint,
    analytic_fe_tariff,
    analytic_laffer_peak,
    analytic_meb,
    analytic_meb_denominator,
    analytic_meb_slope,
    analytic_welfare_peak,
    classify_zone,
    curve_marginals,
    meb,
    median_marginals,
    mfei,
)


# -- excess burden -------------------------------------------------------------

def test_meb_arithmetic():
    assert meb(MarginalPoint(dW=-0.5, dR=1.0)) == pytest.approx(0.5)
    assert meb(MarginalPoint(dW=1.0, dR=1.0)) == pytest.approx(-1.0)
    assert meb(MarginalPoint(dW=1.0, dR=0.0)) is None


# -- efficiency index ----------------------------------------------------------

def test_mfei_examples():
    assert mfei(MarginalPoint(dW=1.0, dR=1.0, alpha=0.25)) == 1.0
    assert mfei(MarginalPoint(dW=-0.25, dR=1.0, alpha=0.25)) == 0.0
    # Trade-off with burden 0.5 against alpha 0.25.
    assert mfei(MarginalPoint(dW=-0.5, dR=1.0, alpha=0.25)) == pytest.approx(-1.0 / 3.0)
    assert mfei(MarginalPoint(dW=0.0, dR=0.0, alpha=0.25)) == 0.0


def test_zone_examples():
    assert classify_zone(MarginalPoint(1.0, 1.0)) is FiscalZone.FREE_LUNCH
    assert classify_zone(MarginalPoint(-1.0, 1.0, alpha=0.25)) is FiscalZone.INEFFICIENT_TRADE_OFF
    assert classify_zone(MarginalPoint(-1.0, 0.0)) is FiscalZone.BEYOND_LAFFER
    assert classify_zone(MarginalPoint(-0.1, 1.0, alpha=0.25)) is FiscalZone.EFFICIENT_TRADE_OFF
    assert classify_zone(MarginalPoint(-0.25, 1.0, alpha=0.25)) is FiscalZone.FISCALLY_NEUTRAL
    assert classify_zone(MarginalPoint(-1.0, 1.0, alpha=0.25), granularity=3) == "TradeOff"
    assert classify_zone(MarginalPoint(2.0, 1.0), granularity=3) == "FreeLunch"
    with pytest.raises(ValueError):
        classify_zone(MarginalPoint(1.0, 1.0), granularity=4)


# Magnitudes span twelve orders; beyond ~2^53 between the two terms the
# index rounds onto the boundary and sign-level consistency is meaningless.
finite = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-3, max_value=1e6).map(lambda x: x),
    st.floats(min_value=1e-3, max_value=1e6).map(lambda x: -x),
)
pos_alpha = st.floats(min_value=1e-3, max_value=10.0, allow_nan=False)


@given(dw=finite, dr=finite, alpha=pos_alpha)
@settings(max_examples=300)
def test_mfei_bounded_and_zone_consistent(dw, dr, alpha):
    p = MarginalPoint(dW=dw, dR=dr, alpha=alpha)
    value = mfei(p)
    zone = classify_zone(p)
    assert -1.0 <= value <= 1.0
    assert (value == 1.0) == (zone is FiscalZone.FREE_LUNCH)
    assert (value == -1.0) == (zone is FiscalZone.BEYOND_LAFFER)
    if zone is FiscalZone.FISCALLY_NEUTRAL:
        assert abs(value) < 1e-9
    if dw < 0.0 < dr:
        burden = -dw / dr
        assert np.sign(value) == np.sign(alpha - burden)


@given(dr=st.floats(min_value=1e-3, max_value=1e6),
       burden_a=st.floats(min_value=1e-3, max_value=1e3),
       burden_b=st.floats(min_value=1e-3, max_value=1e3),
       alpha=st.floats(min_value=1e-3, max_value=10.0))
@settings(max_examples=300)
def test_mfei_monotone_in_burden_and_alpha(dr, burden_a, burden_b, alpha):
    lo, hi = min(burden_a, burden_b), max(burden_a, burden_b)
    if lo == hi:
        hi = lo * 1.5
    # Strictly decreasing in the excess burden.
    assert mfei(MarginalPoint(-lo * dr, dr, alpha)) > mfei(MarginalPoint(-hi * dr, dr, alpha))
    # Strictly increasing in alpha.
    assert mfei(MarginalPoint(-lo * dr, dr, alpha * 2)) > mfei(MarginalPoint(-lo * dr, dr, alpha))


def test_mfei_limits():
    # At alpha = 0 the index is exactly the welfare sign; at the 1e6
    # surrogate for infinity the revenue sign dominates once |dW/dR| < 1/2.
    p_small = MarginalPoint(dW=-3.0, dR=2.0, alpha=0.0)
    assert mfei(p_small) == math.copysign(1.0, p_small.dW)
    p_large = MarginalPoint(dW=-0.3, dR=2.0, alpha=1e6)
    assert mfei(p_large) == pytest.approx(math.copysign(1.0, p_large.dR), abs=1e-6)


# -- curve marginals -----------------------------------------------------------

class _FakePoint:
    def __init__(self, rate, rev, welf):
        self.rate_pct = rate
        self.d_revenue = rev
        self.d_welfare_home = welf


class _FakeCurve:
    def __init__(self, rates, rev, welf):
        self.points = [_FakePoint(t, r, w) for t, r, w in zip(rates, rev, welf)]


def test_curve_marginals_quadratic_and_linear():
    rates = list(range(0, 51))
    rev = [-(t - 25.0) ** 2 for t in rates]
    welf = [-2.0 * t for t in rates]
    marg = curve_marginals(_FakeCurve(rates, rev, welf))
    assert len(marg) == 49
    mid = marg[24]  # rate 25
    assert mid.dR == 0.0
    assert all(m.dW == pytest.approx(-2.0) for m in marg)
    with pytest.raises(ValueError):
        curve_marginals(_FakeCurve(rates[:2], rev[:2], welf[:2]))


def test_median_marginals():
    a = [MarginalPoint(-1.0, 1.0), MarginalPoint(-2.0, 2.0)]
    b = [MarginalPoint(-3.0, 5.0), MarginalPoint(-4.0, 6.0)]
    c = [MarginalPoint(-2.0, 3.0), MarginalPoint(-3.0, 4.0)]
    med = median_marginals([a, b, c])
    assert med[0].dW == -2.0 and med[0].dR == 3.0
    assert med[1].dW == -3.0 and med[1].dR == 4.0


# -- analytic closed forms -----------------------------------------------------

def test_analytic_point_values():
    p = AnalyticParams(epsilon=2.0, sigma=1.0, alpha=0.25)
    assert analytic_meb(p, 1.0) == pytest.approx(-2.0 / 3.0)
    assert analytic_welfare_peak(p) == pytest.approx(2.0)
    assert analytic_laffer_peak(p) == pytest.approx(4.0)  # t = 300%
    fe = analytic_fe_tariff(p)
    assert fe == pytest.approx(2.0 * 2.0 * 1.25 / 2.25)
    assert analytic_welfare_peak(p) < fe < analytic_laffer_peak(p)


def test_analytic_domain_checks():
    with pytest.raises(ValueError):
        AnalyticParams(epsilon=1.0, sigma=1.0)
    with pytest.raises(ValueError):
        AnalyticParams(epsilon=2.0, sigma=0.0)
    with pytest.raises(ValueError):
        AnalyticParams(epsilon=2.0, sigma=1.0, alpha=-0.1)
    with pytest.raises(ValueError):
        analytic_meb(AnalyticParams(2.0, 1.0), 0.5)


@pytest.mark.parametrize("seed", [0, 1])
def test_analytic_identities_random_grid(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        p = AnalyticParams(epsilon=rng.uniform(1.1, 10.0),
                           sigma=rng.uniform(0.1, 10.0),
                           alpha=rng.uniform(0.0, 1.0))
        assert abs(analytic_meb(p, analytic_welfare_peak(p))) < 1e-10
        assert abs(analytic_meb(p, analytic_fe_tariff(p)) - p.alpha) < 1e-10
        scale = p.epsilon * (1 + analytic_laffer_peak(p) * p.sigma)
        assert abs(analytic_meb_denominator(p, analytic_laffer_peak(p))) < 1e-10 * scale
        # Slope against a centered difference away from the asymptote
        # (interior points only, so the difference stencil stays in domain).
        peak = analytic_welfare_peak(p)
        for tau in (1.0 + 0.5 * (peak - 1.0), peak,
                    0.5 * (peak + analytic_fe_tariff(p))):
            h = 1e-5 * max(1.0, tau)
            fd = (analytic_meb(p, tau + h) - analytic_meb(p, tau - h)) / (2 * h)
            assert analytic_meb_slope(p, tau) == pytest.approx(fd, rel=1e-6)
            assert analytic_meb_slope(p, tau) > 0.0
