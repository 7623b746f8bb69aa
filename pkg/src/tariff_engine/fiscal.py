"""Marginal fiscal diagnostics: excess burden, efficiency index, zones.

The bounded efficiency index normalizes the government's marginal fiscal
objective dW + alpha*dR by the L1 norm of its components, mapping the
unbounded excess-burden ratio into [-1, 1] and removing the asymptote at
the revenue peak. The analytic functions evaluate the constant-elasticity
closed forms used as an oracle for the numerical engine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .scan import PolicyCurve

#: Default marginal excess burden of the domestic tax system.
DEFAULT_ALPHA = 0.25

#: |dR| below this (in curve currency units) marks the excess burden undefined.
MEB_DENOMINATOR_EPS = 1e-12


class FiscalZone(enum.Enum):
    FREE_LUNCH = "FreeLunch"
    EFFICIENT_TRADE_OFF = "EfficientTradeOff"
    FISCALLY_NEUTRAL = "FiscallyNeutral"
    INEFFICIENT_TRADE_OFF = "InefficientTradeOff"
    BEYOND_LAFFER = "BeyondLaffer"

    def coarse(self) -> str:
        """Three-way partition: FreeLunch / TradeOff / BeyondLaffer."""
        if self is FiscalZone.FREE_LUNCH:
            return "FreeLunch"
        if self is FiscalZone.BEYOND_LAFFER:
            return "BeyondLaffer"
        return "TradeOff"


@dataclass(frozen=True)
class MarginalPoint:
    """Marginal welfare and revenue responses to the tariff rate.

    The excess burden and the efficiency index are ratios, so any common
    rate unit (percentage points or fractions) gives identical values.
    """

    dW: float
    dR: float
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not (math.isfinite(self.dW) and math.isfinite(self.dR)):
            raise ValueError("marginal responses must be finite")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError("alpha must be finite and nonnegative")


def meb(p: MarginalPoint) -> float | None:
    """Welfare cost per marginal dollar of revenue, -dW/dR.

    Returns ``None`` (undefined, not an error) when |dR| falls below the
    asymptote guard at the revenue peak.
    """
    if abs(p.dR) < MEB_DENOMINATOR_EPS:
        return None
    return -p.dW / p.dR


def mfei(p: MarginalPoint) -> float:
    """Bounded fiscal-efficiency index in [-1, 1]; 0 when both margins vanish."""
    denom = abs(p.dW) + p.alpha * abs(p.dR)
    if denom == 0.0:
        return 0.0
    return (p.dW + p.alpha * p.dR) / denom


def classify_zone(p: MarginalPoint, granularity: int = 5) -> FiscalZone | str:
    """Sign-based fiscal zone of a marginal point.

    ``granularity=5`` returns the fine enum; ``granularity=3`` the coarse
    label. Revenue-spending points (dW > 0, dR < 0) fall in the trade-off
    zones via the same efficiency comparison against alpha.
    """
    if granularity not in (3, 5):
        raise ValueError("granularity must be 3 or 5")
    dw, dr, alpha = p.dW, p.dR, p.alpha
    denom = abs(dw) + alpha * abs(dr)
    if denom == 0.0:
        zone = FiscalZone.FISCALLY_NEUTRAL
    elif dw >= 0.0 and dr >= 0.0:
        zone = FiscalZone.FREE_LUNCH
    elif dw <= 0.0 and dr <= 0.0:
        zone = FiscalZone.BEYOND_LAFFER
    elif dw < 0.0 < dr:
        burden = -dw / dr
        if burden < alpha:
            zone = FiscalZone.EFFICIENT_TRADE_OFF
        elif burden > alpha:
            zone = FiscalZone.INEFFICIENT_TRADE_OFF
        else:
            zone = FiscalZone.FISCALLY_NEUTRAL
    else:  # dw > 0 > dr: welfare gained by spending revenue
        benefit = dw / (-dr)
        if benefit > alpha:
            zone = FiscalZone.EFFICIENT_TRADE_OFF
        elif benefit < alpha:
            zone = FiscalZone.INEFFICIENT_TRADE_OFF
        else:
            zone = FiscalZone.FISCALLY_NEUTRAL
    return zone if granularity == 5 else zone.coarse()


def curve_marginals(curve: "PolicyCurve", alpha: float = DEFAULT_ALPHA) -> list[MarginalPoint]:
    """Centered finite differences of the curve at interior grid points.

    Derivatives are per percentage point of the tariff rate (the curve's
    grid unit); multiply by 100 for per-unit-factor derivatives. Endpoints
    are omitted.
    """
    pts = curve.points
    if len(pts) < 3:
        raise ValueError("need at least three curve points for centered differences")
    out: list[MarginalPoint] = []
    for k in range(1, len(pts) - 1):
        dt = pts[k + 1].rate_pct - pts[k - 1].rate_pct
        dw = (pts[k + 1].d_welfare_home - pts[k - 1].d_welfare_home) / dt
        dr = (pts[k + 1].d_revenue - pts[k - 1].d_revenue) / dt
        out.append(MarginalPoint(dW=dw, dR=dr, alpha=alpha))
    return out


def median_marginals(per_partner: list[list[MarginalPoint]]) -> list[MarginalPoint]:
    """Pointwise median curve across partners (median dW and dR per rate)."""
    if not per_partner:
        raise ValueError("no marginal series given")
    length = len(per_partner[0])
    if any(len(series) != length for series in per_partner):
        raise ValueError("marginal series must share the same grid")
    import statistics

    out = []
    for k in range(length):
        dw = statistics.median(s[k].dW for s in per_partner)
        dr = statistics.median(s[k].dR for s in per_partner)
        out.append(MarginalPoint(dW=dw, dR=dr, alpha=per_partner[0][k].alpha))
    return out


# ---------------------------------------------------------------------------
# Constant-elasticity closed forms (analytic oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticParams:
    """Import demand elasticity > 1, export supply elasticity > 0, alpha >= 0."""

    epsilon: float
    sigma: float
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not self.epsilon > 1.0:
            raise ValueError("import demand elasticity must exceed 1")
        if not self.sigma > 0.0:
            raise ValueError("export supply elasticity must be positive")
        if not self.alpha >= 0.0:
            raise ValueError("alpha must be nonnegative")


def _check_tau(tau: float) -> None:
    if not tau >= 1.0:
        raise ValueError("tariff factor must be >= 1")


def analytic_meb(params: AnalyticParams, tau: float) -> float:
    """Closed-form marginal excess burden at gross tariff factor ``tau``."""
    _check_tau(tau)
    eps, sig = params.epsilon, params.sigma
    num = eps * ((tau - 1.0) * sig - 1.0)
    den = eps + tau * sig - (tau - 1.0) * eps * sig
    return num / den


def analytic_meb_denominator(params: AnalyticParams, tau: float) -> float:
    _check_tau(tau)
    eps, sig = params.epsilon, params.sigma
    return eps + tau * sig - (tau - 1.0) * eps * sig


def analytic_welfare_peak(params: AnalyticParams) -> float:
    """Welfare-maximizing tariff factor: the inverse export-supply-elasticity rule."""
    return 1.0 + 1.0 / params.sigma


def analytic_laffer_peak(params: AnalyticParams) -> float:
    """Revenue-maximizing tariff factor."""
    eps, sig = params.epsilon, params.sigma
    return 1.0 + (sig + eps) / (sig * (eps - 1.0))


def analytic_fe_tariff(params: AnalyticParams) -> float:
    """Fiscally neutral tariff factor where the excess burden equals alpha.

    Lies strictly between the welfare and revenue peaks for alpha > 0.
    """
    eps, sig, alpha = params.epsilon, params.sigma, params.alpha
    return eps * (1.0 + sig) * (1.0 + alpha) / (sig * (eps + alpha * (eps - 1.0)))


def analytic_meb_slope(params: AnalyticParams, tau: float) -> float:
    """Derivative of the closed-form excess burden; positive away from the peak."""
    _check_tau(tau)
    eps, sig = params.epsilon, params.sigma
    den = analytic_meb_denominator(params, tau)
    return eps * sig * (1.0 + sig) / (den * den)
