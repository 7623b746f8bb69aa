"""Brute-force levels solver for small no-IO economies.

Independent cross-check for the hat-algebra engine: solves the market
clearing system directly in wage and expenditure LEVELS with scipy root
finding, never in proportional changes. Technology constants are
materialized from baseline shares by choosing units so baseline prices are
one, which is exact when the baseline tariff factors are one.

Kept deliberately naive; shares the model's equations but none of the
engine's solution strategy or code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize


@dataclass
class LevelsSolution:
    wages: np.ndarray        # w_i, numeraire w[0] = 1
    expenditures: np.ndarray  # X_i
    shares: np.ndarray       # pi_ij at the solved wages
    revenue: np.ndarray      # T_i
    price_index: np.ndarray  # P_i
    real_income: np.ndarray  # X_i / P_i


def _shares_at(wages: np.ndarray, tech: np.ndarray, tau: np.ndarray,
               theta: float) -> np.ndarray:
    weights = tech * (wages[None, :] * tau) ** (-theta)
    return weights / weights.sum(axis=1, keepdims=True)


def _expenditure_at(wages: np.ndarray, shares: np.ndarray, tau: np.ndarray,
                    labor: np.ndarray, deficits: np.ndarray) -> np.ndarray:
    # X_i = w_i L_i + D_i + (tariff revenue), revenue linear in X_i.
    keep = ((1.0 - 1.0 / tau) * shares).sum(axis=1)
    return (wages * labor + deficits) / (1.0 - keep)


def solve_levels(pi0: np.ndarray, tau: np.ndarray, theta: float,
                 labor: np.ndarray, deficits: np.ndarray) -> LevelsSolution:
    """Solve the one-sector, no-IO economy in levels for arbitrary N.

    ``pi0`` are baseline expenditure shares observed at unit tariffs, so the
    Frechet technology constants are the shares themselves. Labor endowments
    are measured in baseline wage units (w = 1 at the baseline).
    """
    pi0 = np.asarray(pi0, dtype=float)
    tau = np.asarray(tau, dtype=float)
    labor = np.asarray(labor, dtype=float)
    deficits = np.asarray(deficits, dtype=float)
    n = labor.size

    def assemble(wages):
        shares = _shares_at(wages, pi0, tau, theta)
        x = _expenditure_at(wages, shares, tau, labor, deficits)
        sales = (shares / tau * x[:, None]).sum(axis=0)
        return shares, x, sales

    def residual(free_wages):
        wages = np.concatenate(([1.0], np.abs(free_wages)))
        _, _, sales = assemble(wages)
        return (sales - wages * labor)[1:]

    if n == 2:
        def scalar_residual(w2):
            return residual(np.array([w2]))[0]
        w2 = optimize.brentq(scalar_residual, 1e-3, 1e3, xtol=1e-14, rtol=1e-15)
        wages = np.array([1.0, w2])
    else:
        sol = optimize.root(residual, np.ones(n - 1), tol=1e-13)
        if not sol.success:
            raise RuntimeError(f"levels solver failed: {sol.message}")
        wages = np.concatenate(([1.0], np.abs(sol.x)))

    shares, x, _ = assemble(wages)
    revenue = ((1.0 - 1.0 / tau) * shares * x[:, None]).sum(axis=1)
    weights = pi0 * (wages[None, :] * tau) ** (-theta)
    price_index = weights.sum(axis=1) ** (-1.0 / theta)
    return LevelsSolution(wages=wages, expenditures=x, shares=shares,
                          revenue=revenue, price_index=price_index,
                          real_income=x / price_index)


def welfare_hats(baseline: LevelsSolution, counterfactual: LevelsSolution) -> np.ndarray:
    return counterfactual.real_income / baseline.real_income
