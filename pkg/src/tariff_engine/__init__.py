"""Tariff counterfactual engine: equilibrium solver, policy scans, fiscal
diagnostics, and inverse-optimum estimation."""

from .core import (
    CalibrationError,
    EconomyCalibration,
    EngineError,
    EquilibriumOutcome,
    SolverError,
    TariffSchedule,
    bilateral_only_accounting,
    solve_equilibrium,
    trade_weighted_avg_tariff,
    welfare_in_currency,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "EconomyCalibration",
    "EngineError",
    "EquilibriumOutcome",
    "SolverError",
    "TariffSchedule",
    "bilateral_only_accounting",
    "solve_equilibrium",
    "trade_weighted_avg_tariff",
    "welfare_in_currency",
    "__version__",
]
