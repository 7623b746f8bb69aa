"""Domain types and the exact-hat-algebra equilibrium solver.

Counterfactuals are solved in proportional changes (x_hat = x'/x), so
productivity levels and iceberg costs never appear: they are absorbed into
the baseline expenditure shares. The solver nests three layers at fixed
tariffs: an inner cost/price fixed point, a direct linear solve for sectoral
absorption, and an outer damped tatonnement on wage changes with the
numeraire wage pinned to 1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

ModelVariant = Literal["full", "no-io"]

#: Inner cost/price loop: max absolute log change between iterates.
PRICE_TOL = 1e-11
#: Outer wage loop: max labor-market residual relative to baseline labor income.
WAGE_TOL = 1e-9
#: Damping exponent of the multiplicative wage update.
WAGE_DAMPING = 0.3
MAX_WAGE_ITER = 10_000
MAX_PRICE_ITER = 100_000


class EngineError(Exception):
    """Base class for all engine failures."""


class CalibrationError(EngineError):
    """Invalid or inconsistent baseline data."""


class SolverError(EngineError):
    """Equilibrium computation failed (non-convergence, bad numerics)."""

    def __init__(self, message: str, residuals: np.ndarray | None = None):
        super().__init__(message)
        self.residuals = residuals


def _as_float_array(x, shape: tuple[int, ...], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != shape:
        raise CalibrationError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise CalibrationError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EconomyCalibration:
    """Baseline primitives of the model: shares, elasticities, and levels.

    All currency magnitudes (absorption, labor income, deficits) are in the
    same base-year units; ``kappa`` rescales reported dollar changes to the
    reporting year. Shares are dimensionless and validated to sum to one
    within 1e-12. A calibration is immutable after construction and safe to
    share across concurrent solves.
    """

    regions: tuple[str, ...]
    sectors: tuple[str, ...]
    tariffable: np.ndarray          # (S,) bool
    final_shares: np.ndarray        # a[i, s]
    va_shares: np.ndarray           # gamma[i, s]
    io_shares: np.ndarray           # gamma_io[i, k, s]: inputs k into sector s
    trade_shares: np.ndarray        # pi[i, j, s]: importer i, origin j
    theta: np.ndarray               # (S,)
    labor_income: np.ndarray        # wL[i]
    absorption: np.ndarray          # X[i, s], purchaser prices
    deficits: np.ndarray            # D[i], fixed in numeraire units
    baseline_tariffs: np.ndarray    # tau0[i, j, s], gross factors
    numeraire_region: int = 0
    report_scale: float = 1.0       # kappa

    def __post_init__(self):
        n, s = len(self.regions), len(self.sectors)
        if n < 1 or s < 1:
            raise CalibrationError("need at least one region and one sector")
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "sectors", tuple(self.sectors))
        tariffable = np.asarray(self.tariffable, dtype=bool).copy()
        if tariffable.shape != (s,):
            raise CalibrationError(f"tariffable has shape {tariffable.shape}, expected ({s},)")
        tariffable.setflags(write=False)
        object.__setattr__(self, "tariffable", tariffable)
        for name, shape in [
            ("final_shares", (n, s)),
            ("va_shares", (n, s)),
            ("io_shares", (n, s, s)),
            ("trade_shares", (n, n, s)),
            ("theta", (s,)),
            ("labor_income", (n,)),
            ("absorption", (n, s)),
            ("deficits", (n,)),
            ("baseline_tariffs", (n, n, s)),
        ]:
            object.__setattr__(self, name, _as_float_array(getattr(self, name), shape, name))
        if not 0 <= self.numeraire_region < n:
            raise CalibrationError(f"numeraire_region {self.numeraire_region} out of range")
        self._validate()

    def _validate(self) -> None:
        tol = 1e-12
        a, g, gio, pi = self.final_shares, self.va_shares, self.io_shares, self.trade_shares
        for arr, name in [(a, "final_shares"), (g, "va_shares"), (gio, "io_shares"), (pi, "trade_shares")]:
            if arr.min() < -tol or arr.max() > 1 + tol:
                raise CalibrationError(f"{name} outside [0, 1]")
        bad = np.abs(a.sum(axis=1) - 1.0) > tol
        if bad.any():
            raise CalibrationError(f"final shares do not sum to 1 for regions {list(np.flatnonzero(bad))}")
        bad = np.abs(g + gio.sum(axis=1) - 1.0) > tol
        if bad.any():
            raise CalibrationError("value-added plus input shares do not sum to 1 "
                                   f"at (region, sector) {list(map(tuple, np.argwhere(bad)))[:5]}")
        bad = np.abs(pi.sum(axis=1) - 1.0) > tol
        if bad.any():
            raise CalibrationError("trade shares do not sum to 1 "
                                   f"at (importer, sector) {list(map(tuple, np.argwhere(bad)))[:5]}")
        if (self.theta <= 0).any():
            raise CalibrationError("trade elasticities must be positive")
        if (self.labor_income < 0).any() or (self.absorption < 0).any():
            raise CalibrationError("labor income and absorption must be nonnegative")
        tau0 = self.baseline_tariffs
        if (tau0 < 1.0).any():
            raise CalibrationError("baseline tariff factors must be >= 1")
        n = len(self.regions)
        diag = tau0[np.arange(n), np.arange(n), :]
        if not np.allclose(diag, 1.0, rtol=0, atol=0):
            raise CalibrationError("self tariffs must equal 1")
        if not np.all(tau0[:, :, ~self.tariffable] == 1.0):
            raise CalibrationError("non-tariffable sectors must carry tariff factor 1")

    # -- lookups ---------------------------------------------------------

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    def region_index(self, region: str | int) -> int:
        if isinstance(region, (int, np.integer)):
            if not 0 <= int(region) < self.n_regions:
                raise KeyError(f"region index {region} out of range")
            return int(region)
        try:
            return self.regions.index(region)
        except ValueError:
            raise KeyError(f"unknown region {region!r}") from None

    def sector_index(self, sector: str | int) -> int:
        if isinstance(sector, (int, np.integer)):
            return int(sector)
        try:
            return self.sectors.index(sector)
        except ValueError:
            raise KeyError(f"unknown sector {sector!r}") from None

    # -- derived baseline quantities --------------------------------------

    def gross_output(self) -> np.ndarray:
        """Baseline gross output Y[j, s] implied by goods-market clearing."""
        return np.einsum("ijs,is->js", self.trade_shares / self.baseline_tariffs, self.absorption)

    def baseline_revenue(self) -> np.ndarray:
        """Baseline tariff revenue per region."""
        rate = 1.0 - 1.0 / self.baseline_tariffs
        return np.einsum("ijs,is->i", rate * self.trade_shares, self.absorption)

    def baseline_income(self) -> np.ndarray:
        return self.labor_income + self.baseline_revenue() + self.deficits

    def gdp(self) -> np.ndarray:
        """Total baseline value added per region (welfare-change weights)."""
        return self.labor_income

    def without_io(self) -> "EconomyCalibration":
        """Equivalent economy with input-output linkages removed.

        Value added is set to gross output (labor income absorbs all of it)
        and intermediate demand is folded into final demand, so the stripped
        economy is internally consistent whenever the original one is.
        """
        y0 = self.gross_output()
        x_tot = self.absorption.sum(axis=1)
        if (x_tot <= 0).any():
            raise CalibrationError("cannot strip IO linkages with zero total absorption")
        return replace(
            self,
            final_shares=self.absorption / x_tot[:, None],
            va_shares=np.ones_like(self.va_shares),
            io_shares=np.zeros_like(self.io_shares),
            labor_income=y0.sum(axis=1),
        )


@dataclass(frozen=True)
class TariffSchedule:
    """Gross tariff factors tau[i, j, s] for one policy scenario.

    ``i`` is the importer, ``j`` the exporter. Self tariffs are 1 and
    factors below 1 (subsidies) are rejected.
    """

    tau: np.ndarray
    label: str = ""
    date: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.tau, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise CalibrationError(f"tariff schedule must be (N, N, S), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise CalibrationError("tariff schedule contains non-finite entries")
        if (arr < 1.0).any():
            bad = np.argwhere(arr < 1.0)[0]
            raise CalibrationError(f"tariff factor below 1 at (i, j, s)={tuple(bad)}")
        n = arr.shape[0]
        if not np.all(arr[np.arange(n), np.arange(n), :] == 1.0):
            raise CalibrationError("self tariffs must equal 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "tau", arr)

    @classmethod
    def baseline_of(cls, calib: EconomyCalibration, label: str = "baseline") -> "TariffSchedule":
        return cls(tau=calib.baseline_tariffs, label=label)

    def validate_for(self, calib: EconomyCalibration) -> None:
        n, s = calib.n_regions, calib.n_sectors
        if self.tau.shape != (n, n, s):
            raise CalibrationError(
                f"schedule shape {self.tau.shape} does not match calibration ({n}, {n}, {s})")
        if not np.all(self.tau[:, :, ~calib.tariffable] == 1.0):
            raise CalibrationError("schedule tariffs non-tariffable sectors")

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.tau.shape).encode())
        h.update(np.ascontiguousarray(self.tau).tobytes())
        return h.hexdigest()

    def with_rates(self, calib: EconomyCalibration, importer: str | int,
                   exporters: Sequence[str | int], rate_pct: float,
                   label: str | None = None, date: str | None = None) -> "TariffSchedule":
        """Copy with a uniform ad-valorem rate on tariffable imports from ``exporters``."""
        i = calib.region_index(importer)
        tau = self.tau.copy()
        mask = calib.tariffable
        for e in exporters:
            j = calib.region_index(e)
            if j == i:
                raise CalibrationError("cannot tariff own flows")
            tau[i, j, mask] = 1.0 + rate_pct / 100.0
        return TariffSchedule(tau=tau, label=self.label if label is None else label,
                              date=self.date if date is None else date)


@dataclass(frozen=True)
class EquilibriumOutcome:
    """Converged counterfactual in hats plus recomputed levels.

    Levels (absorption, output, revenue, income) are in baseline currency
    units; welfare hats are dimensionless real-income ratios.
    """

    w_hat: np.ndarray           # (N,)
    c_hat: np.ndarray           # (N, S)
    P_hat: np.ndarray           # (N, S)
    P_hat_agg: np.ndarray       # (N,)
    pi_cf: np.ndarray           # (N, N, S)
    X_cf: np.ndarray            # (N, S)
    Y_cf: np.ndarray            # (N, S)
    T_cf: np.ndarray            # (N,)
    I_cf: np.ndarray            # (N,)
    W_hat: np.ndarray           # (N,)
    schedule: TariffSchedule
    variant: ModelVariant
    iterations: int
    max_labor_residual: float


def _solve_prices(w_hat: np.ndarray, P_hat0: np.ndarray, kernel: np.ndarray,
                  empty_rows: np.ndarray, gamma: np.ndarray, gamma_io: np.ndarray,
                  theta: np.ndarray, tol: float, sectors: tuple[str, ...],
                  regions: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Inner fixed point on unit-cost and price-index hats at given wages.

    ``kernel`` is pi0 * tau_hat**(-theta), fixed across the outer loop.
    Rows with zero total baseline expenditure keep P_hat = 1.
    """
    log_w = np.log(w_hat)
    log_p = np.log(P_hat0)
    for _ in range(MAX_PRICE_ITER):
        log_c = gamma * log_w[:, None] + np.einsum("iks,ik->is", gamma_io, log_p)
        c_hat = np.exp(log_c)
        contrib = kernel * c_hat[None, :, :] ** (-theta[None, None, :])
        denom = contrib.sum(axis=1)
        with np.errstate(divide="ignore"):
            log_p_new = np.where(empty_rows, 0.0, -np.log(denom) / theta[None, :])
        if not np.all(np.isfinite(log_p_new)):
            bad = np.argwhere(~np.isfinite(log_p_new))[0]
            raise SolverError(
                f"price index hat is not finite for region {regions[bad[0]]!r}, "
                f"sector {sectors[bad[1]]!r}")
        delta = np.abs(log_p_new - log_p).max()
        log_p = log_p_new
        if delta < tol:
            return np.exp(gamma * log_w[:, None] + np.einsum("iks,ik->is", gamma_io, log_p)), np.exp(log_p)
    raise SolverError("price fixed point did not converge")


def _counterfactual_shares(kernel: np.ndarray, c_hat: np.ndarray, theta: np.ndarray,
                           empty_rows: np.ndarray) -> np.ndarray:
    contrib = kernel * c_hat[None, :, :] ** (-theta[None, None, :])
    denom = contrib.sum(axis=1)
    n = contrib.shape[0]
    pi_cf = np.zeros_like(contrib)
    safe = denom > 0
    np.divide(contrib, denom[:, None, :], out=pi_cf, where=safe[:, None, :])
    if not safe.all():
        # Degenerate all-zero expenditure rows are treated as autarkic.
        for i, s in np.argwhere(~safe):
            pi_cf[i, i, s] = 1.0
    return pi_cf


def _solve_absorption(w_hat: np.ndarray, pi_cf: np.ndarray, tau_p: np.ndarray,
                      a: np.ndarray, gamma_io: np.ndarray, wl: np.ndarray,
                      d: np.ndarray) -> np.ndarray:
    """Direct solve of the linear system for counterfactual absorption.

    Substituting tariff revenue and income into the absorption identity makes
    X' linear in itself at fixed wages and shares.
    """
    n, s = a.shape
    b_flow = pi_cf / tau_p                         # origin revenue per unit expenditure
    m = ((1.0 - 1.0 / tau_p) * pi_cf).sum(axis=1)  # revenue share of absorption, (N, S)
    mat = -np.einsum("iks,mis->ikms", gamma_io, b_flow)
    idx = np.arange(n)
    mat[idx, :, idx, :] -= a[:, :, None] * m[:, None, :]
    mat = mat.reshape(n * s, n * s)
    mat[np.diag_indices_from(mat)] += 1.0
    rhs = (a * (w_hat * wl + d)[:, None]).reshape(-1)
    try:
        x = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"absorption system is singular: {exc}") from exc
    return x.reshape(n, s)


def solve_equilibrium(calib: EconomyCalibration, schedule: TariffSchedule,
                      variant: ModelVariant = "full", *,
                      w0: np.ndarray | None = None,
                      price_tol: float = PRICE_TOL,
                      wage_tol: float = WAGE_TOL,
                      damping: float = WAGE_DAMPING,
                      max_iter: int = MAX_WAGE_ITER) -> EquilibriumOutcome:
    """Solve the counterfactual equilibrium for ``schedule`` against the baseline.

    The tariff shock is ``schedule.tau / calib.baseline_tariffs``. Raises
    :class:`SolverError` on non-convergence (carrying the final labor-market
    residuals) or on non-finite/non-positive price hats.
    """
    if variant == "no-io":
        calib = calib.without_io()
    elif variant != "full":
        raise ValueError(f"unknown model variant {variant!r}")
    schedule.validate_for(calib)
    if (calib.labor_income <= 0).any():
        raise CalibrationError("solver requires strictly positive labor income everywhere")

    n, _ = calib.absorption.shape
    tau_p = schedule.tau
    tau_hat = tau_p / calib.baseline_tariffs
    theta = calib.theta
    kernel = calib.trade_shares * tau_hat ** (-theta[None, None, :])
    empty_rows = calib.trade_shares.sum(axis=1) <= 0.0

    num = calib.numeraire_region
    if w0 is None:
        w_hat = np.ones(n)
    else:
        w_hat = np.asarray(w0, dtype=np.float64).copy()
        if w_hat.shape != (n,) or (w_hat <= 0).any():
            raise ValueError("w0 must be positive with one entry per region")
        w_hat /= w_hat[num]
    p_hat = np.ones_like(calib.absorption)

    wl, d = calib.labor_income, calib.deficits
    residuals = np.full(n, np.inf)
    for iteration in range(1, max_iter + 1):
        c_hat, p_hat = _solve_prices(w_hat, p_hat, kernel, empty_rows, calib.va_shares,
                                     calib.io_shares, theta, price_tol,
                                     calib.sectors, calib.regions)
        pi_cf = _counterfactual_shares(kernel, c_hat, theta, empty_rows)
        x_cf = _solve_absorption(w_hat, pi_cf, tau_p, calib.final_shares,
                                 calib.io_shares, wl, d)
        y_cf = np.einsum("ijs,is->js", pi_cf / tau_p, x_cf)
        demand = (calib.va_shares * y_cf).sum(axis=1)
        supply = w_hat * wl
        residuals = (demand - supply) / wl
        if np.abs(residuals).max() < wage_tol:
            break
        ratio = demand / supply
        if (ratio <= 0).any() or not np.all(np.isfinite(ratio)):
            raise SolverError("labor demand turned non-positive during iteration",
                              residuals=residuals)
        w_hat = w_hat * ratio ** damping
        w_hat = w_hat / w_hat[num]
    else:
        raise SolverError(
            f"wage fixed point did not converge within {max_iter} iterations "
            f"(max labor residual {np.abs(residuals).max():.3e})", residuals=residuals)

    t_cf = ((1.0 - 1.0 / tau_p) * pi_cf * x_cf[:, None, :]).sum(axis=(1, 2))
    i_cf = w_hat * wl + t_cf + d
    i0 = calib.baseline_income()
    if (i0 <= 0).any():
        raise CalibrationError("baseline income must be positive to measure welfare")
    p_agg = np.exp((calib.final_shares * np.log(p_hat)).sum(axis=1))
    w_hat_welfare = (i_cf / i0) / p_agg

    return EquilibriumOutcome(
        w_hat=w_hat, c_hat=c_hat, P_hat=p_hat, P_hat_agg=p_agg, pi_cf=pi_cf,
        X_cf=x_cf, Y_cf=y_cf, T_cf=t_cf, I_cf=i_cf, W_hat=w_hat_welfare,
        schedule=schedule, variant=variant, iterations=iteration,
        max_labor_residual=float(np.abs(residuals).max()),
    )


def welfare_in_currency(outcome: EquilibriumOutcome, calib: EconomyCalibration,
                        region_set: Iterable[str | int]) -> float:
    """Reported-dollar welfare change summed over ``region_set``.

    Each member contributes (W_hat - 1) times its baseline GDP, scaled by
    kappa; summing members is equivalent to a GDP-weighted average change.
    """
    idx = [calib.region_index(r) for r in region_set]
    if not idx:
        raise ValueError("region set must not be empty")
    gdp = calib.gdp()
    return float(((outcome.W_hat[idx] - 1.0) * gdp[idx]).sum() * calib.report_scale)


def trade_weighted_avg_tariff(outcome: EquilibriumOutcome, calib: EconomyCalibration,
                              schedule: TariffSchedule,
                              side: Literal["imports", "exports"],
                              country: str | int) -> float:
    """Average ad-valorem rate in percent, weighted by counterfactual trade.

    Weights are tariff-inclusive expenditures at the counterfactual
    equilibrium, restricted to tariffable sectors and cross-border flows.
    """
    c = calib.region_index(country)
    mask = calib.tariffable
    other = np.arange(calib.n_regions) != c
    if side == "imports":
        weights = outcome.pi_cf[c][:, mask] * outcome.X_cf[c][mask][None, :]
        rates = schedule.tau[c][:, mask] - 1.0
        weights = weights[other]
        rates = rates[other]
    elif side == "exports":
        weights = outcome.pi_cf[:, c, :][:, mask] * outcome.X_cf[:, mask]
        rates = schedule.tau[:, c, :][:, mask] - 1.0
        weights = weights[other]
        rates = rates[other]
    else:
        raise ValueError(f"side must be 'imports' or 'exports', got {side!r}")
    total = weights.sum()
    if total <= 0:
        raise EngineError(f"no {side} trade for region {calib.regions[c]!r} (zero total weight)")
    return float(100.0 * (rates * weights).sum() / total)


def _mixed_home_accounting(calib: EconomyCalibration, outcome: EquilibriumOutcome,
                           home: int, target: int) -> tuple[float, float]:
    """Home revenue level and welfare hat with non-target flows held at baseline.

    Only the home-target terms (and home's own cost change) enter at
    counterfactual values; every other bilateral contribution keeps its
    baseline price and flow.
    """
    pi0, x0, tau0 = calib.trade_shares, calib.absorption, calib.baseline_tariffs
    tau_p = outcome.schedule.tau
    theta = calib.theta

    t_home = 0.0
    for j in range(calib.n_regions):
        if j == target:
            t_home += float(((1.0 - 1.0 / tau_p[home, j]) * outcome.pi_cf[home, j]
                             * outcome.X_cf[home]).sum())
        else:
            t_home += float(((1.0 - 1.0 / tau0[home, j]) * pi0[home, j] * x0[home]).sum())

    tau_hat = tau_p / tau0
    factors = np.ones_like(pi0[home])                      # (N, S)
    for j in (home, target):
        factors[j] = (outcome.c_hat[j] * tau_hat[home, j]) ** (-theta)
    denom = (pi0[home] * factors).sum(axis=0)
    p_hat_mix = np.where(denom > 0, denom ** (-1.0 / theta), 1.0)
    p_agg_mix = float(np.exp((calib.final_shares[home] * np.log(p_hat_mix)).sum()))

    i_mix = outcome.w_hat[home] * calib.labor_income[home] + t_home + calib.deficits[home]
    i0 = calib.baseline_income()[home]
    return t_home, (i_mix / i0) / p_agg_mix


def bilateral_only_accounting(outcome_full: EquilibriumOutcome,
                              baseline: EquilibriumOutcome,
                              calib: EconomyCalibration,
                              target_partner: str | int,
                              home: str | int | None = None) -> tuple[float, float]:
    """Home revenue and welfare changes with third-party flows frozen at baseline.

    Both outcomes must have been solved with the full model; this only
    changes the accounting. Returns kappa-scaled (d_revenue, d_welfare).
    """
    h = calib.numeraire_region if home is None else calib.region_index(home)
    t = calib.region_index(target_partner)
    if t == h:
        raise ValueError("target partner must differ from the importing home region")
    rev_cf, welf_cf = _mixed_home_accounting(calib, outcome_full, h, t)
    rev_ref, welf_ref = _mixed_home_accounting(calib, baseline, h, t)
    kappa = calib.report_scale
    d_rev = (rev_cf - rev_ref) * kappa
    d_welf = (welf_cf - welf_ref) * calib.gdp()[h] * kappa
    return d_rev, d_welf
