"""Baseline construction from input-output accounts and tariff records.

Shares are read off the accounts directly: final-demand shares from final
absorption, value-added and input shares from the production columns.
Cross-border flows arrive at basic prices and are marked up by the baseline
tariff factor to purchaser prices before trade shares are formed. Deficits
are net imports valued at tariff-exclusive prices.

Product-level tariff records aggregate to sectors through a pre-flattened
concordance; sector rates are simple averages over product lines after a
chronological overlay of tracker actions.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .core import CalibrationError, EconomyCalibration, TariffSchedule

VA_KIND = "VA"
FINAL_USE = "FINAL"

RECORD_SOURCES = ("baseline", "tradewar-delta", "tracker")


class InputError(CalibrationError):
    """Malformed or unresolvable input data."""


@dataclass(frozen=True)
class IoTable:
    """Long-format flow records plus the region/sector code lists."""

    flows: pd.DataFrame  # origin_region, origin_kind, dest_region, dest_use, value
    regions: tuple[str, ...]
    sectors: tuple[str, ...]

    def __post_init__(self):
        required = ["origin_region", "origin_kind", "dest_region", "dest_use", "value"]
        missing = [c for c in required if c not in self.flows.columns]
        if missing:
            raise InputError(f"IO table is missing columns {missing}")
        values = self.flows["value"].to_numpy()
        if not np.all(np.isfinite(values)):
            raise InputError("IO table contains non-finite values")
        codes = set(self.sectors) | {VA_KIND}
        bad = set(self.flows["origin_kind"]) - codes
        if bad:
            raise InputError(f"unknown origin kinds {sorted(bad)}")
        bad = set(self.flows["dest_use"]) - (set(self.sectors) | {FINAL_USE})
        if bad:
            raise InputError(f"unknown destination uses {sorted(bad)}")
        bad = (set(self.flows["origin_region"]) | set(self.flows["dest_region"])) - set(self.regions)
        if bad:
            raise InputError(f"unknown regions {sorted(bad)}")

    @classmethod
    def from_csv(cls, path: str | Path, regions, sectors) -> "IoTable":
        flows = pd.read_csv(path, dtype={"origin_region": str, "origin_kind": str,
                                         "dest_region": str, "dest_use": str})
        return cls(flows=flows, regions=tuple(regions), sectors=tuple(sectors))


@dataclass(frozen=True)
class TariffRecord:
    """One product-level duty observation."""

    importer: str
    exporter: str
    product_code: str
    rate_pct: float
    source: str
    effective_date: str  # ISO-8601; ordered lexicographically

    def __post_init__(self):
        if self.source not in RECORD_SOURCES:
            raise InputError(f"unknown record source {self.source!r}")
        if not np.isfinite(self.rate_pct):
            raise InputError("tariff rate must be finite")
        if self.rate_pct < 0:
            raise InputError(f"negative rate for {self.importer}->{self.exporter} "
                             f"{self.product_code} ({self.source})")


def load_tariff_records(path: str | Path) -> list[TariffRecord]:
    df = pd.read_csv(path, dtype={"importer": str, "exporter": str, "hs6": str,
                                  "source": str, "effective_date": str})
    required = ["importer", "exporter", "hs6", "rate_pct", "source", "effective_date"]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise InputError(f"tariff record file is missing columns {missing}")
    return [TariffRecord(r.importer, r.exporter, r.hs6, float(r.rate_pct),
                         r.source, r.effective_date)
            for r in df.itertuples(index=False)]


@dataclass(frozen=True)
class Concordance:
    """Pre-flattened product-code to sector map (single hop by construction)."""

    mapping: dict[str, str]

    @classmethod
    def from_csv(cls, path: str | Path) -> "Concordance":
        df = pd.read_csv(path, dtype={"hs6": str, "sector_id": str})
        if list(df.columns) != ["hs6", "sector_id"]:
            raise InputError(f"concordance must have columns hs6,sector_id, got {list(df.columns)}")
        dup = df[df.duplicated("hs6", keep=False)]
        if not dup.empty:
            conflicts = dup.groupby("hs6")["sector_id"].nunique()
            bad = sorted(conflicts[conflicts > 1].index)
            if bad:
                raise InputError(f"concordance maps codes to multiple sectors: {bad}")
        return cls(mapping=dict(zip(df["hs6"], df["sector_id"])))

    def resolve_all(self, records: list[TariffRecord]) -> dict[str, str]:
        unmapped = sorted({r.product_code for r in records} - set(self.mapping))
        if unmapped:
            raise InputError(f"unmapped product codes: {unmapped}")
        return self.mapping


@dataclass
class CleaningReport:
    negative_cells_floored: int = 0
    dropped_zero_rows: int = 0


def build_calibration(io: IoTable, tau0: TariffSchedule, theta,
                      tariffable, *, numeraire: str, kappa: float = 1.0,
                      report: CleaningReport | None = None) -> EconomyCalibration:
    """Assemble the model baseline from accounts, tariffs, and elasticities.

    Negative cells (common in raw MRIO releases) are floored at zero before
    any share is formed; the count lands in ``report``. Raises on share-sum
    violations that survive cleaning.
    """
    regions, sectors = io.regions, io.sectors
    n, s = len(regions), len(sectors)
    ridx = {r: k for k, r in enumerate(regions)}
    sidx = {c: k for k, c in enumerate(sectors)}
    report = report if report is not None else CleaningReport()

    flows = io.flows.copy()
    negatives = flows["value"] < 0
    report.negative_cells_floored = int(negatives.sum())
    flows.loc[negatives, "value"] = 0.0

    va = np.zeros((n, s))
    intermediates = np.zeros((n, s, s))      # M[i, k, s]: input k into sector s of region i
    final = np.zeros((n, s))                 # F[i, s] summed over origins (basic prices)
    bilateral = np.zeros((n, n, s))          # basic-price absorption of origin-j sector-s goods in i

    for row in flows.itertuples(index=False):
        value = float(row.value)
        if value == 0.0:
            continue
        dest = ridx[row.dest_region]
        if row.origin_kind == VA_KIND:
            if row.dest_use == FINAL_USE:
                raise InputError("value added cannot flow to final demand")
            if row.origin_region != row.dest_region:
                raise InputError("value added must originate in its own region")
            va[dest, sidx[row.dest_use]] += value
            continue
        origin = ridx[row.origin_region]
        kind = sidx[row.origin_kind]
        bilateral[dest, origin, kind] += value
        if row.dest_use == FINAL_USE:
            final[dest, kind] += value
        else:
            intermediates[dest, kind, sidx[row.dest_use]] += value

    gross_output = va + intermediates.sum(axis=1)
    if (va < 0).any():
        raise InputError("negative value added after cleaning")
    zero_out = gross_output <= 0
    if zero_out.any():
        cells = [(regions[i], sectors[k]) for i, k in np.argwhere(zero_out)]
        raise InputError(f"zero gross output at {cells}; cannot form production shares")

    gamma = va / gross_output
    gamma_io = intermediates / gross_output[:, None, :]

    final_totals = final.sum(axis=1)
    if (final_totals <= 0).any():
        bad = [regions[i] for i in np.flatnonzero(final_totals <= 0)]
        raise InputError(f"no final demand in regions {bad}")
    a = final / final_totals[:, None]

    if tau0.tau.shape != (n, n, s):
        raise InputError(f"baseline tariff shape {tau0.tau.shape} does not match "
                         f"accounts ({n}, {n}, {s})")
    tau = tau0.tau
    cross = ~np.eye(n, dtype=bool)
    purchaser = bilateral.copy()
    purchaser[cross, :] = bilateral[cross, :] * tau[cross, :]
    absorption = purchaser.sum(axis=1)
    zero_rows = absorption <= 0
    pi = np.zeros_like(purchaser)
    np.divide(purchaser, absorption[:, None, :], out=pi, where=~zero_rows[:, None, :])
    if zero_rows.any():
        # No expenditure at all: declare the row autarkic so shares still sum to 1.
        for i, k in np.argwhere(zero_rows):
            pi[i, i, k] = 1.0

    labor_income = va.sum(axis=1)
    # Net imports at tariff-exclusive prices; own flows cancel.
    deficits = bilateral.sum(axis=(1, 2)) - bilateral.sum(axis=(0, 2))

    try:
        return EconomyCalibration(
            regions=regions, sectors=sectors, tariffable=np.asarray(tariffable, dtype=bool),
            final_shares=a, va_shares=gamma, io_shares=gamma_io, trade_shares=pi,
            theta=np.asarray(theta, dtype=float), labor_income=labor_income,
            absorption=absorption, deficits=deficits, baseline_tariffs=tau,
            numeraire_region=ridx[numeraire], report_scale=kappa,
        )
    except CalibrationError as exc:
        raise InputError(f"calibration invariants violated: {exc}") from exc


def calibration_to_io_table(calib: EconomyCalibration) -> IoTable:
    """Implied long-format accounts of a calibration (exact at unit tariffs)."""
    from .synthetic import economy_to_io_rows

    rows = economy_to_io_rows(calib)
    flows = pd.DataFrame(rows, columns=["origin_region", "origin_kind",
                                        "dest_region", "dest_use", "value"])
    return IoTable(flows=flows, regions=calib.regions, sectors=calib.sectors)


# ---------------------------------------------------------------------------
# Tariff aggregation
# ---------------------------------------------------------------------------


def aggregate_tariffs(records: list[TariffRecord], conc: Concordance, date: str, *,
                      regions, sectors, tariffable, baseline_date: str = "2025-01-01",
                      label: str | None = None) -> TariffSchedule:
    """Sector-level gross tariff factors in force on ``date``.

    Product lines start at baseline-plus-trade-war rates. Where the tracker
    reports the pair-sector at the baseline date it replaces those lines
    wholesale; tracker actions dated after that (up to ``date``) then
    overwrite individual product lines chronologically. The sector rate is
    the simple average over surviving product lines; self flows and
    non-tariffable sectors are forced to a factor of one.
    """
    mapping = conc.resolve_all(records)
    ridx = {r: k for k, r in enumerate(regions)}
    sidx = {c: k for k, c in enumerate(sectors)}
    tariffable = np.asarray(tariffable, dtype=bool)

    for rec in records:
        if rec.importer not in ridx or rec.exporter not in ridx:
            raise InputError(f"record references unknown region "
                             f"{rec.importer!r}->{rec.exporter!r}")

    def sector_of(rec: TariffRecord) -> int:
        return sidx[mapping[rec.product_code]]

    # Reject conflicting same-date tracker rates for the same product line.
    tracker = [r for r in records if r.source == "tracker"]
    seen: dict[tuple, float] = {}
    for rec in tracker:
        key = (rec.importer, rec.exporter, rec.product_code, rec.effective_date)
        if key in seen and seen[key] != rec.rate_pct:
            raise InputError(f"conflicting tracker rates for {key}")
        seen[key] = rec.rate_pct

    # Baseline product lines: mean of duplicate baseline records per line,
    # plus the mean trade-war increase for that line.
    base_rates: dict[tuple, list[float]] = defaultdict(list)
    delta_rates: dict[tuple, list[float]] = defaultdict(list)
    for rec in records:
        line = (rec.importer, rec.exporter, rec.product_code)
        if rec.source == "baseline":
            base_rates[line].append(rec.rate_pct)
        elif rec.source == "tradewar-delta":
            delta_rates[line].append(rec.rate_pct)
    lines: dict[tuple, float] = {}
    for line in set(base_rates) | set(delta_rates):
        base = float(np.mean(base_rates[line])) if line in base_rates else 0.0
        delta = float(np.mean(delta_rates[line])) if line in delta_rates else 0.0
        lines[line] = base + delta

    # Tracker baseline-date coverage replaces whole pair-sector line sets.
    tracker_base = [r for r in tracker if r.effective_date == baseline_date]
    covered = {(r.importer, r.exporter, sector_of(r)) for r in tracker_base}
    if covered:
        lines = {line: rate for line, rate in lines.items()
                 if (line[0], line[1], sidx[mapping[line[2]]]) not in covered}
    for rec in tracker_base:
        lines[(rec.importer, rec.exporter, rec.product_code)] = rec.rate_pct

    # Chronological actions through the query date.
    actions = sorted((r for r in tracker
                      if baseline_date < r.effective_date <= date),
                     key=lambda r: (r.effective_date, r.importer, r.exporter, r.product_code))
    for rec in actions:
        lines[(rec.importer, rec.exporter, rec.product_code)] = rec.rate_pct

    n, s = len(regions), len(sectors)
    sums = np.zeros((n, n, s))
    counts = np.zeros((n, n, s))
    for (imp, exp, code), rate in lines.items():
        i, j, k = ridx[imp], ridx[exp], sidx[mapping[code]]
        sums[i, j, k] += rate
        counts[i, j, k] += 1.0
    tau = np.ones((n, n, s))
    has = counts > 0
    tau[has] = 1.0 + (sums[has] / counts[has]) / 100.0
    tau[np.arange(n), np.arange(n), :] = 1.0
    tau[:, :, ~tariffable] = 1.0
    return TariffSchedule(tau=tau, label=label if label is not None else f"tariffs@{date}",
                          date=date)


def tariff_shock(schedule_at_d: TariffSchedule, baseline: TariffSchedule) -> np.ndarray:
    """Elementwise gross-factor ratio of a dated schedule to the baseline."""
    if schedule_at_d.tau.shape != baseline.tau.shape:
        raise CalibrationError("schedule dimensions do not match")
    if (baseline.tau < 1.0).any():
        raise CalibrationError("baseline factors must be >= 1")
    return schedule_at_d.tau / baseline.tau
