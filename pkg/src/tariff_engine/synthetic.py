"""Deterministic synthetic economies and demo input files.

The engine's empirical inputs are proprietary, so tests and demos run on
synthetic calibrations. ``build_consistent_economy`` constructs economies
that satisfy every baseline identity exactly (goods-market, labor-market,
budget), which makes the identity counterfactual an exact fixed point.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import CalibrationError, EconomyCalibration

__all__ = [
    "build_consistent_economy",
    "two_region_one_sector",
    "three_region_two_sector",
    "symmetric_three_region",
    "synthetic_world",
    "write_demo_inputs",
]


def build_consistent_economy(regions, sectors, tariffable, pi, tau0, absorption,
                             theta, gamma_target, io_mix=None, *,
                             numeraire: int = 0, kappa: float = 1.0,
                             min_final_share: float = 0.05) -> EconomyCalibration:
    """Assemble a calibration whose baseline is an exact equilibrium.

    Gross output, tariff revenue, labor income, and deficits are derived from
    (absorption, trade shares, tariffs) so that all market-clearing and
    budget identities hold to machine precision. ``gamma_target`` is the
    desired value-added share per (region, sector); it is scaled up where
    needed so final demand keeps at least ``min_final_share`` of absorption.
    """
    pi = np.asarray(pi, dtype=np.float64)
    tau0 = np.asarray(tau0, dtype=np.float64)
    x = np.asarray(absorption, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    gamma = np.asarray(gamma_target, dtype=np.float64).copy()
    n, s = x.shape

    y = np.einsum("ijs,is->js", pi / tau0, x)
    revenue = np.einsum("ijs,is->i", (1.0 - 1.0 / tau0) * pi, x)

    if io_mix is None:
        tot = x.sum(axis=1)
        io_mix = np.repeat((x / tot[:, None])[:, :, None], s, axis=2)
    else:
        io_mix = np.asarray(io_mix, dtype=np.float64)
    mix_sums = io_mix.sum(axis=1)
    if not np.allclose(mix_sums, 1.0, atol=1e-12):
        raise CalibrationError("io_mix columns must sum to 1 over input sectors")

    gamma_io = (1.0 - gamma)[:, None, :] * io_mix
    intermediate = np.einsum("iks,is->ik", gamma_io, y)
    # Shrink intermediate use uniformly per region until final demand stays positive.
    cap = (1.0 - min_final_share) * x
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(intermediate > 0, cap / intermediate, np.inf)
    lam = np.minimum(1.0, ratios.min(axis=1))
    gamma = 1.0 - lam[:, None] * (1.0 - gamma)
    gamma_io = (1.0 - gamma)[:, None, :] * io_mix
    intermediate = np.einsum("iks,is->ik", gamma_io, y)

    final = x - intermediate
    if (final <= 0).any():
        raise CalibrationError("final demand turned non-positive; lower gamma_target")
    a = final / final.sum(axis=1)[:, None]
    labor_income = (gamma * y).sum(axis=1)
    deficits = final.sum(axis=1) - labor_income - revenue

    return EconomyCalibration(
        regions=tuple(regions), sectors=tuple(sectors),
        tariffable=np.asarray(tariffable, dtype=bool),
        final_shares=a, va_shares=gamma, io_shares=gamma_io,
        trade_shares=pi, theta=theta, labor_income=labor_income,
        absorption=x, deficits=deficits, baseline_tariffs=tau0,
        numeraire_region=numeraire, report_scale=kappa,
    )


def two_region_one_sector() -> EconomyCalibration:
    """Symmetric two-region, one-sector economy without input-output linkages.

    Home bias 0.8, trade elasticity 4, zero deficits, free-trade baseline.
    Used to cross-check the hat solver against a levels-based solver.
    """
    pi = np.array([[[0.8], [0.2]], [[0.2], [0.8]]])
    tau0 = np.ones((2, 2, 1))
    x = np.array([[100.0], [100.0]])
    return build_consistent_economy(
        regions=("USA", "FOR"), sectors=("GOODS",), tariffable=[True],
        pi=pi, tau0=tau0, absorption=x, theta=[4.0],
        gamma_target=np.ones((2, 1)),
    )


def three_region_two_sector(uniform_theta: float | None = None) -> EconomyCalibration:
    """Three regions, one tariffable goods sector plus a service sector.

    Open goods markets (moderate home bias) keep Laffer peaks inside the
    0-50 percent grid; services trade but cannot be tariffed. Input-output
    linkages are active in both sectors.
    """
    regions = ("USA", "PTR", "ROW")
    sectors = ("GOODS", "SRV")
    tariffable = [True, False]
    pi_goods = np.array([
        [0.38, 0.34, 0.28],
        [0.30, 0.44, 0.26],
        [0.26, 0.24, 0.50],
    ])
    pi_srv = np.array([
        [0.86, 0.07, 0.07],
        [0.08, 0.84, 0.08],
        [0.06, 0.06, 0.88],
    ])
    pi = np.stack([pi_goods, pi_srv], axis=2)
    tau0 = np.ones((3, 3, 2))
    off_diag = ~np.eye(3, dtype=bool)
    tau0[:, :, 0][off_diag] = 1.04
    x = np.array([[500.0, 420.0], [430.0, 350.0], [680.0, 560.0]])
    theta = np.array([3.2, 8.35]) if uniform_theta is None else np.full(2, float(uniform_theta))
    gamma = np.full((3, 2), 0.62)
    return build_consistent_economy(
        regions=regions, sectors=sectors, tariffable=tariffable,
        pi=pi, tau0=tau0, absorption=x, theta=theta, gamma_target=gamma,
    )


def symmetric_three_region() -> EconomyCalibration:
    """Home plus two interchangeable partners (swap-invariant calibration)."""
    regions = ("USA", "AAA", "BBB")
    sectors = ("GOODS",)
    pi = np.array([
        [[0.50], [0.25], [0.25]],
        [[0.22], [0.56], [0.22]],
        [[0.22], [0.22], [0.56]],
    ])
    tau0 = np.ones((3, 3, 1))
    x = np.array([[400.0], [300.0], [300.0]])
    return build_consistent_economy(
        regions=regions, sectors=sectors, tariffable=[True],
        pi=pi, tau0=tau0, absorption=x, theta=[4.0],
        gamma_target=np.ones((3, 1)),
    )


def synthetic_world(seed: int = 20250101, n_regions: int = 17,
                    n_tariffable: int = 10, n_services: int = 5) -> EconomyCalibration:
    """Randomized world-scale economy (17 regions x 15 sectors by default)."""
    rng = np.random.default_rng(seed)
    n = n_regions
    s = n_tariffable + n_services
    regions = tuple(f"R{i:02d}" for i in range(n))
    sectors = tuple([f"G{k:02d}" for k in range(n_tariffable)]
                    + [f"S{k:02d}" for k in range(n_services)])
    tariffable = np.array([True] * n_tariffable + [False] * n_services)

    pi = np.zeros((n, n, s))
    for k in range(s):
        own_lo, own_hi = (0.35, 0.7) if tariffable[k] else (0.8, 0.95)
        for i in range(n):
            own = rng.uniform(own_lo, own_hi)
            rest = rng.dirichlet(np.ones(n - 1)) * (1.0 - own)
            row = np.insert(rest, i, own)
            pi[i, :, k] = row

    tau0 = np.ones((n, n, s))
    off = ~np.eye(n, dtype=bool)
    for k in range(n_tariffable):
        tau0[:, :, k][off] = 1.0 + rng.uniform(0.0, 0.08, size=off.sum())

    x = rng.uniform(50.0, 500.0, size=(n, s))
    theta = np.concatenate([rng.uniform(2.5, 9.0, size=n_tariffable),
                            np.full(n_services, 8.35)])
    gamma = rng.uniform(0.45, 0.75, size=(n, s))
    mix = rng.dirichlet(np.ones(s), size=(n, s)).transpose(0, 2, 1)
    return build_consistent_economy(
        regions=regions, sectors=sectors, tariffable=tariffable,
        pi=pi, tau0=tau0, absorption=x, theta=theta,
        gamma_target=gamma, io_mix=mix,
    )


# ---------------------------------------------------------------------------
# Demo input files for the CLI (IO table, tariff records, concordance, config)
# ---------------------------------------------------------------------------

_DEMO_HS6 = {
    "GOODS": ("100110", "100190", "840731"),
}


def demo_economy() -> EconomyCalibration:
    """Free-trade-baseline variant of the three-region economy.

    With unit baseline tariffs, basic and purchaser prices coincide, so a
    round trip through the IO-table CSV reproduces the calibration exactly.
    """
    base = three_region_two_sector()
    tau0 = np.ones_like(base.baseline_tariffs)
    return build_consistent_economy(
        regions=base.regions, sectors=base.sectors, tariffable=base.tariffable,
        pi=base.trade_shares, tau0=tau0, absorption=base.absorption,
        theta=base.theta, gamma_target=base.va_shares, io_mix=None,
    )


def economy_to_io_rows(calib: EconomyCalibration) -> list[tuple[str, str, str, str, float]]:
    """Long-format basic-price flow records implied by a calibration.

    Intermediate and final demand are split across origins with the same
    sourcing shares as total absorption. Only exact for unit baseline
    tariffs, where basic and purchaser prices coincide.
    """
    rows: list[tuple[str, str, str, str, float]] = []
    y = calib.gross_output()
    intermediate = np.einsum("iks,is->ik", calib.io_shares, y)
    final = calib.absorption - intermediate
    basic_flow = calib.trade_shares / calib.baseline_tariffs  # per unit of absorption
    for i, dest in enumerate(calib.regions):
        for si, sec in enumerate(calib.sectors):
            va = calib.va_shares[i, si] * y[i, si]
            if va > 0:
                rows.append((dest, "VA", dest, sec, float(va)))
        for k, kind in enumerate(calib.sectors):
            split = basic_flow[i, :, k] / basic_flow[i, :, k].sum()
            for si, sec in enumerate(calib.sectors):
                use = calib.io_shares[i, k, si] * y[i, si]
                if use <= 0:
                    continue
                for j, origin in enumerate(calib.regions):
                    v = use * split[j]
                    if v > 0:
                        rows.append((origin, kind, dest, sec, float(v)))
            if final[i, k] > 0:
                for j, origin in enumerate(calib.regions):
                    v = final[i, k] * split[j]
                    if v > 0:
                        rows.append((origin, kind, dest, "FINAL", float(v)))
    return rows


def write_demo_inputs(out_dir: str | Path) -> dict[str, Path]:
    """Write a self-contained demo input set for the command-line interface.

    Produces an internally consistent IO table, a product-level tariff
    record file covering all three sources, a concordance, and a model
    configuration. Returns the paths keyed by role.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    calib = demo_economy()

    io_path = out / "io_table.csv"
    lines = ["origin_region,origin_kind,dest_region,dest_use,value"]
    for origin, kind, dest, use, value in economy_to_io_rows(calib):
        lines.append(f"{origin},{kind},{dest},{use},{value!r}")
    io_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    conc_path = out / "concordance.csv"
    conc_lines = ["hs6,sector_id"]
    for sector, codes in _DEMO_HS6.items():
        conc_lines.extend(f"{code},{sector}" for code in codes)
    conc_path.write_text("\n".join(conc_lines) + "\n", encoding="utf-8")

    rec_path = out / "tariff_records.csv"
    rec_lines = ["importer,exporter,hs6,rate_pct,source,effective_date"]
    records = [
        # MacMap-style baseline rates.
        ("USA", "PTR", "100110", 4.0, "baseline", "2025-01-01"),
        ("USA", "PTR", "100190", 6.0, "baseline", "2025-01-01"),
        ("USA", "ROW", "100110", 3.0, "baseline", "2025-01-01"),
        ("PTR", "USA", "100110", 5.0, "baseline", "2025-01-01"),
        ("ROW", "USA", "100190", 2.0, "baseline", "2025-01-01"),
        # Earlier trade-war increases on one pair.
        ("USA", "PTR", "100110", 10.0, "tradewar-delta", "2025-01-01"),
        # Tracker baseline replaces the pair-sector where present.
        ("USA", "ROW", "100110", 8.0, "tracker", "2025-01-01"),
        # Implemented actions through the year, applied chronologically.
        ("USA", "PTR", "100110", 25.0, "tracker", "2025-03-04"),
        ("USA", "PTR", "100190", 25.0, "tracker", "2025-03-04"),
        ("PTR", "USA", "100110", 18.0, "tracker", "2025-04-12"),
        ("USA", "PTR", "100110", 35.0, "tracker", "2025-08-18"),
        ("USA", "ROW", "100110", 12.0, "tracker", "2025-08-18"),
    ]
    for imp, exp, hs6, rate, source, date in records:
        rec_lines.append(f"{imp},{exp},{hs6},{rate!r},{source},{date}")
    rec_path.write_text("\n".join(rec_lines) + "\n", encoding="utf-8")

    cfg_path = out / "model_config.yaml"
    cfg_lines = [
        "regions: [USA, PTR, ROW]",
        "numeraire: USA",
        "sectors:",
    ]
    for si, sec in enumerate(calib.sectors):
        flag = "true" if calib.tariffable[si] else "false"
        cfg_lines.append(f"  - {{id: {sec}, tariffable: {flag}, theta: {float(calib.theta[si])!r}}}")
    cfg_lines += [
        "kappa: 1.0",
        "baseline_date: '2025-01-01'",
    ]
    cfg_path.write_text("\n".join(cfg_lines) + "\n", encoding="utf-8")

    return {"io_table": io_path, "concordance": conc_path,
            "tariff_records": rec_path, "model_config": cfg_path}


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "demo_inputs"
    paths = write_demo_inputs(target)
    for role, path in sorted(paths.items()):
        print(f"{role}: {path}")
