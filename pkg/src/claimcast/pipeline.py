"""End-to-end orchestration: records in, fitted parameters and quantile
tables out.

The pipeline mirrors the estimation procedure end to end: anchor the
clock, fit the sales curve and its fluctuation limit, fit the mean claims
measure, diagnose the claim-size tail, assemble the limit parameters per
forecast window and evaluate the distributional approximations.  Identical
config and inputs produce byte-identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import claims as claims_mod
from . import dataio
from .claims import ClaimRecord, SalesRecord
from .core import MeanClaimsMeasure, RebateFunction, TimeHorizon
from .engine import (
    LimitParams,
    approx_cdf,
    approx_quantile,
    claims_count_approx,
    compute_rate_constants,
    cost_approx_normal,
    cost_approx_prorata,
    cost_approx_stable_finite_mean,
    cost_approx_stable_infinite_mean,
    extremeness,
    fluctuation_moments,
)
from .errors import DomainError
from .sales import (
    assemble_fluctuation,
    compute_residuals,
    decompose_residuals,
    fit_bass,
    window_increment_moments,
)
from .tails import Regime, diagnose, tail_scalers

QUANTILE_LEVELS = (0.5, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99)

__all__ = ["RunConfig", "Report", "run_pipeline", "synthesize_dataset"]


@dataclass(frozen=True)
class RunConfig:
    """Pipeline knobs; defaults follow the car-study setup."""

    warranty: int = 1096
    period: int = 91
    periods: Tuple[int, ...] = (0, 1)  # window k covers [kT, (k+1)T]
    n_policy: str = "observed_total"
    n_explicit: Optional[int] = None
    policy: str = "free_replacement"  # or "prorata"
    rebate_kind: str = "linear"  # pro-rata schedule shape
    unit_price: float = 1.0
    qq_k: int = 5000
    ma_window: int = 15
    poly_degree: int = 3
    stationary: bool = False
    regime_override: Optional[str] = None
    seed: int = 0
    reps: int = 2000
    workers: int = 1

    def __post_init__(self):
        if self.n_policy not in ("observed_total", "explicit"):
            raise DomainError(f"unknown n policy {self.n_policy!r}")
        if self.n_policy == "explicit" and not self.n_explicit:
            raise DomainError("explicit n policy needs n_explicit")
        if self.policy not in ("free_replacement", "prorata"):
            raise DomainError(f"unknown policy {self.policy!r}")
        if self.policy == "prorata" and self.rebate_kind not in (
            "linear",
            "quadratic",
            "free_replacement",
        ):
            raise DomainError(f"unsupported rebate kind {self.rebate_kind!r}")
        if any(k not in (0, 1) for k in self.periods):
            raise DomainError("periods must be drawn from {0, 1}")

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def rebate(self) -> RebateFunction:
        if self.policy == "free_replacement":
            return RebateFunction.free_replacement(self.warranty)
        if self.rebate_kind == "linear":
            return RebateFunction.linear(self.warranty, self.unit_price)
        if self.rebate_kind == "quadratic":
            return RebateFunction.quadratic(self.warranty, self.unit_price)
        return RebateFunction("free_replacement", self.warranty, self.unit_price)


@dataclass(frozen=True)
class PeriodResult:
    offset: int
    limits: LimitParams
    quantiles: Dict[str, Dict[float, float]]
    sanity: Dict[str, float]


@dataclass(frozen=True)
class Report:
    """Everything the pipeline estimated, plus provenance."""

    config_digest: str
    seed: int
    n: int
    anchor: int
    bass_p: float
    bass_q: float
    mean_measure: MeanClaimsMeasure
    tail_alpha: Optional[float]
    tail_regime: Optional[str]
    size_mean: Optional[float]
    size_variance: Optional[float]
    rejected_claims: int
    variance_floor_count: int
    periods: Tuple[PeriodResult, ...]

    def to_payload(self) -> dict:
        payload = {
            "provenance": {
                "config": self.config_digest,
                "seed": self.seed,
            },
            "n": self.n,
            "anchor": self.anchor,
            "sales_curve": {"p": self.bass_p, "q": self.bass_q},
            "mean_measure": {
                "slope": self.mean_measure.slope,
                "intercept": self.mean_measure.intercept,
                "atom0": self.mean_measure.atom0,
                "atomW": self.mean_measure.atomW,
            },
            "tail": {
                "alpha": self.tail_alpha,
                "regime": self.tail_regime,
                "size_mean": self.size_mean,
                "size_variance": self.size_variance,
            },
            "rejected_claims": self.rejected_claims,
            "variance_floor_count": self.variance_floor_count,
            "periods": [],
        }
        for res in self.periods:
            payload["periods"].append(
                {
                    "offset": res.offset,
                    "limits": {
                        "claims_mean": res.limits.claims_mean,
                        "claims_var": res.limits.claims_var,
                        "fluct_mean": res.limits.fluct_mean,
                        "fluct_var": res.limits.fluct_var,
                    },
                    "quantiles": {
                        kind: {str(p): q for p, q in column.items()}
                        for kind, column in res.quantiles.items()
                    },
                    "sanity": res.sanity,
                }
            )
        return payload

    def to_text(self) -> str:
        lines = [
            "warranty cost forecast",
            "======================",
            f"config {self.config_digest}  seed {self.seed}",
            f"items sold (n): {self.n}; clock anchored at raw day {self.anchor}",
            f"sales curve: p={self.bass_p:.6e}  q={self.bass_q:.6e}",
            (
                "mean claims measure: "
                f"slope={self.mean_measure.slope:.6e} "
                f"intercept={self.mean_measure.intercept:.6e} "
                f"atom0={self.mean_measure.atom0:.4f} "
                f"atomW={self.mean_measure.atomW:.4f}"
            ),
        ]
        if self.tail_alpha is not None:
            lines.append(
                f"claim sizes: mean={self.size_mean:.2f} "
                f"variance={self.size_variance:.2f} "
                f"tail index={self.tail_alpha:.2f} regime={self.tail_regime}"
            )
        if self.rejected_claims:
            lines.append(f"quarantined claims (unknown vehicles): {self.rejected_claims}")
        for res in self.periods:
            t = res.limits.horizon.period
            lo, hi = res.offset, res.offset + t
            lines.append("")
            lines.append(f"period [{lo}, {hi}]")
            lines.append(
                "  limits: "
                f"c1={res.limits.claims_mean:.4f} c2={res.limits.claims_var:.4f} "
                f"fluct mean={res.limits.fluct_mean:.4f} "
                f"fluct var={res.limits.fluct_var:.4f}"
            )
            kinds = sorted(res.quantiles)
            header = "  p      " + "  ".join(f"{k:>14s}" for k in kinds)
            lines.append(header)
            for p in QUANTILE_LEVELS:
                cells = []
                for kind in kinds:
                    q = res.quantiles[kind].get(p)
                    cells.append(f"{q:14,.2f}" if q is not None else " " * 14)
                lines.append(f"  {p:4.2f}   " + "  ".join(cells))
            for key in sorted(res.sanity):
                lines.append(f"  {key}: {res.sanity[key]:.4f}")
        return "\n".join(lines) + "\n"


def _daily_counts(sales: Sequence[SalesRecord]) -> Tuple[np.ndarray, int]:
    days = np.array([s.day for s in sales])
    first = int(days.min())
    counts = np.bincount(days - first, minlength=int(days.max()) - first + 1)
    return counts.astype(float), first


def realized_window_totals(
    sales: Sequence[SalesRecord],
    aggregated_claims: Sequence[ClaimRecord],
    horizon: TimeHorizon,
) -> Tuple[int, float]:
    """Actual claim count and cost that landed in the forecast window."""
    sold = {s.vehicle_id: s.day for s in sales}
    o, t, w = horizon.offset, horizon.period, horizon.warranty
    count = 0
    cost = 0.0
    for rec in aggregated_claims:
        day0 = sold.get(rec.vehicle_id)
        if day0 is None:
            continue
        age = min(max(rec.day - day0, 0), w)
        if o <= day0 + age <= t + o:
            count += 1
            cost += rec.amount
    return count, cost


def run_pipeline(
    config: RunConfig,
    sales: Sequence[SalesRecord],
    claims: Sequence[ClaimRecord],
    out_dir: Optional[Path] = None,
) -> Report:
    """Full estimation: sales curve, fluctuation limit, mean measure, tail
    diagnosis, limit parameters and quantiles per requested period.

    All claims present in the input participate in estimating the mean
    measure (as in the study the defaults mirror); claims falling inside a
    forecast window additionally feed that window's sanity-check block.
    """
    if not sales:
        raise DomainError("no sales records")
    sales, claims, anchor = dataio.anchor_day_zero(sales, claims)
    n = len(sales) if config.n_policy == "observed_total" else int(config.n_explicit)
    rebate = config.rebate()

    aggregated = claims_mod.aggregate_daily_claims(claims)
    base_horizon = TimeHorizon(config.warranty, config.period, 0, n)
    built = claims_mod.build_claims_measures(sales, aggregated, base_horizon)
    emp = claims_mod.empirical_mean_measure(
        built.measures.values(), n, config.warranty
    )
    fitted = claims_mod.fit_mean_measure(emp)

    counts, first_day = _daily_counts(sales)
    bass = fit_bass(counts, n, first_day)
    resid = compute_residuals(counts, first_day, bass)
    decomposition = decompose_residuals(
        resid, first_day, halfwidth=config.ma_window, stationary=config.stationary
    )

    sizes = np.array([c.amount for c in aggregated if c.vehicle_id in built.measures])
    tail = None
    if config.policy == "free_replacement":
        override = config.regime_override == "finite_variance"
        tail = diagnose(sizes, config.qq_k, finite_variance_override=override)

    period_results = []
    floor_total = 0
    for k in sorted(set(config.periods)):
        offset = k * config.period
        horizon = TimeHorizon(config.warranty, config.period, offset, n)
        grids = claims_mod.moment_grids(
            built.measures.values(), fitted, rebate, horizon, n=n
        )
        floor_total += grids.floor_count
        c1, c2 = compute_rate_constants(grids, bass)
        limit = assemble_fluctuation(decomposition, horizon, config.poly_degree)
        chi_mean, chi_cov = window_increment_moments(limit, horizon)
        mu_t, sig2_t = fluctuation_moments(chi_mean, chi_cov, fitted, rebate)
        lp = LimitParams(c1, c2, mu_t, sig2_t, horizon)

        quantiles: Dict[str, Dict[float, float]] = {}
        approxes = {}
        if config.policy == "prorata":
            approxes["prorata"] = cost_approx_prorata(lp, config.unit_price)
        else:
            wants_normal = tail.regime in (Regime.FINITE_VARIANCE, Regime.STABLE_1_2)
            if wants_normal:
                approxes["normal"] = cost_approx_normal(lp, tail.mean, tail.variance)
            if tail.regime is Regime.STABLE_1_2:
                sc = tail_scalers(tail.alpha_hat, n, tail.regime)
                approxes["stable"] = cost_approx_stable_finite_mean(
                    lp, tail.mean, tail.alpha_hat, sc.b_n
                )
            elif tail.regime in (Regime.STABLE_0_1, Regime.STABLE_EQ_1):
                alpha = 1.0 if tail.regime is Regime.STABLE_EQ_1 else tail.alpha_hat
                sc = tail_scalers(alpha, n, tail.regime)
                approxes["stable"] = cost_approx_stable_infinite_mean(
                    lp, alpha, sc.b_n, sc.e_n
                )
        for kind, approx in approxes.items():
            quantiles[kind] = {p: approx_quantile(approx, p) for p in QUANTILE_LEVELS}

        sanity: Dict[str, float] = {}
        actual_count, actual_cost = realized_window_totals(sales, aggregated, horizon)
        if actual_count > 0:
            count_cdf = approx_cdf(claims_count_approx(lp), actual_count)
            sanity["actual_count"] = float(actual_count)
            sanity["count_cdf"] = count_cdf
            sanity["count_extremeness"] = extremeness(count_cdf)
            sanity["actual_cost"] = actual_cost
            for kind, approx in approxes.items():
                cost_cdf = approx_cdf(approx, actual_cost)
                sanity[f"cost_cdf_{kind}"] = cost_cdf
                sanity[f"cost_extremeness_{kind}"] = extremeness(cost_cdf)
        period_results.append(PeriodResult(offset, lp, quantiles, sanity))

    report = Report(
        config_digest=config.digest(),
        seed=config.seed,
        n=n,
        anchor=anchor,
        bass_p=bass.p,
        bass_q=bass.q,
        mean_measure=fitted,
        tail_alpha=tail.alpha_hat if tail else None,
        tail_regime=tail.regime.value if tail else None,
        size_mean=tail.mean if tail else None,
        size_variance=tail.variance if tail else None,
        rejected_claims=len(built.rejects),
        variance_floor_count=floor_total,
        periods=tuple(period_results),
    )

    if out_dir is not None:
        _emit_artifacts(
            Path(out_dir), report, config, emp, fitted, decomposition, bass,
            counts, first_day, sizes, tail,
        )
    return report


def _emit_artifacts(
    out_dir: Path,
    report: Report,
    config: RunConfig,
    emp,
    fitted: MeanClaimsMeasure,
    decomposition,
    bass,
    counts: np.ndarray,
    first_day: int,
    sizes: np.ndarray,
    tail,
) -> None:
    """Report files plus the plot-data series behind every figure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.to_text())
    dataio.write_json_report(report.to_payload(), out_dir / "report.json")

    ages = np.arange(config.warranty + 1)
    dataio.write_series(
        out_dir / "mean_measure_bins.csv", "age", ages, "mass", emp.bins
    )
    dataio.write_series(
        out_dir / "mean_measure_fit.csv", "age", ages, "mass", fitted.bin_masses()
    )
    days = first_day + np.arange(len(counts))
    dataio.write_series(out_dir / "daily_sales.csv", "day", days, "count", counts)
    fit_curve = bass.n * (bass.share(days) - bass.share(days - 1))
    dataio.write_series(out_dir / "sales_fit.csv", "day", days, "count", fit_curve)
    dataio.write_series(
        out_dir / "residuals.csv",
        "day",
        decomposition.days,
        "std_resid",
        decomposition.std_resid,
    )
    if tail is not None and len(sizes) >= 2:
        hist, edges = np.histogram(sizes, bins=min(200, max(10, len(sizes) // 50)),
                                   density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        dataio.write_series(
            out_dir / "size_density.csv", "size", centers, "density", hist
        )
        from .tails import qq_plot_data

        pts = qq_plot_data(sizes, min(tail.k, len(sizes)))
        dataio.write_series(
            out_dir / "size_qq.csv",
            "exp_quantile",
            pts[:, 0],
            "log_order_stat",
            pts[:, 1],
        )


def synthesize_dataset(
    out_sales,
    out_claims,
    n: int = 2000,
    warranty: int = 200,
    period: int = 30,
    span: int = 240,
    bass_p: float = 2e-3,
    bass_q: float = 2.5e-2,
    density_slope: float = -0.5e-5,
    density_intercept: float = 5e-3,
    atom0: float = 0.1,
    atomW: float = 0.04,
    size_mu_log: float = 3.0,
    size_sigma_log: float = 1.0,
    seed: int = 0,
) -> Tuple[int, int]:
    """Write a synthetic sales/claims CSV pair shaped like the car study.

    Sales follow a Bass-curve Poisson process over ``span`` days of raw
    dates 1..span; each car gets a Poisson claims measure (linear density
    with end atoms) and lognormal claim amounts.  Returns the number of
    sales and claim rows written.
    """
    from .sales import BassParams
    from .sim import LognormalSizes, PoissonClaims, make_rng

    rng = make_rng(seed)
    curve = BassParams(p=bass_p, q=bass_q, n=n, origin=0)
    share = curve.share(np.arange(span + 1, dtype=float))
    weights = np.diff(share)
    weights = weights / weights.sum()
    sale_days = 1 + rng.choice(span, size=n, p=weights)
    claims_law = PoissonClaims(
        MeanClaimsMeasure(
            density_slope, density_intercept, atom0, atomW, warranty
        )
    )
    size_law = LognormalSizes(size_mu_log, size_sigma_log)

    out_sales = Path(out_sales)
    out_claims = Path(out_claims)
    out_sales.parent.mkdir(parents=True, exist_ok=True)
    out_claims.parent.mkdir(parents=True, exist_ok=True)
    claim_rows = 0
    with out_sales.open("w", newline="") as sf, out_claims.open(
        "w", newline=""
    ) as cf:
        sw = csv.writer(sf)
        cw = csv.writer(cf)
        sw.writerow(["vehicle_id", "sale_date"])
        cw.writerow(["vehicle_id", "claim_date", "claim_id", "amount"])
        for i in range(n):
            vid = f"V{i:06d}"
            sw.writerow([vid, int(sale_days[i])])
            measure = claims_law.sample(rng)
            if not measure.points:
                continue
            amounts = size_law.sample(rng, len(measure.points))
            for age, amount in zip(measure.points, amounts):
                claim_rows += 1
                cw.writerow(
                    [
                        vid,
                        int(sale_days[i] + round(age)),
                        f"C{claim_rows:07d}",
                        f"{float(amount):.2f}",
                    ]
                )
    return n, claim_rows
