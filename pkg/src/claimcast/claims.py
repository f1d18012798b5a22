"""From raw sales/claims records to fitted mean measures and moment grids.

The chain is: aggregate same-day claims per vehicle, convert claim dates to
age offsets clamped into [0, W], average the per-item point measures into
daily bins, fit a linear density plus end atoms, and finally tabulate the
per-sale-day mean and variance of rebate-weighted window claims.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import (
    EMPTY_MEASURE,
    ClaimsMeasure,
    MeanClaimsMeasure,
    RebateFunction,
    TimeHorizon,
    WeightedMeasure,
    mean_window_claims,
)
from .errors import DomainError

logger = logging.getLogger(__name__)

__all__ = [
    "ClaimRecord",
    "SalesRecord",
    "EmpiricalMeanMeasure",
    "MomentGrids",
    "aggregate_daily_claims",
    "build_claims_measures",
    "empirical_mean_measure",
    "fit_mean_measure",
    "moment_grids",
]


@dataclass(frozen=True)
class ClaimRecord:
    vehicle_id: str
    day: int
    amount: float = 0.0

    def __post_init__(self):
        if self.amount < 0.0:
            raise DomainError("claim amount must be non-negative")


@dataclass(frozen=True)
class SalesRecord:
    vehicle_id: str
    day: int


def aggregate_daily_claims(claims: Iterable[ClaimRecord]) -> List[ClaimRecord]:
    """Merge all of a vehicle's same-day claims into one record.

    A car returning with p claims on one date is treated as a single claim
    whose size is the sum of the p amounts.  Output is sorted by
    (vehicle_id, day) for a deterministic downstream order.
    """
    totals: Dict[Tuple[str, int], float] = {}
    for rec in claims:
        key = (rec.vehicle_id, rec.day)
        totals[key] = totals.get(key, 0.0) + rec.amount
    return [ClaimRecord(vid, day, amt) for (vid, day), amt in sorted(totals.items())]


@dataclass(frozen=True)
class BuiltMeasures:
    """Per-item claim-age measures plus the claims that referenced unknown items."""

    measures: Mapping[str, ClaimsMeasure]
    rejects: Tuple[ClaimRecord, ...] = ()

    @property
    def n(self) -> int:
        return len(self.measures)

    def values(self) -> List[ClaimsMeasure]:
        return list(self.measures.values())


def build_claims_measures(
    sales: Sequence[SalesRecord],
    claims: Sequence[ClaimRecord],
    horizon: TimeHorizon,
) -> BuiltMeasures:
    """Claim-age offsets per sold item, clamped into the warranty window.

    Offsets below 0 (claims honored before the recorded sale) become 0 and
    offsets beyond W (claims honored past warranty) become W.  Items with
    no claims map to the empty measure.  Claims whose vehicle_id has no
    sales record are quarantined in ``rejects`` rather than dropped.
    """
    w = horizon.warranty
    sale_day = {s.vehicle_id: s.day for s in sales}
    points: Dict[str, List[float]] = {}
    rejects: List[ClaimRecord] = []
    for rec in claims:
        sold = sale_day.get(rec.vehicle_id)
        if sold is None:
            rejects.append(rec)
            continue
        offset = min(max(rec.day - sold, 0), w)
        points.setdefault(rec.vehicle_id, []).append(float(offset))
    measures = {
        s.vehicle_id: ClaimsMeasure(tuple(points[s.vehicle_id]))
        if s.vehicle_id in points
        else EMPTY_MEASURE
        for s in sales
    }
    if rejects:
        logger.warning(
            "%d claim records reference unknown vehicles and were quarantined",
            len(rejects),
        )
    return BuiltMeasures(measures, tuple(rejects))


@dataclass(frozen=True)
class EmpiricalMeanMeasure:
    """Daily-binned average of the per-item measures: bin i holds the mean
    mass of ((i-1, i], with bin 0 the mass at age 0."""

    bins: np.ndarray
    n: int
    warranty: int

    def __post_init__(self):
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=float))
        if self.n < 1:
            raise DomainError("need at least one sold item")
        if self.bins.shape != (self.warranty + 1,):
            raise DomainError("expected one bin per day 0..W")
        if np.any(self.bins < 0.0):
            raise DomainError("bin masses must be non-negative")


def empirical_mean_measure(
    measures: Iterable[ClaimsMeasure], n: int, warranty: int
) -> EmpiricalMeanMeasure:
    """Average daily claim-age histogram over all n sold items.

    ``n`` counts every sold item, claim-free ones included; ``measures``
    may omit the empty ones.
    """
    if n < 1:
        raise DomainError("need at least one sold item")
    bins = np.zeros(warranty + 1)
    for m in measures:
        for p in m.points:
            idx = 0 if p <= 0.0 else int(np.ceil(p))
            bins[min(idx, warranty)] += 1.0
    return EmpiricalMeanMeasure(bins / n, n, warranty)


def fit_mean_measure(emp: EmpiricalMeanMeasure) -> MeanClaimsMeasure:
    """Linear density plus end atoms fitted to the daily bins.

    Interior bins satisfy m((i-1, i]) = a*i + (b - a/2) under the density
    a*x + b, so an ordinary least-squares line through bins 1..W-1 yields
    a from the slope and b from intercept + a/2.  The end bins are taken
    directly as the atom masses (the last bin's small density content is
    absorbed into the atom, matching how the bins are tallied).
    """
    w = emp.warranty
    if w < 3:
        raise DomainError("need at least two interior bins to fit")
    i = np.arange(1, w, dtype=float)
    slope, intercept = np.polyfit(i, emp.bins[1:w], 1)
    return MeanClaimsMeasure(
        slope=float(slope),
        intercept=float(intercept + slope / 2.0),
        atom0=float(emp.bins[0]),
        atomW=float(emp.bins[w]),
        warranty=w,
    )


@dataclass(frozen=True)
class MomentGrids:
    """Per-sale-day mean and variance of rebate-weighted window claims.

    ``days`` is the integer sale grid [-W+offset, T+offset]; ``mean`` is
    evaluated from the fitted measure, while the second moment behind
    ``var`` comes from the raw per-item measures.  Mixing the two can push
    the variance slightly negative; such entries are floored at zero and
    counted in ``floor_count``.
    """

    days: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    floor_count: int
    horizon: TimeHorizon
    rebate: RebateFunction

    def __post_init__(self):
        if np.any(self.mean < 0.0) or np.any(self.var < 0.0):
            raise DomainError("moment grids must be non-negative")


def _window_day_range(
    a: np.ndarray, b: np.ndarray, horizon: TimeHorizon
) -> Tuple[np.ndarray, np.ndarray]:
    """Integer sale days x whose claim window [lo(x), hi(x)] contains [a, b].

    The window contains [a, b] iff x >= offset - a and x <= T + offset - b,
    intersected with the sale grid.
    """
    t, o = horizon.period, horizon.offset
    start = np.maximum(np.ceil(o - a), -horizon.warranty + o)
    end = np.minimum(np.floor(t + o - b), t + o)
    return start.astype(np.int64), end.astype(np.int64)


def _accumulate_over_days(
    start: np.ndarray, end: np.ndarray, weight: np.ndarray, horizon: TimeHorizon
) -> np.ndarray:
    """Sum of weights over the day grid via a difference array."""
    days = horizon.sale_days
    size = len(days)
    first = days[0]
    acc = np.zeros(size + 1)
    keep = start <= end
    lo = start[keep] - first
    hi = end[keep] - first + 1
    np.add.at(acc, lo, weight[keep])
    np.add.at(acc, hi, -weight[keep])
    return np.cumsum(acc)[:size]


def moment_grids(
    measures: Iterable[ClaimsMeasure],
    fitted: Optional[MeanClaimsMeasure],
    rebate: RebateFunction,
    horizon: TimeHorizon,
    n: Optional[int] = None,
) -> MomentGrids:
    """Mean/variance grids of per-item window claims over sale days.

    The mean grid integrates the fitted measure over each day's window
    (if ``fitted`` is None it is tallied from the raw measures instead,
    which makes the variance non-negative by construction).  The second
    moment is always the raw per-item average of the squared weighted
    window totals, accumulated pairwise so the whole grid costs one pass
    over the claim pairs.
    """
    measures = list(measures)
    if n is None:
        n = len(measures)
    if n < 1:
        raise DomainError("need at least one sold item")
    days = horizon.sale_days

    pair_a: List[np.ndarray] = []
    pair_b: List[np.ndarray] = []
    pair_w: List[np.ndarray] = []
    single_p: List[np.ndarray] = []
    single_w: List[np.ndarray] = []
    for m in measures:
        if not m.points:
            continue
        pts = np.asarray(m.points)
        wts = np.atleast_1d(np.asarray(rebate(pts), dtype=float))
        single_p.append(pts)
        single_w.append(wts)
        pair_a.append(np.minimum.outer(pts, pts).ravel())
        pair_b.append(np.maximum.outer(pts, pts).ravel())
        pair_w.append(np.outer(wts, wts).ravel())

    if pair_a:
        a = np.concatenate(pair_a)
        b = np.concatenate(pair_b)
        wgt = np.concatenate(pair_w)
        start, end = _window_day_range(a, b, horizon)
        second = _accumulate_over_days(start, end, wgt, horizon) / n
    else:
        second = np.zeros(len(days))

    if fitted is not None:
        weighted = WeightedMeasure(fitted, rebate)
        mean = np.array([mean_window_claims(weighted, int(x), horizon) for x in days])
    elif single_p:
        p = np.concatenate(single_p)
        wgt = np.concatenate(single_w)
        start, end = _window_day_range(p, p, horizon)
        mean = _accumulate_over_days(start, end, wgt, horizon) / n
    else:
        mean = np.zeros(len(days))

    var = second - mean**2
    floored = int(np.sum(var < 0.0))
    if floored:
        logger.info(
            "floored %d negative variance entries (worst %.3e)",
            floored,
            float(var.min()),
        )
    return MomentGrids(
        days=days,
        mean=mean,
        var=np.maximum(var, 0.0),
        floor_count=floored,
        horizon=horizon,
        rebate=rebate,
    )
