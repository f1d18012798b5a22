import numpy as np
import pytest

from claimcast.claims import (
    ClaimRecord,
    SalesRecord,
    aggregate_daily_claims,
    build_claims_measures,
    empirical_mean_measure,
    fit_mean_measure,
    moment_grids,
)
from claimcast.core import ClaimsMeasure, MeanClaimsMeasure, RebateFunction, TimeHorizon
from claimcast.errors import DomainError, ValidationError

W, T = 1096, 91
HORIZON = TimeHorizon(W, T)
FREE = RebateFunction.free_replacement(W)


class TestAggregateDailyClaims:
    def test_same_day_amounts_merge(self):
        recs = [
            ClaimRecord("V", -5, 10.0),
            ClaimRecord("V", -5, 5.0),
            ClaimRecord("V", -5, 2.0),
        ]
        assert aggregate_daily_claims(recs) == [ClaimRecord("V", -5, 17.0)]

    def test_distinct_days_untouched(self):
        recs = [ClaimRecord("V", -9, 10.0), ClaimRecord("V", -3, 5.0)]
        assert aggregate_daily_claims(recs) == recs

    def test_empty(self):
        assert aggregate_daily_claims([]) == []


class TestBuildClaimsMeasures:
    def test_offsets_are_age_differences(self):
        sales = [SalesRecord("A", -1000)]
        claims = [ClaimRecord("A", -995, 1.0), ClaimRecord("A", -500, 1.0)]
        built = build_claims_measures(sales, claims, HORIZON)
        assert built.measures["A"].points == (5.0, 500.0)
        assert built.rejects == ()

    def test_clamping_at_both_ends(self):
        sales = [SalesRecord("A", -10), SalesRecord("B", -1100)]
        claims = [ClaimRecord("A", -20, 1.0), ClaimRecord("B", 50, 1.0)]
        built = build_claims_measures(sales, claims, HORIZON)
        assert built.measures["A"].points == (0.0,)  # honored before the sale
        assert built.measures["B"].points == (float(W),)  # past warranty
        assert built.measures["A"].count_in(0, W) == 1

    def test_unknown_vehicle_quarantined(self):
        sales = [SalesRecord("A", -10)]
        claims = [ClaimRecord("GHOST", -5, 2.0), ClaimRecord("A", -5, 1.0)]
        built = build_claims_measures(sales, claims, HORIZON)
        assert len(built.rejects) == 1
        assert built.rejects[0].vehicle_id == "GHOST"

    def test_claim_free_items_get_empty_measures(self):
        sales = [SalesRecord("A", -10), SalesRecord("B", -20)]
        built = build_claims_measures(sales, [ClaimRecord("A", -5, 1.0)], HORIZON)
        assert built.measures["B"].total == 0
        assert built.n == 2

    def test_claim_count_conserved(self):
        rng = np.random.default_rng(11)
        sales = [SalesRecord(f"v{i}", int(d)) for i, d in
                 enumerate(rng.integers(-W, 0, size=40))]
        claims = []
        for _ in range(200):
            vid = f"v{rng.integers(0, 50)}"  # some ids unknown
            claims.append(ClaimRecord(vid, int(rng.integers(-W, T)), 1.0))
        built = build_claims_measures(sales, claims, HORIZON)
        kept = sum(m.total for m in built.measures.values())
        assert kept + len(built.rejects) == len(claims)
        known = {s.vehicle_id for s in sales}
        assert kept == sum(1 for c in claims if c.vehicle_id in known)


class TestEmpiricalMeanMeasure:
    def test_all_empty(self):
        emp = empirical_mean_measure([ClaimsMeasure()] * 3, 3, W)
        assert np.all(emp.bins == 0.0)

    def test_hand_count(self):
        emp = empirical_mean_measure(
            [ClaimsMeasure((1,)), ClaimsMeasure((1, 1))], 2, W
        )
        assert emp.bins[1] == pytest.approx(1.5)
        assert np.sum(emp.bins) == pytest.approx(1.5)

    def test_end_bins_capture_atoms(self):
        emp = empirical_mean_measure(
            [ClaimsMeasure((0, W)), ClaimsMeasure((0,))], 4, W
        )
        assert emp.bins[0] == pytest.approx(0.5)
        assert emp.bins[W] == pytest.approx(0.25)

    def test_zero_items_rejected(self):
        with pytest.raises(DomainError):
            empirical_mean_measure([], 0, W)


class TestFitMeanMeasure:
    def test_flat_bins(self):
        from claimcast.claims import EmpiricalMeanMeasure

        c = 3.7e-4
        bins = np.full(W + 1, c)
        bins[0] = bins[W] = 0.0
        fit = fit_mean_measure(EmpiricalMeanMeasure(bins, 10, W))
        assert fit.slope == pytest.approx(0.0, abs=1e-18)
        assert fit.intercept == pytest.approx(c, rel=1e-12)
        assert fit.atom0 == 0.0 and fit.atomW == 0.0

    def test_noiseless_line_recovered(self):
        from claimcast.claims import EmpiricalMeanMeasure

        a, b = -0.9e-6, 1.5e-3
        i = np.arange(0, W + 1, dtype=float)
        bins = a * i + b - a / 2.0
        bins[0] = 0.2
        bins[W] = 0.05
        fit = fit_mean_measure(EmpiricalMeanMeasure(bins, 10, W))
        assert fit.slope == pytest.approx(a, rel=1e-12)
        assert fit.intercept == pytest.approx(b, rel=1e-12)
        assert fit.atom0 == pytest.approx(0.2)
        assert fit.atomW == pytest.approx(bins[W])

    def test_negative_fitted_density_raises(self):
        from claimcast.claims import EmpiricalMeanMeasure

        i = np.arange(0, W + 1, dtype=float)
        bins = np.maximum(-2e-6 * i + 1e-4, 0.0)  # line goes negative inside (0, W)
        with pytest.raises(ValidationError):
            fit_mean_measure(EmpiricalMeanMeasure(bins, 10, W))


def grid_oracle(measure_list, rebate, horizon, n):
    """Literal per-day evaluation of the defining sums (slow, independent)."""
    days = horizon.sale_days
    first = np.zeros(len(days))
    second = np.zeros(len(days))
    for k, x in enumerate(days):
        win = horizon.claim_window(int(x))
        for m in measure_list:
            tot = sum(
                float(rebate(p)) for p in m.points if win.lo <= p <= win.hi
            )
            first[k] += tot
            second[k] += tot * tot
    return first / n, second / n


class TestMomentGrids:
    def test_mean_vanishes_in_empty_window(self):
        fitted = MeanClaimsMeasure(0.0, 1e-3, atom0=0.0, atomW=0.1, warranty=W)
        grids = moment_grids([], fitted, FREE, HORIZON, n=5)
        assert grids.mean[-1] == pytest.approx(0.0)  # x = T: window [0, 0], no atom

    def test_two_item_toy_variance(self):
        # second moment (1/2)(1^2) = 0.5, mean 0.5, variance 0.25 at x = 0
        grids = moment_grids(
            [ClaimsMeasure((5,)), ClaimsMeasure()], None, FREE, HORIZON, n=2
        )
        at0 = np.where(grids.days == 0)[0][0]
        assert grids.mean[at0] == pytest.approx(0.5)
        assert grids.var[at0] == pytest.approx(0.25)

    def test_matches_defining_sums_free_replacement(self):
        rng = np.random.default_rng(23)
        h = TimeHorizon(40, 12)
        measures = [
            ClaimsMeasure(tuple(rng.uniform(0, 40, size=rng.integers(0, 5))))
            for _ in range(30)
        ]
        rebate = RebateFunction.free_replacement(40)
        grids = moment_grids(measures, None, rebate, h, n=30)
        mean_ref, second_ref = grid_oracle(measures, rebate, h, 30)
        assert np.allclose(grids.mean, mean_ref, atol=1e-12)
        assert np.allclose(grids.var, second_ref - mean_ref**2, atol=1e-10)
        assert grids.floor_count == 0

    def test_matches_defining_sums_prorata_with_offset(self):
        rng = np.random.default_rng(29)
        h = TimeHorizon(40, 12, offset=12)
        measures = [
            ClaimsMeasure(tuple(rng.uniform(0, 40, size=rng.integers(0, 4))))
            for _ in range(25)
        ]
        rebate = RebateFunction.linear(40)
        grids = moment_grids(measures, None, rebate, h, n=25)
        mean_ref, second_ref = grid_oracle(measures, rebate, h, 25)
        assert np.allclose(grids.mean, mean_ref, atol=1e-12)
        assert np.allclose(grids.var, second_ref - mean_ref**2, atol=1e-10)

    def test_empirical_variance_never_floored(self):
        rng = np.random.default_rng(31)
        measures = [
            ClaimsMeasure(tuple(rng.uniform(0, W, size=rng.integers(0, 4))))
            for _ in range(40)
        ]
        grids = moment_grids(measures, None, FREE, HORIZON, n=40)
        assert grids.floor_count == 0
        assert np.all(grids.var >= 0.0)

    def test_fitted_mean_flooring_counted(self):
        # fitted mean larger than any raw second moment forces flooring
        fitted = MeanClaimsMeasure(0.0, 5e-3, atom0=0.5, atomW=0.5, warranty=W)
        grids = moment_grids(
            [ClaimsMeasure((3,)), ClaimsMeasure()], fitted, FREE, HORIZON, n=2
        )
        assert grids.floor_count > 0
        assert np.all(grids.var >= 0.0)

    def test_branch_boundary_windows_agree_up_to_atoms(self):
        fitted = MeanClaimsMeasure(1e-6, 1e-3, atom0=0.3, atomW=0.2, warranty=W)
        from claimcast.core import WeightedMeasure

        wm = WeightedMeasure(fitted, FREE)
        # x = 0: branch [0, T] (with age-0 atom) vs interior formula [0, T]
        assert wm.mass(0, T, True, False) == pytest.approx(
            wm.mass(0, T) + fitted.atom0
        )
        # x = T - W: branch [W-T, W] (with age-W atom) vs interior formula
        assert wm.mass(W - T, W, False, True) == pytest.approx(
            wm.mass(W - T, W) + fitted.atomW
        )

    def test_window_never_longer_than_period(self):
        for x in HORIZON.sale_days[:: len(HORIZON.sale_days) // 37]:
            win = HORIZON.claim_window(int(x))
            assert win.hi - win.lo <= min(T, W)
