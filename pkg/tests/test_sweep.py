"""Sweep harness and scaling-fit tests against synthetic lifespan tables."""

import math

import numpy as np
import pytest

from critwave.problem import InitialDataSpec
from critwave.rundriver import RunConfig
from critwave.sweep import (
    FitResult,
    SweepRow,
    SweepSpec,
    SweepTable,
    default_eps_list,
    fit_scaling,
    run_sweep,
)


def make_row(eps, T, status="blew_up", N=256, **kw):
    base = dict(
        model="damped_wave", n=1, p=3.0, q=3.0, eps=eps, L=50.0, N=N,
        status=status, T_num=T, boundary_mass_max=1e-9, dt_final=1e-3,
    )
    base.update(kw)
    return SweepRow(**base)


def synthetic_table(eps_values, law):
    rows = []
    for e in eps_values:
        T = law(e)
        rows.append(make_row(e, T))
    return SweepTable(rows)


EPS = default_eps_list(0.8, 8, 0.8)


class TestDefaultEpsList:
    def test_geometric_decreasing(self):
        eps = default_eps_list(1.2, 6, 0.85)
        assert len(eps) == 6
        assert eps[0] == 1.2
        ratios = [b / a for a, b in zip(eps, eps[1:])]
        assert np.allclose(ratios, 0.85, rtol=1e-14)


class TestFits:
    def test_critical_exact_law_recovered(self):
        table = synthetic_table(EPS, lambda e: math.exp(5.0 * e**-2))
        fit = fit_scaling(table, "critical")
        assert abs(fit.kappa_hat - 2.0) < 1e-10
        assert abs(fit.C_hat - 5.0) < 1e-9
        assert fit.r_squared > 1 - 1e-12

    def test_subcritical_exact_law_recovered(self):
        table = synthetic_table(EPS, lambda e: 3.0 * e**-6)
        fit = fit_scaling(table, "subcritical")
        assert abs(fit.kappa_hat - 6.0) < 1e-10
        assert abs(fit.C_hat - 3.0) < 1e-10
        assert fit.r_squared > 1 - 1e-12

    def test_fixed_kappa_exact(self):
        table = synthetic_table(EPS, lambda e: math.exp(0.7 * e**-2))
        fit = fit_scaling(table, "fixed-kappa", kappa_predicted=2.0)
        assert fit.kappa_hat == 2.0
        assert abs(fit.C_hat - 0.7) < 1e-10
        assert fit.r_squared > 1 - 1e-12

    def test_fixed_kappa_requires_prediction(self):
        table = synthetic_table(EPS, lambda e: math.exp(0.7 * e**-2))
        with pytest.raises(ValueError):
            fit_scaling(table, "fixed-kappa")

    def test_unknown_law_rejected(self):
        table = synthetic_table(EPS, lambda e: 1.0 / e)
        with pytest.raises(ValueError, match="unknown law"):
            fit_scaling(table, "quadratic")

    def test_power_law_kappa_scale_invariant(self):
        table = synthetic_table(EPS, lambda e: 3.0 * e**-6)
        scaled = SweepTable(
            [make_row(r.eps, 17.0 * r.T_num) for r in table.rows]
        )
        k1 = fit_scaling(table, "subcritical").kappa_hat
        k2 = fit_scaling(scaled, "subcritical").kappa_hat
        assert abs(k1 - k2) < 1e-12

    def test_no_blowup_data_raises(self):
        rows = [make_row(e, float("nan"), status="survived") for e in EPS]
        with pytest.raises(ValueError, match="no blow-up data"):
            fit_scaling(SweepTable(rows), "critical")

    def test_too_few_rows_raises(self):
        table = synthetic_table(EPS[:3], lambda e: 3.0 * e**-6)
        with pytest.raises(ValueError, match="at least 4"):
            fit_scaling(table, "subcritical")

    def test_monotonicity_guard(self):
        rows = [make_row(e, 3.0 * e**-6) for e in EPS]
        bad = rows[4]
        rows[4] = make_row(bad.eps, rows[3].T_num * 0.5)
        with pytest.raises(ValueError, match="not monotone"):
            fit_scaling(SweepTable(rows), "subcritical")

    def test_small_lifespans_dropped_for_critical(self):
        # rows with T <= 1 are unusable under a log log transform
        rows = [make_row(4.0, 0.5)] + [
            make_row(e, math.exp(5.0 * e**-2)) for e in EPS
        ]
        fit = fit_scaling(SweepTable(rows), "critical")
        assert fit.n_points == len(EPS)
        assert abs(fit.kappa_hat - 2.0) < 1e-10

    def test_finest_grid_wins(self):
        rows = []
        for e in EPS:
            rows.append(make_row(e, 999.0, N=128))
            rows.append(make_row(e, 3.0 * e**-6, N=512))
        fit = fit_scaling(SweepTable(rows), "subcritical")
        assert abs(fit.kappa_hat - 6.0) < 1e-10
        assert fit.n_points == len(EPS)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        table = synthetic_table(EPS, lambda e: 3.0 * e**-6)
        path = tmp_path / "sweep.csv"
        table.save(path)
        assert SweepTable.load(path) == table

    def test_round_trip_with_nan(self, tmp_path):
        rows = [make_row(0.5, float("nan"), status="survived")]
        table = SweepTable(rows)
        path = tmp_path / "sweep.csv"
        table.save(path)
        again = SweepTable.load(path)
        assert again == table
        assert math.isnan(again.rows[0].T_num)

    def test_empty_table_round_trip(self, tmp_path):
        path = tmp_path / "empty.csv"
        SweepTable().save(path)
        assert len(SweepTable.load(path)) == 0

    def test_save_is_byte_stable(self, tmp_path):
        table = synthetic_table(EPS, lambda e: 3.0 * e**-6)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        table.save(p1)
        table.save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n")
        with pytest.raises(ValueError, match="line 1"):
            SweepTable.load(path)

    def test_truncated_line_names_line_number(self, tmp_path):
        table = synthetic_table(EPS[:4], lambda e: 3.0 * e**-6)
        path = tmp_path / "sweep.csv"
        table.save(path)
        text = path.read_text().split("\n")
        text[3] = text[3].rsplit(",", 1)[0]  # drop a field on file line 4
        path.write_text("\n".join(text))
        with pytest.raises(ValueError, match="line 4"):
            SweepTable.load(path)

    def test_fit_result_round_trip(self, tmp_path):
        table = synthetic_table(EPS, lambda e: math.exp(5.0 * e**-2))
        fit = fit_scaling(table, "critical")
        path = tmp_path / "fit.json"
        fit.save(path)
        again = FitResult.load(path)
        assert again.kappa_hat == fit.kappa_hat
        assert again.C_hat == fit.C_hat
        assert again.residuals == fit.residuals
        assert math.isnan(again.kappa_predicted)


class TestSpecValidation:
    def test_eps_must_decrease(self):
        with pytest.raises(ValueError, match="decreasing"):
            SweepSpec(
                model="damped_wave", n=1, p=3, q=3,
                data=InitialDataSpec(), eps_list=(0.5, 0.6),
                grids=((50.0, 64),),
            )

    def test_eps_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            SweepSpec(
                model="damped_wave", n=1, p=3, q=3,
                data=InitialDataSpec(), eps_list=(0.5, -0.1),
                grids=((50.0, 64),),
            )

    def test_needs_a_grid(self):
        with pytest.raises(ValueError, match="grid"):
            SweepSpec(
                model="damped_wave", n=1, p=3, q=3,
                data=InitialDataSpec(), eps_list=(0.5,), grids=(),
            )


def tiny_sweep_spec():
    return SweepSpec(
        model="reaction_diffusion", n=1, p=3, q=3,
        data=InitialDataSpec(shape="gaussian", width=4.0),
        eps_list=(0.02, 0.01),
        grids=((20.0, 32), (20.0, 64)),
        config=RunConfig(t_max=0.5, dt0=0.1, rel_tol=1e-4, snapshot_every=10**9),
    )


class TestRunSweepDeterminism:
    def test_rows_ordered_and_jobs_independent(self, tmp_path):
        spec = tiny_sweep_spec()
        t1 = run_sweep(spec, jobs=1)
        t2 = run_sweep(spec, jobs=2)
        assert [(r.eps, r.N) for r in t1.rows] == [
            (0.02, 32), (0.02, 64), (0.01, 32), (0.01, 64)
        ]
        p1, p2 = tmp_path / "j1.csv", tmp_path / "j2.csv"
        t1.save(p1)
        t2.save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_statuses_sane(self):
        table = run_sweep(tiny_sweep_spec(), jobs=1)
        assert all(r.status == "survived" for r in table.rows)
