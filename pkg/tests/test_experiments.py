"""Tests for cluster generators, sweeps, scaling runs and fits."""
import logging
import math

import pytest

from lackwalk.experiments import (
    STATUS_FAILED,
    STATUS_OK,
    ClusterSpec,
    FitModel,
    LoopWeightRule,
    ScalingRow,
    compare_families,
    fit_model,
    fit_scaling,
    geometric_grid,
    is_exceptional,
    make_marked_block,
    make_marked_diagonal,
    make_marked_list,
    make_marked_run,
    parse_weight_grid,
    scaling_run,
    sweep_loop_weight,
)
from lackwalk.lattice import build_lattice
from lackwalk.operators import MarkedSet
from lackwalk.search import default_horizon


class TestClusterGenerators:
    def test_block_is_x_fastest(self):
        geometry = build_lattice(2, 5)
        marked = make_marked_block(geometry, 2, 1)
        assert marked.vertices == (0, 1)
        assert marked.provenance == "block:2x1@0"

    def test_block_wraps_around_the_torus(self):
        geometry = build_lattice(2, 5)
        anchor = geometry.index(4, 4)
        marked = make_marked_block(geometry, 2, 2, anchor)
        assert marked.vertices == (24, 20, 4, 0)

    def test_block_must_fit(self):
        with pytest.raises(ValueError, match="does not fit"):
            make_marked_block(build_lattice(2, 4), 5, 5)

    def test_block_needs_torus(self):
        with pytest.raises(ValueError, match="2D"):
            make_marked_block(build_lattice(1, 10), 1, 1)

    def test_full_block_marks_everything(self):
        geometry = build_lattice(2, 3)
        assert make_marked_block(geometry, 3, 3).size == 9

    def test_diagonal(self):
        marked = make_marked_diagonal(build_lattice(2, 4))
        assert marked.vertices == (0, 5, 10, 15)
        assert marked.provenance == "diag"

    def test_run_wraps_around_the_ring(self):
        marked = make_marked_run(build_lattice(1, 10), 3, anchor=8)
        assert marked.vertices == (8, 9, 0)
        assert marked.provenance == "run:3@8"

    @pytest.mark.parametrize("m", [0, 11])
    def test_run_length_is_bounded(self, m):
        with pytest.raises(ValueError, match="run length"):
            make_marked_run(build_lattice(1, 10), m)

    def test_list_validates(self):
        geometry = build_lattice(1, 10)
        assert make_marked_list(geometry, [7, 2]).vertices == (7, 2)
        with pytest.raises(ValueError, match="empty"):
            make_marked_list(geometry, [])
        with pytest.raises(ValueError, match="outside"):
            make_marked_list(geometry, [10])


class TestClusterSpec:
    @pytest.mark.parametrize(
        "text,kind,slug",
        [
            ("run:5", "run", "run-5"),
            ("block:2x1", "block", "block-2x1"),
            ("BLOCK:8x8", "block", "block-8x8"),
            ("diag", "diag", "diag"),
            ("list:1,4,9", "list", "list-3"),
        ],
    )
    def test_parse(self, text, kind, slug):
        cluster = ClusterSpec.parse(text)
        assert cluster.kind == kind
        assert cluster.slug == slug
        assert ClusterSpec.parse(str(cluster)) == cluster

    @pytest.mark.parametrize("text", ["blob", "block:2", "run:", "list:", "run:-1"])
    def test_rejects_garbage(self, text):
        with pytest.raises(ValueError, match="cluster must be"):
            ClusterSpec.parse(text)

    def test_build_uses_anchor(self):
        geometry = build_lattice(1, 10)
        assert ClusterSpec.parse("run:2").build(geometry, 4).vertices == (4, 5)


class TestIsExceptional:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("block:1x1", False),
            ("block:3x3", False),
            ("block:3x5", False),
            ("block:2x1", True),
            ("block:1x2", True),
            ("block:8x8", True),
            ("diag", True),
        ],
    )
    def test_classification(self, text, expected):
        assert is_exceptional(ClusterSpec.parse(text)) is expected


class TestLoopWeightRule:
    def test_constant(self):
        rule = LoopWeightRule.parse("0.01")
        assert rule.value(100) == 0.01
        assert rule.value(10_000) == 0.01
        assert str(rule) == "0.01"

    def test_per_vertex(self):
        rule = LoopWeightRule.parse("0.1/n")
        assert rule.per_vertex
        assert rule.value(1000) == pytest.approx(1e-4)
        assert str(rule) == "0.1/N"

    @pytest.mark.parametrize("text", ["0", "-1", "abc", "inf", "/N"])
    def test_rejects_bad_values(self, text):
        with pytest.raises(ValueError, match="loop weight"):
            LoopWeightRule.parse(text)


class TestWeightGrids:
    def test_geometric_grid_with_count(self):
        grid = geometric_grid(1e-4, 1e-1, 4)
        assert grid == pytest.approx([1e-4, 1e-3, 1e-2, 1e-1])

    def test_geometric_grid_density(self):
        grid = geometric_grid(1e-4, 1e-1, points_per_decade=25)
        assert len(grid) == 76
        assert grid[0] == pytest.approx(1e-4)
        assert grid[-1] == pytest.approx(1e-1)
        assert all(b > a for a, b in zip(grid, grid[1:]))

    def test_single_point(self):
        assert geometric_grid(0.5, 0.5) == [0.5]

    def test_rejects_inverted_range(self):
        with pytest.raises(ValueError):
            geometric_grid(1.0, 0.1)

    def test_parse_range_in_units_of_n(self):
        grid = parse_weight_grid("0.01/N:10/N:4", 1000)
        assert grid == pytest.approx([1e-5, 1e-4, 1e-3, 1e-2])

    def test_parse_list(self):
        assert parse_weight_grid("0.1, 0.2,1/N", 10) == pytest.approx([0.1, 0.2, 0.1])

    @pytest.mark.parametrize("text", ["", "1:2:3:4", "a:b"])
    def test_parse_rejects_bad_grids(self, text):
        with pytest.raises(ValueError):
            parse_weight_grid(text, 10)


class TestSweepLoopWeight:
    def test_rows_follow_input_order(self):
        geometry = build_lattice(1, 20)
        weights = [0.01, 0.1, 1.0]
        rows = sweep_loop_weight(geometry, "g", MarkedSet.of([0]), weights)

        assert [r.loop_weight for r in rows] == weights
        assert [r.na for r in rows] == pytest.approx([0.2, 2.0, 20.0])
        assert all(r.status == STATUS_OK for r in rows)
        assert all(r.t_peak is not None and r.p_peak is not None for r in rows)

    def test_failed_rows_are_reported_not_raised(self):
        geometry = build_lattice(1, 20)
        rows = sweep_loop_weight(geometry, "g", MarkedSet.of([0]), [0.1, 0.2], horizon=1)
        assert [r.status for r in rows] == [STATUS_FAILED, STATUS_FAILED]
        assert all("horizon" in r.error for r in rows)
        assert all(r.t_peak is None for r in rows)

    def test_each_weight_gets_its_own_horizon(self):
        geometry = build_lattice(1, 16)
        weights = [1 / 1024, 1 / 16]
        # Unreachable prominence: every row runs to its full horizon.
        rows = sweep_loop_weight(geometry, "g", MarkedSet.of([0]), weights, prominence=0.999)

        assert [r.terminated_by for r in rows] == ["horizon_reached", "horizon_reached"]
        assert [r.steps for r in rows] == [
            default_horizon(geometry, 1, loop_weight=w) for w in weights
        ]
        assert rows[0].steps == 8 * rows[1].steps

    def test_failed_rows_log_the_traceback(self, caplog):
        geometry = build_lattice(1, 20)
        with caplog.at_level(logging.ERROR, logger="lackwalk.experiments"):
            sweep_loop_weight(geometry, "g", MarkedSet.of([0]), [0.1], horizon=1)

        failures = [r for r in caplog.records if r.message.startswith("Search failed")]
        assert len(failures) == 1
        assert failures[0].exc_info is not None
        assert failures[0].exc_info[0] is ValueError

    def test_rejects_unsorted_weights(self):
        with pytest.raises(ValueError, match="ascending"):
            sweep_loop_weight(build_lattice(1, 20), "g", MarkedSet.of([0]), [0.2, 0.1])

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError, match="empty"):
            sweep_loop_weight(build_lattice(1, 20), "g", MarkedSet.of([0]), [])

    def test_parallel_matches_serial(self):
        geometry = build_lattice(2, 6)
        marked = MarkedSet.of([0, 1])
        weights = [0.01, 0.05, 0.2]
        serial = sweep_loop_weight(geometry, "g", marked, weights, jobs=1)
        parallel = sweep_loop_weight(geometry, "g", marked, weights, jobs=2)

        assert [(r.t_peak, r.p_peak, r.status) for r in serial] == [
            (r.t_peak, r.p_peak, r.status) for r in parallel
        ]


class TestScalingRun:
    def test_ring_rows(self):
        rows = scaling_run(
            "g", 1, [8, 12, 16], ClusterSpec.parse("run:2"), LoopWeightRule.parse("0.1/N")
        )
        assert [r.n for r in rows] == [8, 12, 16]
        assert [r.m for r in rows] == [2, 2, 2]
        assert [r.loop_weight for r in rows] == pytest.approx([0.1 / 8, 0.1 / 12, 0.1 / 16])
        assert all(r.cluster == "run:2" for r in rows)
        assert all(r.status == STATUS_OK for r in rows)

    def test_torus_rows_use_side_squared(self):
        rows = scaling_run(
            "g", 2, [4, 6], ClusterSpec.parse("block:1x1"), LoopWeightRule.parse("0.01")
        )
        assert [r.n for r in rows] == [16, 36]
        assert [r.side for r in rows] == [4, 6]

    def test_cluster_too_large_fails_only_its_row(self):
        rows = scaling_run(
            "g", 2, [4, 8], ClusterSpec.parse("block:5x5"), LoopWeightRule.parse("0.01")
        )
        assert rows[0].status == STATUS_FAILED
        assert "does not fit" in rows[0].error
        assert rows[1].status == STATUS_OK
        assert rows[1].m == 25

    def test_rejects_unsorted_sizes(self):
        with pytest.raises(ValueError, match="ascending"):
            scaling_run("g", 1, [16, 8], ClusterSpec.parse("run:1"), LoopWeightRule.parse("0.1"))


class TestCompareFamilies:
    def test_one_row_per_family(self):
        geometry = build_lattice(2, 6)
        rows = compare_families(geometry, MarkedSet.of([0]), 4 / 36)
        assert [r.family for r in rows] == ["g", "akr", "skw"]
        assert all(r.status == STATUS_OK for r in rows)

    def test_rejects_empty_marked_set(self):
        with pytest.raises(ValueError):
            compare_families(build_lattice(2, 6), MarkedSet(()), 0.1)


def _rows(ns, times, status=STATUS_OK):
    return [
        ScalingRow(
            n=n, m=1, side=n, cluster="run:1", loop_weight=0.1 / n, t_peak=t, status=status
        )
        for n, t in zip(ns, times)
    ]


class TestFits:
    def test_power_law_recovers_exponent(self):
        ns = [100, 200, 400, 800]
        times = [3.0 * math.sqrt(n) for n in ns]
        fit = fit_model(ns, [1] * 4, times, FitModel.POWER_LAW)
        assert fit.beta == pytest.approx(0.5)
        assert fit.c == pytest.approx(3.0)
        assert fit.residual < 1e-10
        assert fit.points == 4

    def test_linear_over_m_from_rows(self):
        rows = _rows([200, 400, 600, 800, 1000], [7 * n for n in (200, 400, 600, 800, 1000)])
        fit = fit_scaling(rows, "linear_over_M")
        assert fit.model is FitModel.LINEAR_OVER_M
        assert fit.c == pytest.approx(7.0)
        assert fit.spread == pytest.approx(0.0, abs=1e-12)
        assert fit.beta is None

    def test_failed_rows_are_ignored(self):
        rows = _rows([10, 20, 30], [70, 140, 210]) + _rows([40], [None], status=STATUS_FAILED)
        assert fit_scaling(rows, "linear_over_M").points == 3

    def test_needs_three_rows(self):
        with pytest.raises(ValueError, match="at least 3"):
            fit_scaling(_rows([10, 20], [70, 140]), "power_law")

    def test_sqrt_log_needs_ratio_above_one(self):
        with pytest.raises(ValueError, match="N/M > 1"):
            fit_model([1, 4, 9], [1, 1, 1], [1.0, 2.0, 3.0], "sqrt_log")

    def test_power_law_needs_distinct_sizes(self):
        with pytest.raises(ValueError, match="distinct"):
            fit_model([10, 10, 10], [1, 1, 1], [5.0, 5.0, 5.0], "power_law")

    def test_power_law_from_linear_rows(self):
        ns = [200, 400, 600, 800, 1000]
        fit = fit_scaling(_rows(ns, [7 * n for n in ns]), "power_law")
        assert fit.beta == pytest.approx(1.0, abs=1e-9)
        assert fit.c == pytest.approx(7.0)

    def test_sqrt_log_spread_from_rows(self):
        ns = [400, 1600, 3600, 6400]
        times = [3.0 * math.sqrt(n * math.log(n)) for n in ns]
        fit = fit_model(ns, [1] * 4, times, FitModel.SQRT_LOG)
        assert fit.spread < 1e-9
        assert fit.c == pytest.approx(3.0)
