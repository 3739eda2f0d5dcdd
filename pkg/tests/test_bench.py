import csv
import io
import math

import pytest

from src.bench.runner import COLUMNS, BenchRunner, parse_seeds, write_csv
from src.core.errors import CdstError, ValidationError


@pytest.fixture
def runner():
    return BenchRunner()


class TestGapSweep:
    def test_rows(self, runner):
        rows = runner.gap_sweep(3, solve_limit=1)
        formula = [r for r in rows if r["beta_method"] == "formula"]
        solved = [r for r in rows if r["beta_method"] != "formula"]
        assert [r["instance"] for r in formula] == ["gap-k1", "gap-k2", "gap-k3"]
        assert all(r["ratio"] == pytest.approx(r["total"] / r["lower_bound"]) for r in formula)
        assert len(solved) == 1
        row = solved[0]
        assert row["instance"] == "gap-k1"
        assert row["beta_method"] == "mst"
        # 全頂点が端子で C_SMT は厳密に求まる
        assert row["lower_bound"] == pytest.approx(2.0 + math.sqrt(2.0), abs=1e-9)
        assert row["total"] >= row["lower_bound"]

    def test_ratio_increasing(self, runner):
        rows = runner.gap_sweep(50, solve_limit=0)
        ratios = [r["ratio"] for r in rows]
        assert len(ratios) == 50
        assert all(x < y for x, y in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.0 + 1.0 / math.sqrt(2.0)

    def test_rejects_bad_k(self, runner):
        with pytest.raises(ValidationError):
            runner.gap_sweep(0)


class TestRandomSweep:
    def test_rows_per_combination(self, runner):
        rows = runner.random_sweep(families=["star-heavy"], seeds=[0, 1], n_terminals=6)
        assert len(rows) == 2 * 2 * 2
        assert {r["splitter"] for r in rows} == {"improved", "baseline"}
        assert all(r["total"] >= r["lower_bound"] - 1e-9 for r in rows)

    def test_failures_are_skipped(self, runner, monkeypatch):
        def fail(*args, **kwargs):
            raise CdstError("boom")

        monkeypatch.setattr(runner.solver, "solve", fail)
        assert runner.random_sweep(families=["euclidean2d"], seeds=[0], n_terminals=4) == []


class TestScaling:
    def test_visits_grow_linearly(self, runner):
        rows = runner.scaling([2_000, 20_000], seed=1)
        assert [r["nodes"] for r in rows] == [4_000, 40_000]
        ratio = rows[1]["visits"] / rows[0]["visits"]
        assert 9.0 <= ratio <= 11.0
        assert all(r["total"] > 0 for r in rows)

    @pytest.mark.slow
    def test_large_sizes(self, runner):
        rows = runner.scaling([100_000, 1_000_000], seed=0)
        assert 9.0 <= rows[1]["visits"] / rows[0]["visits"] <= 11.0


class TestCsv:
    def test_header_and_natural_order(self):
        rows = [
            {"instance": "gap-k10", "beta_method": "formula", "splitter": "", "ratio": 1.5},
            {"instance": "gap-k9", "beta_method": "mst", "splitter": "improved", "mu": None},
            {"instance": "gap-k9", "beta_method": "formula", "splitter": "", "total": 0.1},
        ]
        stream = io.StringIO()
        write_csv(rows, stream)
        text = stream.getvalue()
        assert text.startswith(",".join(COLUMNS) + "\r\n")
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert [(r["instance"], r["beta_method"]) for r in parsed] == [
            ("gap-k9", "formula"), ("gap-k9", "mst"), ("gap-k10", "formula")]
        assert parsed[0]["total"] == "0.1"
        assert parsed[1]["mu"] == ""

    def test_unsorted(self):
        rows = [{"instance": "b"}, {"instance": "a"}]
        stream = io.StringIO()
        write_csv(rows, stream, sort=False)
        assert [r["instance"] for r in csv.DictReader(io.StringIO(stream.getvalue()))] == ["b", "a"]


class TestParseSeeds:
    @pytest.mark.parametrize("text, expected", [
        ("0-4", [0, 1, 2, 3, 4]), ("1,3,5", [1, 3, 5]), ("0-1,7", [0, 1, 7]), (None, [0, 1, 2, 3, 4])])
    def test_formats(self, text, expected):
        assert parse_seeds(text) == expected

    def test_invalid(self):
        with pytest.raises(ValidationError, match="seed"):
            parse_seeds("a-b")
