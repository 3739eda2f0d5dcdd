import json

import pytest

from src.core.errors import BoundViolationError, InvariantError, StructureError, ValidationError
from src.core.metric import MatrixMetric
from src.core.model import Solution, evaluate_cost, make_instance
from src.instances.generators import FAMILIES, gen_random
from src.oracle.brute_force import brute_force_opt
from src.processors.solver import CostDistanceSolver, check_bound, solve

IMPROVED_EXACT = 1.70711
IMPROVED_MST = 2.61804


def check_names(report):
    return {c.name for c in report.checks}


class TestCheckBound:
    def test_relative_tolerance(self):
        assert check_bound("x", 100.0 + 1e-8, 100.0).ok
        assert not check_bound("x", 100.0 + 1e-6, 100.0).ok
        assert check_bound("x", 1.0, 2.0).margin == pytest.approx(1.0)


class TestUnitPath:
    def test_improved_mu_one(self, unit_path):
        solution, report = solve(unit_path, mu_override=1.0)
        assert report.total == pytest.approx(8.0)
        assert report.beta_method == "given"
        assert report.mu_source == "override"
        assert not report.binary
        assert [(c.root, c.port, c.cost) for c in report.components] == [
            ("v0", "v0", pytest.approx(2.0)), ("v5", "v5", pytest.approx(6.0))]
        assert report.smt_source == "exact"
        assert report.smt_cost == pytest.approx(6.0)
        assert report.lower_bound == pytest.approx(8.0)
        assert report.bounds_ok
        assert "approximation_factor" not in check_names(report)
        assert solution.costs.total == pytest.approx(8.0)

    def test_baseline_default_mu(self, unit_path):
        _, report = solve(unit_path, splitter="baseline")
        assert report.mu == pytest.approx(1.0)
        assert report.mu_source == "baseline-default"
        assert report.total == pytest.approx(13.0)
        component = report.components[0]
        assert component.port == "v0"
        assert component.component_bound == pytest.approx(14.0)
        bound_check = next(c for c in report.checks if c.name == "component_bound")
        assert not bound_check.enforced
        expected = {c.name: c for c in report.checks}["port_expected_cost"]
        assert expected.value == pytest.approx(13.0)
        assert expected.bound == pytest.approx(13.0)
        assert expected.ok

    def test_report_json(self, unit_path):
        _, report = solve(unit_path, mu_override=1.0)
        data = json.loads(json.dumps(report.to_json()))
        assert data["C"] == pytest.approx(6.0)
        assert data["D"] == pytest.approx(2.0)
        assert data["bounds_ok"] is True
        assert {"name", "value", "bound", "margin", "ok", "enforced"} <= set(data["checks"][0])


class TestMuSelection:
    def test_zero_connection_cost_shortcut(self):
        metric = MatrixMetric(["r", "t"], [[0.0, 0.0], [0.0, 0.0]])
        instance = make_instance(metric, "r", [("t", 3.0)])
        solution, report = solve(instance)
        assert report.shortcut == "zero-connection-cost"
        assert report.mu is None
        assert report.total == 0.0
        assert report.ratio == 1.0
        assert solution.edges == (("r", "t"),)

    def test_zero_delay_shortcut(self, small_graph_instance):
        instance = make_instance(small_graph_instance.metric, "r", [("b", 0.0), ("c", 0.0)])
        _, report = solve(instance)
        assert report.shortcut == "zero-delay-bound"
        assert report.total == pytest.approx(4.0)
        assert "shortcut_total" in check_names(report)
        assert "total_bound" not in check_names(report)

    def test_auto_mu(self, small_graph_instance):
        _, report = solve(small_graph_instance, beta_method="exact")
        # C = 3（ハブ a を使う厳密木）、D = 3
        assert report.initial_connection_cost == pytest.approx(3.0)
        assert report.delay_lower_bound == pytest.approx(3.0)
        assert report.mu == pytest.approx(2.0 ** 0.5)
        assert report.mu_source == "auto"

    def test_baseline_mu_from_beta(self, small_graph_instance):
        _, report = solve(small_graph_instance, beta_method="mst", splitter="baseline")
        assert report.beta == 2.0
        assert report.mu == pytest.approx(0.5)

    @pytest.mark.parametrize("exponent", [-10, -3, 1, 7])
    @pytest.mark.parametrize("family", ["euclidean2d", "random-graph"])
    def test_mu_unchanged_by_distance_scaling(self, family, exponent):
        instance = gen_random(7, 11, family)
        ids = list(instance.metric.point_ids)
        terminals = [(t.id, t.weight) for t in instance.terminals]
        scale = 2.0 ** exponent
        base = make_instance(MatrixMetric(ids, instance.metric.matrix), instance.root, terminals)
        scaled = make_instance(MatrixMetric(ids, instance.metric.matrix * scale), instance.root,
                               terminals)
        for method in ("mst", "exact"):
            _, report = solve(base, beta_method=method)
            _, scaled_report = solve(scaled, beta_method=method)
            assert report.mu is not None
            assert scaled_report.mu == report.mu
            assert scaled_report.total == pytest.approx(report.total * scale)


class TestSolver:
    def test_rejects_bad_arguments(self, small_graph_instance):
        solver = CostDistanceSolver()
        with pytest.raises(ValidationError, match="beta method"):
            solver.solve(small_graph_instance, beta_method="greedy")
        with pytest.raises(ValidationError, match="splitter"):
            solver.solve(small_graph_instance, splitter="random")
        with pytest.raises(ValidationError, match="mu must be"):
            solver.solve(small_graph_instance, mu=-1.0)
        with pytest.raises(ValidationError, match="mu must be"):
            solver.solve(small_graph_instance, mu=float("inf"))
        with pytest.raises(ValidationError, match="port mode"):
            solver.set_config(ports="nearest")

    def test_costs_match_evaluation(self, small_graph_instance):
        for splitter in ("improved", "baseline"):
            solution, report = solve(small_graph_instance, beta_method="exact", splitter=splitter)
            costs = evaluate_cost(small_graph_instance, solution)
            assert costs.total == pytest.approx(report.total)
            assert report.total == pytest.approx(report.accounted_total - report.pruned_cost)

    def test_any_ports(self):
        for seed in range(5):
            instance = gen_random(8, seed, "euclidean2d")
            _, terminals = solve(instance, ports="terminals")
            _, anywhere = solve(instance, ports="any")
            assert anywhere.ports == "any"
            assert anywhere.bounds_ok and terminals.bounds_ok

    def test_dump_aggregates(self, small_graph_instance, tmp_path):
        path = tmp_path / "agg.jsonl"
        solver = CostDistanceSolver()
        _, report = solver.solve(small_graph_instance, beta_method="exact", dump_path=str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == report.nodes
        record = json.loads(lines[0])
        assert {"node", "point", "kind", "parent", "W", "D", "C", "S1", "S2"} <= set(record)

    def test_bound_violation_carries_report(self, small_graph_instance, monkeypatch):
        import src.processors.solver as solver_module

        monkeypatch.setattr(solver_module, "approx_factor", lambda beta: 0.5)
        with pytest.raises(BoundViolationError) as excinfo:
            solve(small_graph_instance, beta_method="exact")
        report = excinfo.value.report
        assert excinfo.value.exit_code == 3
        assert [c.name for c in report.failed_checks()] == ["approximation_factor"]

    def test_invalid_tree_is_internal_error(self, small_graph_instance, monkeypatch):
        monkeypatch.setattr(CostDistanceSolver, "_reconnect",
                            lambda self, *args: Solution(edges=(("r", "a"),)))
        with pytest.raises(InvariantError, match="invalid tree") as excinfo:
            solve(small_graph_instance, beta_method="exact")
        assert excinfo.value.exit_code == 3
        assert isinstance(excinfo.value.__cause__, StructureError)

    def test_exact_tree_reused_for_lower_bound(self, small_graph_instance):
        solver = CostDistanceSolver()
        solver.set_config(lower_bound_limit=2)
        _, report = solver.solve(small_graph_instance, beta_method="exact")
        assert report.smt_source == "exact"
        assert report.smt_cost == pytest.approx(3.0)
        assert "approximation_factor" in check_names(report)
        _, report = solver.solve(small_graph_instance, beta_method="mst")
        assert report.smt_source == "mst-half"
        assert "approximation_factor" not in check_names(report)

    def test_visits_recorded(self):
        _, report = solve(gen_random(10, 3, "star-heavy"))
        assert report.visits["split"] == report.nodes
        assert set(report.timings) >= {"initial_tree", "split", "reconnect", "evaluate"}


def assert_guarantees(instance):
    _, optimum = brute_force_opt(instance)
    for method, factor in (("exact", IMPROVED_EXACT), ("mst", IMPROVED_MST)):
        _, report = solve(instance, beta_method=method)
        assert report.smt_source == "exact"
        assert report.total <= factor * report.lower_bound + 1e-9
        assert report.total >= optimum - 1e-9
        assert report.lower_bound <= optimum + 1e-9


class TestGuarantees:
    @pytest.mark.parametrize("seed", range(10))
    def test_random_graphs(self, seed):
        assert_guarantees(gen_random(5, seed, "random-graph"))

    @pytest.mark.parametrize("family", FAMILIES)
    def test_families(self, family):
        for seed in range(3):
            instance = gen_random(6, seed, family)
            for splitter in ("improved", "baseline"):
                _, report = solve(instance, beta_method="exact", splitter=splitter)
                assert report.bounds_ok

    @pytest.mark.slow
    def test_many_random_graphs(self):
        for seed in range(200):
            assert_guarantees(gen_random(7, 1000 + seed, "random-graph"))

    @pytest.mark.slow
    def test_star_heavy_improved_beats_baseline(self):
        wins = 0
        for seed in range(100):
            instance = gen_random(12, seed, "star-heavy")
            _, improved = solve(instance)
            _, baseline = solve(instance, splitter="baseline")
            assert improved.mu_source == "auto"
            if improved.total < baseline.total - 1e-9 * max(1.0, baseline.total):
                wins += 1
        assert wins / 100 >= 0.5
