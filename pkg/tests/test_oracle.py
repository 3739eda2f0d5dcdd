import math

import networkx as nx
import pytest

from src.analysis.factors import discretized_gap_optimum, gap_formulas
from src.core.errors import InstanceTooLargeError
from src.core.metric import GraphMetric, MatrixMetric
from src.core.model import evaluate_cost, make_instance
from src.instances.generators import gen_gap, gen_random
from src.oracle.brute_force import brute_force_opt, exhaustive_smt
from src.processors.solver import solve

# 粗い離散化（辺数 ≤ 20 に収まる）
COARSE_GAP = {1: (0.8, 0.9), 2: (0.4, 0.45), 3: (0.3, 0.33)}
# r–c パスの辺長が c–t_i パスの辺長を下回る離散化
FINE_GAP = {1: (0.5, 0.75), 2: (0.35, 0.45)}


def rc_path_edges(instance):
    """r から c への細分パスの辺集合"""
    inner = sorted((v for v in instance.metric.graph if v.startswith("p0_")),
                   key=lambda v: int(v.split("_")[1]))
    vertices = ["r", *inner, "c"]
    return {frozenset(e) for e in zip(vertices, vertices[1:])}


class TestBruteForceOpt:
    def test_single_terminal(self):
        metric = MatrixMetric(["r", "t"], [[0.0, 5.0], [5.0, 0.0]])
        solution, value = brute_force_opt(make_instance(metric, "r", [("t", 2.0)]))
        assert value == pytest.approx(15.0)
        assert solution.edges == (("r", "t"),)

    def test_small_graph(self, small_graph_instance):
        solution, value = brute_force_opt(small_graph_instance)
        # 木 r-a-b, a-c: 接続 3 + 遅延 1·2 + 0.5·2
        assert value == pytest.approx(6.0)
        assert evaluate_cost(small_graph_instance, solution).total == pytest.approx(value)
        assert solution.costs.total == pytest.approx(value)

    def test_unit_path_not_worse_than_solver(self, unit_path):
        _, value = brute_force_opt(unit_path)
        _, report = solve(unit_path, mu_override=1.0)
        assert value <= report.total + 1e-9
        assert value == pytest.approx(8.0)

    @pytest.mark.parametrize("k", sorted(COARSE_GAP))
    def test_gap_family(self, k):
        delta, delta_prime = COARSE_GAP[k]
        instance = gen_gap(k, delta, delta_prime)
        solution, value = brute_force_opt(instance)
        expected = discretized_gap_optimum(k, instance.meta["rc_edge"], instance.meta["ct_edge"])
        assert value == pytest.approx(expected, abs=1e-9)
        _, opt = gap_formulas(k, delta_prime)
        assert abs(value - opt) <= delta_prime * k + 1e-6
        # 最適解は星辺をすべて含む
        edges = {frozenset(e) for e in solution.edges}
        for i in range(1, k + 1):
            assert frozenset(("r", f"t{i}")) in edges
        # r–c パスの辺は、c–t_i パスの辺より長いときだけ1本落ちる
        rc = rc_path_edges(instance)
        if instance.meta["rc_edge"] <= instance.meta["ct_edge"]:
            assert rc <= edges
        else:
            assert len(rc - edges) == 1

    @pytest.mark.parametrize("k", sorted(FINE_GAP))
    def test_fine_gap_keeps_every_rc_edge(self, k):
        delta, delta_prime = FINE_GAP[k]
        instance = gen_gap(k, delta, delta_prime)
        assert instance.meta["rc_edge"] < instance.meta["ct_edge"]
        solution, value = brute_force_opt(instance)
        expected = discretized_gap_optimum(k, instance.meta["rc_edge"], instance.meta["ct_edge"])
        assert value == pytest.approx(expected, abs=1e-9)
        edges = {frozenset(e) for e in solution.edges}
        assert rc_path_edges(instance) <= edges
        assert all(frozenset(("r", f"t{i}")) in edges for i in range(1, k + 1))

    def test_guard(self):
        graph = nx.complete_graph([f"v{i}" for i in range(13)])
        nx.set_edge_attributes(graph, 1.0, "weight")
        instance = make_instance(GraphMetric(graph), "v0", [("v1", 1.0)])
        with pytest.raises(InstanceTooLargeError):
            brute_force_opt(instance, max_vertices=12, max_edges=20)

    def test_guard_allows_sparse_graphs(self):
        graph = nx.path_graph([f"v{i}" for i in range(15)])
        nx.set_edge_attributes(graph, 1.0, "weight")
        instance = make_instance(GraphMetric(graph), "v0", [("v14", 1.0)])
        _, value = brute_force_opt(instance)
        assert value == pytest.approx(28.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_lower_bound_holds(self, seed):
        instance = gen_random(6, seed, "random-graph")
        _, value = brute_force_opt(instance)
        _, report = solve(instance, beta_method="exact")
        assert report.lower_bound <= value + 1e-9 <= report.total + 2e-9


class TestExhaustiveSmt:
    def test_path_graph(self):
        graph = nx.path_graph(["r", "x", "y", "t"])
        nx.set_edge_attributes(graph, 2.0, "weight")
        instance = make_instance(GraphMetric(graph), "r", [("t", 1.0)])
        assert exhaustive_smt(instance) == pytest.approx(6.0)

    def test_hub_vertex(self):
        graph = nx.Graph()
        for p in ("r", "a", "b"):
            graph.add_edge("h", p, weight=1.0)
        for u, v in (("r", "a"), ("a", "b"), ("r", "b")):
            graph.add_edge(u, v, weight=1.9)
        instance = make_instance(GraphMetric(graph), "r", [("a", 0.0), ("b", 0.0)])
        assert exhaustive_smt(instance) == pytest.approx(3.0)

    def test_gap_smt(self):
        k = 2
        delta, delta_prime = COARSE_GAP[k]
        instance = gen_gap(k, delta, delta_prime)
        # r–c パスと c–t_i パスの全体（全頂点が端子）
        assert exhaustive_smt(instance) == pytest.approx(2.0 + k / math.sqrt(2.0))
