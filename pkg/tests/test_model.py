import math
from concurrent.futures import ThreadPoolExecutor

import networkx as nx
import pytest

from src.core.errors import StructureError, ValidationError
from src.core.metric import EuclideanMetric, GraphMetric, MatrixMetric
from src.core.model import (Instance, Solution, Terminal, delay_lower_bound, evaluate_cost,
                            lower_bound, make_instance)
from src.instances.generators import gen_gap


def single_terminal_instance(distance=5.0, weight=2.0):
    metric = MatrixMetric(["r", "t"], [[0.0, distance], [distance, 0.0]])
    return make_instance(metric, "r", [("t", weight)])


class TestMetric:
    def test_matrix_rejects_triangle_violation(self):
        with pytest.raises(ValidationError, match="Triangle inequality"):
            MatrixMetric(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])

    def test_matrix_rejects_asymmetry(self):
        with pytest.raises(ValidationError, match="Asymmetric"):
            MatrixMetric(["a", "b"], [[0, 1], [2, 0]])

    def test_matrix_rejects_negative_and_diagonal(self):
        with pytest.raises(ValidationError, match="Negative"):
            MatrixMetric(["a", "b"], [[0, -1], [-1, 0]])
        with pytest.raises(ValidationError, match="self-distance"):
            MatrixMetric(["a", "b"], [[1, 1], [1, 0]])

    def test_point_id_with_copy_separator_rejected(self):
        with pytest.raises(ValidationError):
            MatrixMetric(["a#1", "b"], [[0, 1], [1, 0]])

    def test_euclidean_distance(self):
        metric = EuclideanMetric(["o", "p"], [[0.0, 0.0], [3.0, 4.0]])
        assert metric.distance("o", "p") == pytest.approx(5.0)
        assert metric.matrix[0, 1] == pytest.approx(5.0)

    def test_graph_metric_uses_shortest_paths(self):
        graph = nx.Graph()
        graph.add_edge("a", "b", weight=1.0)
        graph.add_edge("b", "c", weight=1.0)
        graph.add_edge("a", "c", weight=5.0)
        metric = GraphMetric(graph)
        assert metric.distance("a", "c") == pytest.approx(2.0)
        assert metric.distance("c", "a") == pytest.approx(2.0)

    def test_graph_metric_must_be_connected(self):
        graph = nx.Graph()
        graph.add_edge("a", "b", weight=1.0)
        graph.add_node("z")
        with pytest.raises(ValidationError, match="not connected"):
            GraphMetric(graph)

    def test_graph_metric_rows_are_read_only(self):
        graph = nx.Graph()
        graph.add_edge("a", "b", weight=1.0)
        graph.add_edge("b", "c", weight=1.0)
        metric = GraphMetric(graph)
        row = metric.distances_from("a")
        with pytest.raises(TypeError):
            row["c"] = 0.0
        assert metric.distance("a", "c") == pytest.approx(2.0)
        with pytest.raises(ValidationError, match="Unknown point"):
            metric.distances_from("z")

    def test_graph_metric_shared_across_threads(self):
        grid = nx.convert_node_labels_to_integers(nx.grid_2d_graph(12, 12))
        graph = nx.Graph()
        for u, v in grid.edges:
            graph.add_edge(f"g{u}", f"g{v}", weight=1.0 + (u * 7 + v) % 5)
        metric = GraphMetric(graph)
        sources = list(metric.point_ids) * 3
        with ThreadPoolExecutor(max_workers=8) as pool:
            rows = list(pool.map(lambda s: dict(metric.distances_from(s)), sources))
        expected = dict(nx.all_pairs_dijkstra_path_length(graph, weight="weight"))
        for source, row in zip(sources, rows):
            assert row == pytest.approx(expected[source])
        assert metric.matrix == pytest.approx(metric.matrix.T)


class TestInstance:
    def test_negative_weight_rejected(self):
        with pytest.raises(ValidationError, match="negative weight"):
            single_terminal_instance(weight=-1.0)

    def test_root_cannot_be_terminal(self):
        metric = MatrixMetric(["r", "t"], [[0, 1], [1, 0]])
        with pytest.raises(ValidationError, match="must not be a terminal"):
            Instance(metric, "r", (Terminal("r", 1.0),))

    def test_duplicate_terminal_rejected(self):
        metric = MatrixMetric(["r", "t"], [[0, 1], [1, 0]])
        with pytest.raises(ValidationError, match="Duplicate"):
            make_instance(metric, "r", [("t", 1.0), ("t", 2.0)])

    def test_required_points_root_first(self, small_graph_instance):
        assert small_graph_instance.required_points() == ["r", "b", "c"]


class TestEvaluateCost:
    def test_single_edge(self):
        instance = single_terminal_instance()
        costs = evaluate_cost(instance, Solution(edges=(("r", "t"),)))
        assert costs.connection_cost == pytest.approx(5.0)
        assert costs.delay_cost == pytest.approx(10.0)
        assert costs.total == pytest.approx(15.0)

    def test_gap_optimum_edge_set(self):
        k, delta_prime = 4, 0.01
        instance = gen_gap(k, delta_prime / 2.0, delta_prime)
        graph = instance.metric.as_graph()
        # 各 c–t_i パスから t_i 側の最後の辺を1本ずつ除く
        for i in range(1, k + 1):
            inner = sorted((v for v in graph.neighbors(f"t{i}") if v != "r"))
            graph.remove_edge(inner[0], f"t{i}")
        solution = Solution(edges=tuple(nx.bfs_edges(graph, "r")))
        costs = evaluate_cost(instance, solution)
        removed = k * instance.meta["ct_edge"]
        assert costs.total == pytest.approx((1 + math.sqrt(2)) * k + 2 - removed, abs=1e-9)
        assert costs.total == pytest.approx(11.61685, abs=1e-3)

    def test_matches_per_terminal_path_walk(self, small_graph_instance):
        solution = Solution(edges=(("r", "a"), ("a", "b"), ("a", "c")))
        costs = evaluate_cost(small_graph_instance, solution)
        tree = nx.Graph()
        for u, v in solution.edges:
            tree.add_edge(u, v, weight=small_graph_instance.distance(u, v))
        delay = sum(t.weight * nx.shortest_path_length(tree, "r", t.id, weight="weight")
                    for t in small_graph_instance.terminals)
        assert costs.connection_cost == pytest.approx(3.0)
        assert costs.delay_cost == pytest.approx(delay, abs=1e-9)
        assert costs.total == costs.connection_cost + costs.delay_cost

    def test_copy_vertices_use_positions(self, small_graph_instance):
        solution = Solution(edges=(("r", "a"), ("a", "a#1"), ("a#1", "b"), ("a", "c")),
                            positions={"a#1": "a"})
        costs = evaluate_cost(small_graph_instance, solution)
        assert costs.connection_cost == pytest.approx(3.0)

    def test_missing_terminal(self, small_graph_instance):
        with pytest.raises(StructureError, match="Terminal missing"):
            evaluate_cost(small_graph_instance, Solution(edges=(("r", "b"),)))

    def test_cycle_rejected(self, small_graph_instance):
        solution = Solution(edges=(("r", "b"), ("b", "c"), ("c", "r")))
        with pytest.raises(StructureError):
            evaluate_cost(small_graph_instance, solution)

    def test_disconnected_rejected(self, small_graph_instance):
        solution = Solution(edges=(("r", "a"), ("b", "c")))
        with pytest.raises(StructureError, match="unreachable"):
            evaluate_cost(small_graph_instance, solution)


class TestLowerBound:
    def test_delay_lower_bound(self):
        assert delay_lower_bound(single_terminal_instance()) == pytest.approx(10.0)
        assert delay_lower_bound(single_terminal_instance(weight=0.0)) == 0.0

    def test_gap_delay_part(self):
        k = 3
        instance = gen_gap(k, 0.05, 0.1)
        assert delay_lower_bound(instance) == pytest.approx(k / math.sqrt(2))
        assert lower_bound(instance, 2 + k / math.sqrt(2)) == pytest.approx(2 + math.sqrt(2) * k)

    def test_zero_weights(self):
        assert lower_bound(single_terminal_instance(weight=0.0), 7.0) == pytest.approx(7.0)
