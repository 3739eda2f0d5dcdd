#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
分枝限定法による厳密解（小規模グラフ用）
辺を長さの昇順に「採用／不採用」で分岐し、undo 付き Union-Find で森を管理します。
グラフ以外のメトリックは完全グラフとして扱います（グラフ外のシュタイナー点は考えません）。
"""

import math
from typing import Callable, List, Optional, Tuple

import networkx as nx

from src.core.errors import InstanceTooLargeError
from src.core.model import Instance, Solution, delay_lower_bound, evaluate_cost
from src.utils.log_helper import get_default_helper

MAX_VERTICES = 12
MAX_EDGES = 20


class _UndoUnionFind:
    """経路圧縮なし・undo 可能な Union-Find（必須頂点を含む成分数も管理）"""

    def __init__(self, nodes: List[str], required: set):
        self.parent = {v: v for v in nodes}
        self.size = {v: 1 for v in nodes}
        self.required = {v: int(v in required) for v in nodes}
        self.required_components = len(required)
        self.history: List[Optional[Tuple[str, str, int]]] = []

    def find(self, v: str) -> str:
        while self.parent[v] != v:
            v = self.parent[v]
        return v

    def union(self, u: str, v: str) -> bool:
        a, b = self.find(u), self.find(v)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        merged_required = int(self.required[a] > 0 and self.required[b] > 0)
        self.parent[b] = a
        self.size[a] += self.size[b]
        self.required[a] += self.required[b]
        self.required_components -= merged_required
        self.history.append((a, b, merged_required))
        return True

    def undo(self):
        a, b, merged_required = self.history.pop()
        self.parent[b] = b
        self.size[a] -= self.size[b]
        self.required[a] -= self.required[b]
        self.required_components += merged_required


def _search_graph(instance: Instance, max_vertices: int, max_edges: int) -> nx.Graph:
    graph = instance.metric.as_graph()
    n, m = graph.number_of_nodes(), graph.number_of_edges()
    if n > max_vertices and m > max_edges:
        raise InstanceTooLargeError("oracle graph size (vertices, edges)", (n, m),
                                    (max_vertices, max_edges))
    return graph


def _root_tree(instance: Instance, edges: List[Tuple[str, str, float]]) -> nx.Graph:
    """採用辺の根成分から必須でない葉を除いた木"""
    forest = nx.Graph()
    forest.add_node(instance.root)
    forest.add_weighted_edges_from(edges)
    tree = forest.subgraph(nx.node_connected_component(forest, instance.root)).copy()
    required = set(instance.required_points())
    leaves = [v for v in tree.nodes if tree.degree(v) <= 1 and v not in required]
    while leaves:
        v = leaves.pop()
        neighbors = list(tree.neighbors(v))
        tree.remove_node(v)
        leaves.extend(u for u in neighbors if tree.degree(u) <= 1 and u not in required)
    return tree


def _tree_solution(instance: Instance, tree: nx.Graph) -> Solution:
    return Solution(edges=tuple(nx.bfs_edges(tree, instance.root)))


def _branch_and_bound(instance: Instance, graph: nx.Graph, objective: Callable[[nx.Graph], float],
                      base_bound: float, incumbent: Tuple[float, nx.Graph]) -> Tuple[float, nx.Graph, int]:
    """
    辺部分集合の分枝限定探索

    Args:
        instance: インスタンス
        graph: 探索対象グラフ
        objective: 木 -> 目的関数値
        base_bound: 採用辺の長さに加える下界（遅延下界など）
        incumbent: 初期暫定解 (値, 木)

    Returns:
        (float, nx.Graph, int): 最良値、その木、探索ノード数
    """
    edges = sorted(((min(u, v), max(u, v), float(d["weight"])) for u, v, d in graph.edges(data=True)),
                   key=lambda e: (e[2], e[0], e[1]))
    required = set(instance.required_points())
    uf = _UndoUnionFind(list(graph.nodes), required)
    chosen: List[Tuple[str, str, float]] = []
    best = {"value": incumbent[0], "tree": incumbent[1], "nodes": 0}

    def visit(i: int, partial: float):
        best["nodes"] += 1
        if uf.required_components == 1:
            tree = _root_tree(instance, chosen)
            value = objective(tree)
            if value < best["value"]:
                best["value"], best["tree"] = value, tree
            return
        if i == len(edges):
            return
        bound = partial + base_bound + (uf.required_components - 1) * edges[i][2]
        if bound >= best["value"]:
            return
        u, v, w = edges[i]
        if uf.union(u, v):
            chosen.append(edges[i])
            visit(i + 1, partial + w)
            chosen.pop()
            uf.undo()
        visit(i + 1, partial)

    visit(0, 0.0)
    return best["value"], best["tree"], best["nodes"]


def _shortest_path_tree(instance: Instance, graph: nx.Graph) -> nx.Graph:
    """根からの最短路木（暫定解）"""
    _, paths = nx.single_source_dijkstra(graph, instance.root, weight="weight")
    tree = nx.Graph()
    tree.add_node(instance.root)
    for t in instance.terminal_ids:
        path = paths[t]
        for u, v in zip(path, path[1:]):
            tree.add_edge(u, v, weight=graph[u][v]["weight"])
    if not nx.is_tree(tree):
        tree = nx.minimum_spanning_tree(tree, weight="weight")
    return tree


def brute_force_opt(instance: Instance, max_vertices: int = MAX_VERTICES,
                    max_edges: int = MAX_EDGES, helper=None) -> Tuple[Solution, float]:
    """
    目的関数（接続コスト＋遅延コスト）の厳密最適解

    Args:
        instance: インスタンス
        max_vertices: 頂点数の上限
        max_edges: 辺数の上限（どちらかを満たせば実行）
        helper: ログヘルパー

    Returns:
        (Solution, float): 最適解と最適値
    """
    helper = helper or get_default_helper()
    graph = _search_graph(instance, max_vertices, max_edges)

    def objective(tree: nx.Graph) -> float:
        return evaluate_cost(instance, _tree_solution(instance, tree)).total

    start = _shortest_path_tree(instance, graph)
    value, tree, nodes = _branch_and_bound(instance, graph, objective, delay_lower_bound(instance),
                                           (objective(start), start))
    solution = _tree_solution(instance, tree)
    costs = evaluate_cost(instance, solution)
    helper.log_debug("Oracle optimum found", {"instance": instance.name, "value": value,
                                              "search_nodes": nodes})
    return solution.with_costs(costs), costs.total


def exhaustive_smt(instance: Instance, max_vertices: int = MAX_VERTICES,
                   max_edges: int = MAX_EDGES) -> float:
    """
    T ∪ {r} を結ぶ最小長シュタイナー木の長さ（グラフ上の全探索）

    Args:
        instance: インスタンス
        max_vertices: 頂点数の上限
        max_edges: 辺数の上限

    Returns:
        float: C_SMT
    """
    graph = _search_graph(instance, max_vertices, max_edges)

    def objective(tree: nx.Graph) -> float:
        return math.fsum(d["weight"] for _, _, d in tree.edges(data=True))

    start = _shortest_path_tree(instance, graph)
    value, _, _ = _branch_and_bound(instance, graph, objective, 0.0, (objective(start), start))
    return value
