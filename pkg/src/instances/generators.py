#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
インスタンス生成
下界ギャップ族、乱数インスタンス族（euclidean2d / random-graph / star-heavy）、
6点の図示用インスタンス、スケーリング計測用の合成有向木を生成します。
乱数は numpy.random.default_rng(seed) のみを使い、同じ seed なら同じインスタンスになります。
"""

import math
from typing import List, Tuple

import networkx as nx
import numpy as np

from src.core.errors import ValidationError
from src.core.metric import EuclideanMetric, GraphMetric
from src.core.model import Instance, make_instance
from src.processors.arborescence import Arborescence, NodeKind

FAMILIES = ("euclidean2d", "random-graph", "star-heavy")

GAP_TERMINAL_WEIGHT = 1.0 / math.sqrt(2.0)


def _subdivide(length: float, max_edge: float) -> List[float]:
    """長さ length を ⌈length/max_edge⌉ 本の等長辺に分割（最後の辺で合計を合わせる）"""
    n = max(1, math.ceil(length / max_edge - 1e-12))
    edges = [length / n] * (n - 1)
    edges.append(length - math.fsum(edges))
    return edges


def _add_path(graph: nx.Graph, start: str, end: str, path: int, edges: List[float]):
    vertices = [start] + [f"p{path}_{i}" for i in range(1, len(edges))] + [end]
    for (u, v), w in zip(zip(vertices, vertices[1:]), edges):
        graph.add_edge(u, v, weight=w)
    return vertices[1:-1]


def gen_gap(k: int, delta: float, delta_prime: float) -> Instance:
    """
    下界 C_SMT + D との比が 1 + 1/√2 に近づくインスタンス族

    根 r と中継点 c を長さ2のパス（辺長 ≤ δ）で結び、c から各 t_i へ長さ 1/√2 のパス（辺長 ≤ δ′）、
    r から各 t_i へ長さ1の星辺を張ります。r 以外の全頂点が端子で、t_i の重みは 1/√2、他は0です。

    Args:
        k: t_i の数（≥ 1）
        delta: r–c パスの辺長上限
        delta_prime: c–t_i パスの辺長上限（0 < δ < δ′ < 1/k）

    Returns:
        Instance: グラフメトリックのインスタンス
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be an integer >= 1 (got {k})")
    if not (0 < delta < delta_prime < 1.0 / k):
        raise ValidationError(
            f"gap parameters must satisfy 0 < delta < delta_prime < 1/k "
            f"(got delta={delta}, delta_prime={delta_prime}, k={k})")

    graph = nx.Graph()
    graph.add_node("r")
    rc_edges = _subdivide(2.0, delta)
    ct_edges = _subdivide(GAP_TERMINAL_WEIGHT, delta_prime)
    path_vertices = _add_path(graph, "r", "c", 0, rc_edges)
    terminals: List[Tuple[str, float]] = [("c", 0.0)] + [(p, 0.0) for p in path_vertices]
    for i in range(1, k + 1):
        t = f"t{i}"
        inner = _add_path(graph, "c", t, i, ct_edges)
        graph.add_edge("r", t, weight=1.0)
        terminals.append((t, GAP_TERMINAL_WEIGHT))
        terminals.extend((p, 0.0) for p in inner)

    meta = {
        "family": "gap", "k": k, "delta": delta, "delta_prime": delta_prime,
        "rc_edge": rc_edges[0], "ct_edge": ct_edges[0],
        # 有限の δ′ による式との差の上限
        "deviation_bound": delta_prime * k,
    }
    return make_instance(GraphMetric(graph), "r", terminals, name=f"gap-k{k}", meta=meta)


def _mixed_weights(rng: np.random.Generator, n: int) -> List[float]:
    """約3割が0、残りが [0.1, 2) の一様分布"""
    zero = rng.random(n) < 0.3
    values = rng.uniform(0.1, 2.0, n)
    return [0.0 if z else float(v) for z, v in zip(zero, values)]


def _random_euclidean(n: int, rng: np.random.Generator, name: str) -> Instance:
    steiner = max(1, n // 2)
    ids = ["r"] + [f"t{i}" for i in range(1, n + 1)] + [f"s{i}" for i in range(1, steiner + 1)]
    coords = rng.random((len(ids), 2))
    weights = _mixed_weights(rng, n)
    terminals = [(f"t{i}", weights[i - 1]) for i in range(1, n + 1)]
    return make_instance(EuclideanMetric(ids, coords), "r", terminals, name=name,
                         meta={"family": "euclidean2d"})


def _random_graph(n: int, rng: np.random.Generator, name: str) -> Instance:
    steiner = max(1, n // 2)
    ids = ["r"] + [f"t{i}" for i in range(1, n + 1)] + [f"s{i}" for i in range(1, steiner + 1)]
    order = [ids[0]] + [ids[i] for i in 1 + rng.permutation(len(ids) - 1)]
    graph = nx.Graph()
    graph.add_nodes_from(ids)
    # ランダム全域木で連結性を保証し、余分な辺を加える
    for i in range(1, len(order)):
        j = int(rng.integers(0, i))
        graph.add_edge(order[i], order[j], weight=float(rng.integers(1, 11)))
    extra = max(1, len(ids) // 2)
    for _ in range(extra):
        u, v = rng.choice(len(ids), size=2, replace=False)
        if not graph.has_edge(ids[u], ids[v]):
            graph.add_edge(ids[u], ids[v], weight=float(rng.integers(1, 11)))
    weights = _mixed_weights(rng, n)
    terminals = [(f"t{i}", weights[i - 1]) for i in range(1, n + 1)]
    return make_instance(GraphMetric(graph), "r", terminals, name=name,
                         meta={"family": "random-graph"})


def _star_heavy(n: int, rng: np.random.Generator, name: str) -> Instance:
    """根から放射状に伸びる3〜5本の腕。腕の先端が重く、途中の点はほぼ重み0"""
    spokes = int(min(n, rng.integers(3, 6)))
    counts = [n // spokes + (1 if j < n % spokes else 0) for j in range(spokes)]
    ids = ["r"]
    coords = [(0.0, 0.0)]
    terminals: List[Tuple[str, float]] = []
    for j, count in enumerate(counts):
        angle = 2.0 * math.pi * j / spokes
        for i in range(1, count + 1):
            point = f"a{j + 1}_{i}"
            ids.append(point)
            coords.append((i * math.cos(angle), i * math.sin(angle)))
            if i == count:
                weight = float(rng.uniform(0.5, 2.0))
            elif rng.random() < 0.25:
                weight = float(rng.uniform(0.0, 0.05))
            else:
                weight = 0.0
            terminals.append((point, weight))
    return make_instance(EuclideanMetric(ids, coords), "r", terminals, name=name,
                         meta={"family": "star-heavy", "spokes": spokes})


def gen_random(n_terminals: int, seed: int, family: str = "euclidean2d") -> Instance:
    """
    乱数インスタンスを生成

    Args:
        n_terminals: 端子数（≥ 1）
        seed: 乱数シード
        family: "euclidean2d" / "random-graph" / "star-heavy"

    Returns:
        Instance: 生成したインスタンス
    """
    if n_terminals < 1:
        raise ValidationError(f"n_terminals must be >= 1 (got {n_terminals})")
    if family not in FAMILIES:
        raise ValidationError(f"Unknown instance family: {family}")
    rng = np.random.default_rng(seed)
    name = f"{family}-n{n_terminals}-s{seed}"
    if family == "euclidean2d":
        return _random_euclidean(n_terminals, rng, name)
    if family == "random-graph":
        return _random_graph(n_terminals, rng, name)
    return _star_heavy(n_terminals, rng, name)


def gen_unit_path() -> Instance:
    """
    6端子の図示用インスタンス

    7点の完全単位グラフ、根 r、端子 v0..v5（重みは v5 と v0 が1、他は0）、
    初期有向木はパス r→v5→v4→v3→v2→v1→v0 です。

    Returns:
        Instance: 初期有向木付きのインスタンス
    """
    points = ["r"] + [f"v{i}" for i in range(6)]
    graph = nx.complete_graph(points)
    nx.set_edge_attributes(graph, 1.0, "weight")
    weights = {"v0": 1.0, "v5": 1.0}
    terminals = [(f"v{i}", weights.get(f"v{i}", 0.0)) for i in range(6)]
    path = ["r", "v5", "v4", "v3", "v2", "v1", "v0"]
    arborescence = tuple(zip(path, path[1:]))
    return make_instance(GraphMetric(graph), "r", terminals, name="unit-path6",
                         arborescence=arborescence, meta={"family": "unit-path6"})


def synthetic_arborescence(n_terminals: int, seed: int) -> Arborescence:
    """
    メトリック閉包を作らずにランダム二分有向木を直接生成（スケーリング計測用）

    辺コストは [0.1, 1) の一様分布、c(r, v) は木上の路長（木メトリック）です。

    Args:
        n_terminals: 葉（端子）の数
        seed: 乱数シード

    Returns:
        Arborescence: 二分有向木
    """
    if n_terminals < 1:
        raise ValidationError(f"n_terminals must be >= 1 (got {n_terminals})")
    rng = np.random.default_rng(seed)
    costs = rng.uniform(0.1, 1.0, 2 * n_terminals).tolist()
    weights = rng.uniform(0.0, 1.0, n_terminals)
    weights[rng.random(n_terminals) < 0.3] = 0.0
    weights = weights.tolist()
    fractions = rng.random(n_terminals).tolist()

    arb = Arborescence()
    arb.add_node("r", NodeKind.ROOT)
    stack = [(0, n_terminals)]
    edge = terminal = steiner = 0
    while stack:
        parent, leaves = stack.pop()
        cost = costs[edge]
        edge += 1
        distance = arb.root_distance[parent] + cost
        if leaves == 1:
            arb.add_node(f"t{terminal + 1}", NodeKind.TERMINAL, parent, cost, weights[terminal],
                         distance)
            terminal += 1
            continue
        node = arb.add_node(f"s{steiner + 1}", NodeKind.STEINER, parent, cost, 0.0, distance)
        left = 1 + int(fractions[steiner] * (leaves - 1))
        steiner += 1
        stack.append((node, leaves - left))
        stack.append((node, left))
    return arb
