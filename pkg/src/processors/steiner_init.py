#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
初期シュタイナー木の計算と二分化
メトリック閉包上の最小全域木（β=2）と Dreyfus–Wagner 動的計画法（β=1）を提供し、
得られた木を端子が葉・シュタイナーノードの出次数が2の r-有向木に変換します。
"""

import itertools
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from src.core.errors import InstanceTooLargeError, StructureError
from src.core.model import Instance
from src.processors.arborescence import Arborescence, NodeKind
from src.utils.log_helper import get_default_helper

EXACT_TERMINAL_LIMIT = 16

BETA = {"mst": 2.0, "exact": 1.0, "given": 1.0}


def mst_steiner(instance: Instance, helper=None) -> nx.Graph:
    """
    T ∪ {r} のメトリック閉包上の最小全域木（長さ ≤ 2·C_SMT）

    同長の辺は点IDの辞書順で先に挿入した辺を優先します（Kruskal の安定ソート）。

    Args:
        instance: インスタンス
        helper: ログヘルパー

    Returns:
        nx.Graph: 'weight' 属性付きの無向木
    """
    helper = helper or get_default_helper()
    required = sorted(instance.required_points())
    closure = nx.Graph()
    closure.add_nodes_from(required)
    for u, v in itertools.combinations(required, 2):
        closure.add_edge(u, v, weight=instance.distance(u, v))
    tree = nx.minimum_spanning_tree(closure, weight="weight", algorithm="kruskal")
    helper.log_debug("MST initial tree computed",
                     {"vertices": tree.number_of_nodes(), "length": tree.size(weight="weight")})
    return tree


def exact_steiner(instance: Instance, limit: int = EXACT_TERMINAL_LIMIT, helper=None) -> nx.Graph:
    """
    Dreyfus–Wagner 動的計画法による最小長シュタイナー木（点テーブル上）

    Args:
        instance: インスタンス
        limit: |T ∪ {r}| の上限
        helper: ログヘルパー

    Returns:
        nx.Graph: 'weight' 属性付きの無向木
    """
    helper = helper or get_default_helper()
    required = instance.required_points()
    if len(required) > limit:
        raise InstanceTooLargeError("exact_steiner terminal count |T ∪ {r}|", len(required), limit)

    tree = nx.Graph()
    tree.add_node(instance.root)
    terms = sorted(instance.terminal_ids)
    if not terms:
        return tree

    points = instance.points
    index = instance.metric.index
    dist = instance.metric.matrix
    n = len(points)
    m = len(terms)
    full = (1 << m) - 1
    term_idx = [index[t] for t in terms]

    dp = np.full((full + 1, n), np.inf)
    via = np.full((full + 1, n), -1, dtype=np.int64)
    split = np.zeros((full + 1, n), dtype=np.int64)
    for i, ti in enumerate(term_idx):
        dp[1 << i] = dist[ti]

    columns = np.arange(n)
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        rest = mask ^ low
        best = np.full(n, np.inf)
        best_split = np.zeros(n, dtype=np.int64)
        sub = rest
        while True:
            part = sub | low
            if part != mask:
                candidate = dp[part] + dp[mask ^ part]
                better = candidate < best
                best = np.where(better, candidate, best)
                best_split = np.where(better, part, best_split)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        # 閉包上の緩和: dp[mask][v] = min_u best[u] + c(u, v)
        relaxed = best[:, None] + dist
        source = np.argmin(relaxed, axis=0)
        dp[mask] = relaxed[source, columns]
        via[mask] = source
        split[mask] = best_split

    edges: List[Tuple[int, int]] = []
    stack = [(full, index[instance.root])]
    while stack:
        mask, v = stack.pop()
        if mask & (mask - 1) == 0:
            t = term_idx[mask.bit_length() - 1]
            if t != v:
                edges.append((v, t))
            continue
        u = int(via[mask, v])
        if u != v:
            edges.append((u, v))
        part = int(split[mask, u])
        stack.append((part, u))
        stack.append((mask ^ part, u))

    union = nx.Graph()
    union.add_node(instance.root)
    for u, v in edges:
        union.add_edge(points[u], points[v], weight=float(dist[u, v]))
    # 分岐間で同じ頂点を再利用すると閉路ができるため、和集合の最小全域木を取る
    tree = nx.minimum_spanning_tree(union, weight="weight") if not nx.is_tree(union) else union
    _prune_steiner_leaves(tree, set(required))
    helper.log_debug("Exact Steiner tree computed",
                     {"terminals": m, "length": float(dp[full, index[instance.root]])})
    return tree


def _prune_steiner_leaves(tree: nx.Graph, required: set):
    """必須でない葉を繰り返し除去（その場で変更）"""
    leaves = [v for v in tree.nodes if tree.degree(v) <= 1 and v not in required]
    while leaves:
        v = leaves.pop()
        neighbors = list(tree.neighbors(v))
        tree.remove_node(v)
        for u in neighbors:
            if tree.degree(u) <= 1 and u not in required:
                leaves.append(u)


def tree_length(tree: nx.Graph) -> float:
    return float(tree.size(weight="weight"))


def binarize(tree: nx.Graph, instance: Instance) -> Arborescence:
    """
    無向木を二分 r-有向木に変換

    内部端子は同位置のシュタイナーノード＋コスト0の葉辺に置き換え、出次数3以上のノードは
    同位置シュタイナーノードの鎖に展開し、出次数1のシュタイナーノードは省略します。
    根の出次数は制限しません。

    Args:
        tree: T ∪ {r} を含む無向木
        instance: インスタンス

    Returns:
        Arborescence: 二分化した有向木
    """
    if instance.root not in tree:
        raise StructureError("Initial tree does not contain the root", instance.root)
    if tree.number_of_nodes() > 1 and not nx.is_tree(tree):
        raise StructureError("Initial graph is not a tree", instance.root)
    for t in instance.terminal_ids:
        if t not in tree:
            raise StructureError("Initial tree does not contain terminal", t)

    weights = instance.weights
    rd = instance.root_distances
    children: Dict[str, List[str]] = {
        parent: sorted(kids) for parent, kids in nx.bfs_successors(tree, instance.root)
    }

    arb = Arborescence()
    arb.add_node(instance.root, NodeKind.ROOT)
    stack = [(child, 0) for child in reversed(children.get(instance.root, []))]
    while stack:
        vertex, attach = stack.pop()
        kids = children.get(vertex, [])
        cost = instance.distance(arb.point[attach], vertex)
        if vertex in weights:
            if not kids:
                arb.add_node(vertex, NodeKind.TERMINAL, attach, cost, weights[vertex], rd[vertex])
                continue
            node = arb.add_node(vertex, NodeKind.STEINER, attach, cost, 0.0, rd[vertex])
            items = [("leaf", vertex)] + [("vertex", k) for k in kids]
        else:
            if not kids:
                continue
            if len(kids) == 1:
                # 出次数1のシュタイナー頂点は省略
                stack.append((kids[0], attach))
                continue
            node = arb.add_node(vertex, NodeKind.STEINER, attach, cost, 0.0, rd[vertex])
            items = [("vertex", k) for k in kids]
        _attach_chain(arb, node, items, stack, weights)
    return arb


def _attach_chain(arb: Arborescence, node: int, items: List[Tuple[str, str]], stack: list,
                  weights) -> None:
    """ノードに子を2つずつ割り当て、余りは同位置コピーの鎖に回す"""
    current = node
    point = arb.point[node]
    while len(items) > 2:
        _place(arb, current, items[0], stack, weights)
        current = arb.add_node(point, NodeKind.STEINER, current, 0.0, 0.0, arb.root_distance[node])
        items = items[1:]
    for item in items:
        _place(arb, current, item, stack, weights)


def _place(arb: Arborescence, parent: int, item: Tuple[str, str], stack: list, weights) -> None:
    what, vertex = item
    if what == "leaf":
        arb.add_node(vertex, NodeKind.TERMINAL, parent, 0.0, weights[vertex], arb.root_distance[parent])
    else:
        stack.append((vertex, parent))


def initial_arborescence(instance: Instance, beta_method: str = "mst",
                         exact_limit: int = EXACT_TERMINAL_LIMIT,
                         helper=None) -> Tuple[Arborescence, str, Optional[float]]:
    """
    ステップ1: 初期有向木を構築

    Args:
        instance: インスタンス
        beta_method: "mst" / "exact"（インスタンスに初期木があれば "given"）
        exact_limit: 厳密解の端子数上限
        helper: ログヘルパー

    Returns:
        (Arborescence, str, float|None): 有向木、実際に用いた手法、無向木の長さ
    """
    if instance.arborescence is not None:
        return Arborescence.from_parent_edges(instance, instance.arborescence), "given", None
    if beta_method == "exact":
        tree = exact_steiner(instance, limit=exact_limit, helper=helper)
    elif beta_method == "mst":
        tree = mst_steiner(instance, helper=helper)
    else:
        raise ValueError(f"Unknown beta method: {beta_method}")
    arb = binarize(tree, instance)
    return arb, beta_method, tree_length(tree)
