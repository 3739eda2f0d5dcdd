#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
参照実装（二次時間）
集計値・ポートコスト・分割を定義どおりに毎回計算し直します。テストでの照合用です。
"""

import math
from collections import deque
from typing import Dict, List, Optional, Set

from src.processors.arborescence import Arborescence, NodeKind
from src.processors.splitter import NodeAggregates, criterion_lhs_rhs


def _subtree(arb: Arborescence, v: int, removed: Optional[Set[int]] = None) -> List[int]:
    """v の部分木（removed のノード以下は除く）"""
    removed = removed or set()
    nodes, stack = [], [v]
    while stack:
        x = stack.pop()
        nodes.append(x)
        stack.extend(y for y in arb.children[x] if y not in removed)
    return nodes


def _aggregate(arb: Arborescence, v: int, removed: Optional[Set[int]] = None) -> NodeAggregates:
    nodes = _subtree(arb, v, removed)
    weight = {x: arb.weight[x] for x in nodes}
    for x in reversed(nodes):
        if x != v:
            weight[arb.parent[x]] += weight[x]
    W = weight[v]
    D = math.fsum(arb.weight[x] * arb.root_distance[x] for x in nodes)
    edges = [x for x in nodes if x != v]
    C = math.fsum(arb.edge_cost[q] for q in edges)
    S1 = math.fsum(weight[q] * (W - weight[q]) * arb.edge_cost[q] for q in edges)
    S2 = math.fsum(weight[q] * arb.edge_cost[q] for q in edges)
    return NodeAggregates(W, D, C, S1, S2)


def naive_aggregates(arb: Arborescence) -> List[NodeAggregates]:
    """
    全ノードの集計値を定義どおりに計算

    Args:
        arb: 有向木

    Returns:
        list: ノードインデックス -> NodeAggregates
    """
    return [_aggregate(arb, v) for v in range(len(arb))]


def _tree_distances(arb: Arborescence, source: int) -> Dict[int, float]:
    """木を無向とみなした source からの距離"""
    distance = {source: 0.0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        neighbors = [(y, arb.edge_cost[y]) for y in arb.children[x]]
        if arb.parent[x] >= 0:
            neighbors.append((arb.parent[x], arb.edge_cost[x]))
        for y, cost in neighbors:
            if y not in distance:
                distance[y] = distance[x] + cost
                queue.append(y)
    return distance


def naive_port_costs(component: Arborescence) -> List[float]:
    """
    各ノードをポートにしたときのコストを木の路長から直接計算

    Args:
        component: 成分

    Returns:
        list: ノードインデックス -> c(r,v) + C + Σ w(t)(c(r,v) + dist(v,t))
    """
    C = math.fsum(component.edge_cost[v] for v in range(1, len(component)))
    terminals = [v for v in range(len(component)) if component.kind[v] == NodeKind.TERMINAL]
    costs = []
    for v in range(len(component)):
        distance = _tree_distances(component, v)
        rd = component.root_distance[v]
        delay = math.fsum(component.weight[t] * (rd + distance[t]) for t in terminals)
        costs.append(rd + C + delay)
    return costs


def naive_split(arb: Arborescence, mu: float, method: str = "improved") -> List[int]:
    """
    分割の参照実装: 後行順に各辺の判定式を部分木全体から計算し直す

    Args:
        arb: 有向木
        mu: 閾値パラメータ
        method: "improved" / "baseline"

    Returns:
        list: 切断した辺の子ノード（切断順）
    """
    removed: Set[int] = set()
    cuts: List[int] = []
    for v in arb.postorder():
        if v == arb.root:
            continue
        agg = _aggregate(arb, v, removed)
        if method == "baseline":
            cut = agg.W > mu
        elif agg.W > 0:
            lhs, rhs = criterion_lhs_rhs(agg, arb.edge_cost[v], mu)
            cut = lhs <= rhs
        else:
            cut = False
        if cut:
            removed.add(v)
            cuts.append(v)
    return cuts
