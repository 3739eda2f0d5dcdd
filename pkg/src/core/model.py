#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
インスタンス・解・コスト評価
目的関数（接続コスト＋遅延コスト）と下界 C_SMT + D を計算します。
"""

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from src.core.errors import StructureError, ValidationError
from src.core.metric import Metric

Edge = Tuple[str, str]


@dataclass(frozen=True)
class Terminal:
    """端子（シンク）と遅延重み"""

    id: str
    weight: float


@dataclass(frozen=True, eq=False)
class Instance:
    """
    一様コスト距離シュタイナー木問題のインスタンス

    metric: メトリック空間、root: 根の点ID、terminals: 端子と重み。
    arborescence は任意の初期有向木（親, 子）の辺リストで、与えられた場合は初期木計算を省略します。
    """

    metric: Metric
    root: str
    terminals: Tuple[Terminal, ...]
    name: str = ""
    arborescence: Optional[Tuple[Edge, ...]] = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(self.terminals))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        if self.arborescence is not None:
            object.__setattr__(self, "arborescence",
                               tuple((str(p), str(c)) for p, c in self.arborescence))
        self._validate()

    def _validate(self):
        """インスタンスの不変条件を検証"""
        if self.root not in self.metric:
            raise ValidationError(f"Root {self.root!r} is not a point of the metric")
        seen = set()
        for terminal in self.terminals:
            if terminal.id in seen:
                raise ValidationError(f"Duplicate terminal id {terminal.id!r}")
            seen.add(terminal.id)
            if terminal.id == self.root:
                raise ValidationError(f"Root {self.root!r} must not be a terminal")
            if terminal.id not in self.metric:
                raise ValidationError(f"Terminal {terminal.id!r} is not a point of the metric")
            if not isinstance(terminal.weight, (int, float)) or not math.isfinite(terminal.weight):
                raise ValidationError(f"Terminal {terminal.id!r} has non-finite weight")
            if terminal.weight < 0:
                raise ValidationError(f"Terminal {terminal.id!r} has negative weight")

    @property
    def points(self) -> Tuple[str, ...]:
        return self.metric.point_ids

    @cached_property
    def weights(self) -> Mapping[str, float]:
        """端子ID -> 遅延重み"""
        return MappingProxyType({t.id: float(t.weight) for t in self.terminals})

    @property
    def terminal_ids(self) -> List[str]:
        return [t.id for t in self.terminals]

    @cached_property
    def root_distances(self) -> Mapping[str, float]:
        """根から全点への距離 c(r, ·)"""
        return MappingProxyType(dict(self.metric.distances_from(self.root)))

    def distance(self, u: str, v: str) -> float:
        if u == self.root:
            return self.root_distances[v]
        if v == self.root:
            return self.root_distances[u]
        return self.metric.distance(u, v)

    def required_points(self) -> List[str]:
        """T ∪ {r}（根を先頭に）"""
        return [self.root] + self.terminal_ids

    def total_weight(self) -> float:
        return math.fsum(t.weight for t in self.terminals)


@dataclass(frozen=True)
class CostBreakdown:
    """接続コスト・遅延コスト・総コスト"""

    connection_cost: float
    delay_cost: float
    total: float

    def to_json(self) -> Dict[str, float]:
        return {"connection": self.connection_cost, "delay": self.delay_cost, "total": self.total}


@dataclass(frozen=True)
class Solution:
    """
    解（木の辺集合）

    頂点ラベルは点IDそのもの、または同位置コピー "<点ID>#<n>"（positions で点IDに対応付け）です。
    """

    edges: Tuple[Edge, ...]
    positions: Mapping[str, str] = field(default_factory=dict)
    costs: Optional[CostBreakdown] = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((str(u), str(v)) for u, v in self.edges))
        object.__setattr__(self, "positions", MappingProxyType(dict(self.positions)))

    def position(self, label: str) -> str:
        return self.positions.get(label, label)

    def vertices(self) -> List[str]:
        seen = {}
        for u, v in self.edges:
            seen.setdefault(u, None)
            seen.setdefault(v, None)
        return list(seen)

    def with_costs(self, costs: CostBreakdown) -> "Solution":
        return Solution(self.edges, self.positions, costs)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"edges": [[u, v] for u, v in self.edges]}
        if self.positions:
            data["positions"] = dict(self.positions)
        if self.costs is not None:
            data["costs"] = self.costs.to_json()
        return data


def _tree_root_paths(instance: Instance, solution: Solution) -> Dict[str, float]:
    """
    解が根と全端子を含む木であることを確認し、根から各頂点への木上の距離を返す

    Args:
        instance: インスタンス
        solution: 解

    Returns:
        dict: 頂点ラベル -> 根からの木上の路長
    """
    for label in solution.vertices():
        if solution.position(label) not in instance.metric:
            raise StructureError("Solution vertex has no position in the metric", label)

    graph = nx.Graph()
    graph.add_node(instance.root)
    for u, v in solution.edges:
        if u == v:
            raise StructureError("Self-loop in solution", u)
        if graph.has_edge(u, v):
            raise StructureError(f"Duplicate edge {u}-{v} in solution", u)
        graph.add_edge(u, v)

    for terminal in instance.terminal_ids:
        if terminal not in graph:
            raise StructureError("Terminal missing from solution", terminal)

    if graph.number_of_edges() != graph.number_of_nodes() - 1 or not nx.is_connected(graph):
        reachable = nx.node_connected_component(graph, instance.root)
        for label in [instance.root] + instance.terminal_ids + list(graph.nodes):
            if label not in reachable:
                raise StructureError("Vertex unreachable from root", label)
        cycle = nx.find_cycle(graph, source=instance.root)
        raise StructureError("Solution is not a tree (cycle found)", cycle[0][0])

    distance = {instance.root: 0.0}
    queue = deque([instance.root])
    while queue:
        x = queue.popleft()
        px = solution.position(x)
        for y in graph.neighbors(x):
            if y not in distance:
                distance[y] = distance[x] + instance.distance(px, solution.position(y))
                queue.append(y)
    return distance


def evaluate_cost(instance: Instance, solution: Solution) -> CostBreakdown:
    """
    解の総コストを厳密に評価する

    Args:
        instance: インスタンス
        solution: 解

    Returns:
        CostBreakdown: 接続コスト・遅延コスト・総コスト
    """
    distance = _tree_root_paths(instance, solution)
    connection = math.fsum(
        instance.distance(solution.position(u), solution.position(v)) for u, v in solution.edges)
    delay = math.fsum(t.weight * distance[t.id] for t in instance.terminals)
    return CostBreakdown(connection_cost=connection, delay_cost=delay, total=connection + delay)


def delay_lower_bound(instance: Instance) -> float:
    """D(T, r, w) = Σ_t w(t)·c(r, t)"""
    rd = instance.root_distances
    return math.fsum(t.weight * rd[t.id] for t in instance.terminals)


def lower_bound(instance: Instance, smt_cost: float) -> float:
    """
    下界 C_SMT + D

    Args:
        instance: インスタンス
        smt_cost: 最小シュタイナー木長（またはその下界）

    Returns:
        float: 目的関数の下界
    """
    return smt_cost + delay_lower_bound(instance)


def make_instance(metric: Metric, root: str, terminals: Sequence[Tuple[str, float]], **kwargs) -> Instance:
    """(id, weight) の列からインスタンスを生成する簡易関数"""
    return Instance(metric=metric, root=root,
                    terminals=tuple(Terminal(str(t), float(w)) for t, w in terminals), **kwargs)
