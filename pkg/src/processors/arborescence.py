#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
r-有向木（アーボレッセンス）クラス
ノードは整数インデックスで管理し、並列リストに属性を保持します（10^6ノード規模を想定）。
"""

import math
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

from src.core.errors import StructureError, ValidationError
from src.core.model import Instance, Solution
from src.core.metric import COPY_SEPARATOR


class NodeKind(str, Enum):
    """ノード種別"""

    ROOT = "root"
    TERMINAL = "terminal"
    STEINER = "steiner"


class Arborescence:
    """根から外向きに辺を持つ木"""

    def __init__(self):
        """空の木を初期化（最初に追加したノードが根）"""
        self.point: List[str] = []
        self.kind: List[NodeKind] = []
        self.parent: List[int] = []
        self.children: List[List[int]] = []
        self.edge_cost: List[float] = []
        self.weight: List[float] = []
        self.root_distance: List[float] = []

    root = 0

    def __len__(self) -> int:
        return len(self.point)

    def add_node(self, point: str, kind: NodeKind, parent: int = -1, edge_cost: float = 0.0,
                 weight: float = 0.0, root_distance: float = 0.0) -> int:
        """
        ノードを追加

        Args:
            point: ノードの位置（点ID）
            kind: ノード種別
            parent: 親ノード（根は -1）
            edge_cost: 親辺のコスト
            weight: 遅延重み（端子のみ）
            root_distance: c(r, point)

        Returns:
            int: 追加したノードのインデックス
        """
        index = len(self.point)
        self.point.append(point)
        self.kind.append(kind)
        self.parent.append(parent)
        self.children.append([])
        self.edge_cost.append(float(edge_cost))
        self.weight.append(float(weight))
        self.root_distance.append(float(root_distance))
        if parent >= 0:
            self.children[parent].append(index)
        return index

    @classmethod
    def from_parent_edges(cls, instance: Instance, edges: Iterable[Tuple[str, str]]) -> "Arborescence":
        """
        (親, 子) の点ID辺リストから有向木を構築（二分化は行わない）

        Args:
            instance: インスタンス
            edges: 親から子への辺

        Returns:
            Arborescence: 構築した有向木
        """
        children: Dict[str, List[str]] = {}
        has_parent = set()
        for parent, child in edges:
            if child in has_parent:
                raise StructureError("Vertex has two parents in given arborescence", child)
            if child == instance.root:
                raise StructureError("Root has a parent in given arborescence", child)
            for p in (parent, child):
                if p not in instance.metric:
                    raise ValidationError(f"Arborescence vertex {p!r} is not a point of the metric")
            has_parent.add(child)
            children.setdefault(parent, []).append(child)

        arb = cls()
        rd = instance.root_distances
        weights = instance.weights
        arb.add_node(instance.root, NodeKind.ROOT)
        stack = [(instance.root, 0)]
        visited = {instance.root}
        while stack:
            point, node = stack.pop()
            for child in children.get(point, []):
                if child in visited:
                    raise StructureError("Cycle in given arborescence", child)
                visited.add(child)
                kind = NodeKind.TERMINAL if child in weights else NodeKind.STEINER
                index = arb.add_node(child, kind, node, instance.distance(point, child),
                                     weights.get(child, 0.0), rd[child])
                stack.append((child, index))
        if len(visited) != len(has_parent) + 1:
            orphan = sorted(has_parent - visited)[0]
            raise StructureError("Vertex not reachable from root in given arborescence", orphan)
        arb.validate(instance, binary=False)
        return arb

    def postorder(self, start: int = 0) -> List[int]:
        """子が親より先に来る順序（反復実装）"""
        order: List[int] = []
        stack = [start]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(self.children[v])
        order.reverse()
        return order

    def preorder(self, start: int = 0) -> List[int]:
        """親が子より先に来る順序"""
        order: List[int] = []
        stack = [start]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    def connection_cost(self, start: int = 0) -> float:
        """部分木の辺コスト合計（start の親辺は含まない）"""
        return math.fsum(self.edge_cost[v] for v in self.preorder(start) if v != start)

    def terminal_nodes(self, start: int = 0) -> List[int]:
        return [v for v in self.preorder(start) if self.kind[v] == NodeKind.TERMINAL]

    def copy(self) -> "Arborescence":
        other = Arborescence()
        other.point = list(self.point)
        other.kind = list(self.kind)
        other.parent = list(self.parent)
        other.children = [list(c) for c in self.children]
        other.edge_cost = list(self.edge_cost)
        other.weight = list(self.weight)
        other.root_distance = list(self.root_distance)
        return other

    def extract(self, start: int) -> Tuple["Arborescence", List[int]]:
        """
        部分木を独立した有向木として取り出す

        Args:
            start: 部分木の根ノード

        Returns:
            (Arborescence, list): 新しい木と、新インデックス -> 元インデックスの対応
        """
        sub = Arborescence()
        origin: List[int] = []
        local: Dict[int, int] = {}
        for v in self.preorder(start):
            parent = local[self.parent[v]] if v != start else -1
            cost = self.edge_cost[v] if v != start else 0.0
            local[v] = sub.add_node(self.point[v], self.kind[v], parent, cost,
                                    self.weight[v], self.root_distance[v])
            origin.append(v)
        return sub, origin

    def is_binary(self, start: int = 0) -> bool:
        """端子は出次数0、シュタイナーノードは出次数2（根は無制限）"""
        for v in self.preorder(start):
            k = self.kind[v]
            if k == NodeKind.TERMINAL and self.children[v]:
                return False
            if k == NodeKind.STEINER and len(self.children[v]) != 2:
                return False
        return True

    def validate(self, instance: Optional[Instance] = None, binary: bool = True,
                 tolerance: float = 1e-9):
        """
        構造の不変条件を検証

        Args:
            instance: 指定時は端子の網羅性と辺コスト＝距離を確認
            binary: 二分化後の次数条件を確認するか
            tolerance: 辺コスト比較の許容誤差
        """
        if not self.point or self.kind[0] != NodeKind.ROOT:
            raise StructureError("Arborescence must start with a root node")
        seen_terminals = set()
        for v in self.preorder():
            k = self.kind[v]
            if k == NodeKind.ROOT and v != 0:
                raise StructureError("Second root node", self.point[v])
            if not self.children[v] and k == NodeKind.STEINER:
                raise StructureError("Steiner leaf in arborescence", self.point[v])
            if binary and k == NodeKind.TERMINAL and self.children[v]:
                raise StructureError("Terminal with children in binary arborescence", self.point[v])
            if binary and k == NodeKind.STEINER and len(self.children[v]) != 2:
                raise StructureError(
                    f"Steiner node with out-degree {len(self.children[v])}", self.point[v])
            if k == NodeKind.TERMINAL:
                if self.point[v] in seen_terminals:
                    raise StructureError("Terminal appears twice", self.point[v])
                seen_terminals.add(self.point[v])
            if instance is not None and v != 0:
                expected = instance.distance(self.point[self.parent[v]], self.point[v])
                if abs(expected - self.edge_cost[v]) > tolerance * max(1.0, expected):
                    raise StructureError("Edge cost differs from metric distance", self.point[v])
        if instance is not None:
            missing = set(instance.terminal_ids) - seen_terminals
            if missing:
                raise StructureError("Terminal missing from arborescence", sorted(missing)[0])

    def node_labels(self, nodes: Optional[Iterable[int]] = None) -> Dict[int, str]:
        """
        ノードに解の頂点ラベルを割り当てる

        根・端子ノードは点IDそのもの、シュタイナーノードは点IDが未使用ならそのまま、
        使用済みなら "<点ID>#<n>" とします。

        Args:
            nodes: 対象ノード（省略時は全ノード）

        Returns:
            dict: ノード -> ラベル
        """
        nodes = list(range(len(self))) if nodes is None else list(nodes)
        labels: Dict[int, str] = {}
        used = set()
        for v in nodes:
            if self.kind[v] != NodeKind.STEINER:
                labels[v] = self.point[v]
                used.add(self.point[v])
        copies: Dict[str, int] = {}
        for v in nodes:
            if self.kind[v] != NodeKind.STEINER:
                continue
            point = self.point[v]
            if point not in used:
                labels[v] = point
                used.add(point)
            else:
                copies[point] = copies.get(point, 0) + 1
                labels[v] = f"{point}{COPY_SEPARATOR}{copies[point]}"
        return labels

    def to_solution(self) -> Solution:
        """木全体をそのまま解に変換"""
        labels = self.node_labels()
        edges = [(labels[self.parent[v]], labels[v]) for v in range(1, len(self))]
        positions = {labels[v]: self.point[v] for v in labels if labels[v] != self.point[v]}
        return Solution(edges=tuple(edges), positions=positions)
