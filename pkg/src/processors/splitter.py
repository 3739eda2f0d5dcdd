#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
有向木の分割（ステップ2）
部分木ごとの5つの集計値 W, D, C, S1, S2 を下から上へ一度だけ計算し、
閾値ルール（ベースライン）または改良判定基準で辺を切断して分岐（森）を作ります。
"""

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from src.core.errors import InvariantError, ValidationError
from src.processors.arborescence import Arborescence
from src.utils.instrumentation import VisitCounter
from src.utils.log_helper import get_default_helper


class NodeAggregates(NamedTuple):
    """
    部分木 A_v の集計値

    W: 遅延重みの合計、D: Σ w(t)·c(r,t)、C: 辺コストの合計、
    S1: Σ_e W_q (W_v − W_q) c(e)、S2: Σ_e W_q c(e)（= Σ w(t)·dist(v, t)）
    """

    W: float
    D: float
    C: float
    S1: float
    S2: float

    @classmethod
    def leaf(cls, weight: float, root_distance: float) -> "NodeAggregates":
        return cls(weight, weight * root_distance, 0.0, 0.0, 0.0)

    def to_json(self) -> Dict[str, float]:
        return self._asdict()


def merge_aggregates(own_weight: float, root_distance: float,
                     children: List[Tuple[NodeAggregates, float]]) -> NodeAggregates:
    """
    子の集計値と親辺コストからノードの集計値を計算（O(子の数)）

    Args:
        own_weight: ノード自身の重み（シュタイナーノードは0）
        root_distance: c(r, v)
        children: (子の集計値, 子への辺コスト) のリスト

    Returns:
        NodeAggregates: ノードの集計値
    """
    W = own_weight
    D = own_weight * root_distance
    C = 0.0
    S2 = 0.0
    for agg, cost in children:
        W += agg.W
        D += agg.D
        C += agg.C + cost
        S2 += agg.S2 + agg.W * cost
    S1 = 0.0
    for agg, cost in children:
        rest = W - agg.W
        S1 += agg.S1 + rest * agg.S2 + agg.W * rest * cost
    return NodeAggregates(W, D, C, S1, S2)


def compute_aggregates(arb: Arborescence, start: int = 0,
                       counter: Optional[VisitCounter] = None) -> List[Optional[NodeAggregates]]:
    """
    全ノードの集計値を後行順で計算

    Args:
        arb: 有向木
        start: 対象部分木の根
        counter: 訪問カウンタ

    Returns:
        list: ノードインデックス -> NodeAggregates（部分木外は None）
    """
    aggregates: List[Optional[NodeAggregates]] = [None] * len(arb)
    for v in arb.postorder(start):
        aggregates[v] = merge_aggregates(
            arb.weight[v], arb.root_distance[v],
            [(aggregates[x], arb.edge_cost[x]) for x in arb.children[v]])
    if counter is not None:
        counter.tick("aggregates", len(arb))
    return aggregates


def criterion_lhs_rhs(agg: NodeAggregates, parent_edge_cost: float, mu: float) -> Tuple[float, float]:
    """
    改良判定基準の両辺

    lhs = 2·S1/W + D/W、rhs = (μ/2)(C + c(v,z)) + D/μ。lhs ≤ rhs なら辺 (v,z) を切断します。

    Args:
        agg: 部分木 A_z の集計値（W > 0）
        parent_edge_cost: c(v, z)
        mu: 閾値パラメータ（> 0）

    Returns:
        (float, float): (lhs, rhs)
    """
    if agg.W <= 0:
        raise ValidationError("criterion requires a subtree with positive weight (W > 0)")
    if mu <= 0:
        raise ValidationError("criterion requires mu > 0")
    lhs = 2.0 * agg.S1 / agg.W + agg.D / agg.W
    rhs = 0.5 * mu * (agg.C + parent_edge_cost) + agg.D / mu
    return lhs, rhs


@dataclass
class Component:
    """分岐の1成分（cut_cost が None なら根成分）"""

    arborescence: Arborescence
    origin: List[int]
    cut_cost: Optional[float]
    aggregates: NodeAggregates

    @property
    def is_root(self) -> bool:
        return self.cut_cost is None


@dataclass
class SplitResult:
    """分割結果"""

    method: str
    mu: float
    working: Arborescence
    components: List[Component]
    root_component: Component
    aggregates: List[Optional[NodeAggregates]] = field(repr=False)

    def all_components(self) -> List[Component]:
        return [self.root_component] + self.components

    def root_child_weights(self) -> List[Tuple[int, float]]:
        """根成分における根の子ごとの部分木重み"""
        working = self.working
        return [(x, self.aggregates[x].W) for x in working.children[working.root]]


def _cut(working: Arborescence, v: int, agg: NodeAggregates,
         components: List[Component]) -> None:
    parent = working.parent[v]
    working.children[parent].remove(v)
    sub, origin = working.extract(v)
    components.append(Component(sub, origin, working.edge_cost[v], agg))


def _finish(method: str, mu: float, working: Arborescence, components: List[Component],
            aggregates: List[Optional[NodeAggregates]], helper) -> SplitResult:
    root_sub, root_origin = working.extract(working.root)
    root_component = Component(root_sub, root_origin, None, aggregates[working.root])
    helper.log_debug("Arborescence split", {
        "method": method, "mu": mu, "components": len(components),
        "root_component_nodes": len(root_sub)})
    return SplitResult(method, mu, working, components, root_component, aggregates)


def split_improved(arb: Arborescence, mu: float, counter: Optional[VisitCounter] = None,
                   helper=None, enforce_root_weights: bool = True,
                   tolerance: float = 1e-9) -> SplitResult:
    """
    改良判定基準による分割

    後行順に各辺 (v,z) を一度だけ評価し、W_z > 0 かつ lhs ≤ rhs なら切断します。
    切断済みの子は親の集計値から除かれます。

    Args:
        arb: 有向木（変更しません）
        mu: 閾値パラメータ（> 0）
        counter: 訪問カウンタ
        helper: ログヘルパー
        enforce_root_weights: 根の子の部分木重み ≤ μ を強制するか（二分木のとき）
        tolerance: 重み比較の許容誤差

    Returns:
        SplitResult: 分割結果
    """
    if mu <= 0:
        raise ValidationError("mu must be positive")
    helper = helper or get_default_helper()
    working = arb.copy()
    aggregates: List[Optional[NodeAggregates]] = [None] * len(working)
    components: List[Component] = []
    order = working.postorder()
    for v in order:
        agg = merge_aggregates(
            working.weight[v], working.root_distance[v],
            [(aggregates[x], working.edge_cost[x]) for x in working.children[v]])
        aggregates[v] = agg
        if v == working.root or agg.W <= 0:
            continue
        lhs, rhs = criterion_lhs_rhs(agg, working.edge_cost[v], mu)
        if lhs <= rhs:
            _cut(working, v, agg, components)
    if counter is not None:
        counter.tick("split", len(order))

    result = _finish("improved", mu, working, components, aggregates, helper)
    limit = mu * (1.0 + tolerance) + tolerance
    heavy = [(x, w) for x, w in result.root_child_weights() if w > limit]
    if heavy:
        node, weight = heavy[0]
        message = (f"Root child subtree at {working.point[node]!r} has weight {weight} > mu = {mu}")
        if enforce_root_weights:
            raise InvariantError(message)
        helper.log_warning(message)
    return result


def split_baseline(arb: Arborescence, mu: float, counter: Optional[VisitCounter] = None,
                   helper=None) -> SplitResult:
    """
    閾値ルールによる分割: 部分木重み W_y > μ となる辺 (x,y) を切断

    Args:
        arb: 有向木（変更しません）
        mu: 閾値パラメータ（> 0）
        counter: 訪問カウンタ
        helper: ログヘルパー

    Returns:
        SplitResult: 分割結果（根成分はそのまま残す）
    """
    if mu <= 0:
        raise ValidationError("mu must be positive")
    helper = helper or get_default_helper()
    working = arb.copy()
    aggregates: List[Optional[NodeAggregates]] = [None] * len(working)
    components: List[Component] = []
    order = working.postorder()
    for v in order:
        agg = merge_aggregates(
            working.weight[v], working.root_distance[v],
            [(aggregates[x], working.edge_cost[x]) for x in working.children[v]])
        aggregates[v] = agg
        if v != working.root and agg.W > mu:
            _cut(working, v, agg, components)
    if counter is not None:
        counter.tick("split", len(order))
    return _finish("baseline", mu, working, components, aggregates, helper)


def split(arb: Arborescence, mu: float, method: str = "improved", **kwargs) -> SplitResult:
    """method に応じて split_improved / split_baseline を呼び出す"""
    if method == "improved":
        return split_improved(arb, mu, **kwargs)
    if method == "baseline":
        kwargs.pop("enforce_root_weights", None)
        kwargs.pop("tolerance", None)
        return split_baseline(arb, mu, **kwargs)
    raise ValidationError(f"Unknown splitter: {method}")
