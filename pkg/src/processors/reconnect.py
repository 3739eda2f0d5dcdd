#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
成分の再接続（ステップ3）
各成分のポート候補コストを根のコストから辺ごとの漸化式で線形時間に伝播し、
最小コストのポートを根へ直接接続します。根成分の子は「辺を残す」か「ポートで再接続」の安い方を選びます。
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from src.core.errors import StructureError, ValidationError
from src.processors.arborescence import Arborescence, NodeKind
from src.processors.splitter import Component, NodeAggregates, SplitResult, compute_aggregates
from src.utils.instrumentation import VisitCounter

PORT_CHOICES = ("terminals", "any")

# ポートコストの同値判定（相対誤差）
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PortChoice:
    """選択したポート"""

    node: int
    point: str
    cost: float


@dataclass(frozen=True)
class MuChoice:
    """μ の選択結果（shortcut が設定されていれば初期木をそのまま使う）"""

    mu: Optional[float]
    shortcut: Optional[str] = None


@dataclass
class ChildDecision:
    """根の子 x ごとの判断"""

    node: int
    point: str
    aggregates: NodeAggregates
    keep_cost: float
    port: PortChoice
    port_node: int
    kept: bool

    @property
    def cost(self) -> float:
        return self.keep_cost if self.kept else self.port.cost


@dataclass
class RootReconnection:
    """根成分の再接続結果"""

    decisions: List[ChildDecision]
    cost: float
    aggregates: NodeAggregates


def port_costs(component: Arborescence, counter: Optional[VisitCounter] = None) -> List[float]:
    """
    成分の全ノードについて、そのノードをポートにしたときのコスト

    cost_v = c(r,v) + C_{A'} + Σ_t w(t)(c(r,v) + dist_{A'}(v,t))。
    成分の根で直接評価し、辺 (x,y) ごとに
    cost_y = cost_x − (c(r,x) − c(r,y))(1+W) − c(e)(2W_y − W) で伝播します。

    Args:
        component: 成分（ノード0が成分の根）
        counter: 訪問カウンタ

    Returns:
        list: ノードインデックス -> ポートコスト
    """
    aggregates = compute_aggregates(component)
    top = aggregates[0]
    W = top.W
    rd = component.root_distance
    costs = [0.0] * len(component)
    costs[0] = rd[0] * (1.0 + W) + top.C + top.S2
    for y in component.preorder():
        if y == 0:
            continue
        x = component.parent[y]
        costs[y] = (costs[x] - (rd[x] - rd[y]) * (1.0 + W)
                    - component.edge_cost[y] * (2.0 * aggregates[y].W - W))
    if counter is not None:
        counter.tick("reconnect", 2 * len(component))
    return costs


def select_port(component: Arborescence, ports: str = "terminals",
                counter: Optional[VisitCounter] = None) -> PortChoice:
    """
    最小コストのポートを選択（同値なら点IDが最小のもの）

    Args:
        component: 成分
        ports: "terminals"（端子のみ）または "any"（全ノード）
        counter: 訪問カウンタ

    Returns:
        PortChoice: 選択したポート
    """
    if ports not in PORT_CHOICES:
        raise ValidationError(f"Unknown port mode: {ports}")
    costs = port_costs(component, counter)
    if ports == "terminals":
        candidates = [v for v in range(len(component)) if component.kind[v] == NodeKind.TERMINAL]
    else:
        candidates = list(range(len(component)))
    if not candidates:
        raise StructureError("Component has no terminal to use as port", component.point[0])
    best = min(costs[v] for v in candidates)
    limit = best + TIE_TOLERANCE * max(1.0, abs(best))
    node = min((v for v in candidates if costs[v] <= limit), key=lambda v: (component.point[v], v))
    return PortChoice(node, component.point[node], costs[node])


def reconnect_root_component(root_component: Component, ports: str = "terminals",
                             counter: Optional[VisitCounter] = None,
                             keep_all: bool = False) -> RootReconnection:
    """
    根成分の再接続

    根の子 x ごとに、辺 (r,x) を残すコスト (1+W_x)c(r,x) + C_x + S2_x と、
    A_x を切り離してポートで再接続するコストを比べ、安い方を採用します（同値なら残す）。

    Args:
        root_component: 根成分
        ports: ポート候補
        counter: 訪問カウンタ
        keep_all: すべての子で辺を残す（ベースライン）

    Returns:
        RootReconnection: 子ごとの判断と合計コスト
    """
    arb = root_component.arborescence
    decisions: List[ChildDecision] = []
    for x in arb.children[arb.root]:
        sub, origin = arb.extract(x)
        agg = compute_aggregates(sub)[0]
        c_rx = arb.edge_cost[x]
        keep_cost = (1.0 + agg.W) * c_rx + agg.C + agg.S2
        if keep_all or not any(k == NodeKind.TERMINAL for k in sub.kind):
            port = PortChoice(0, sub.point[0], math.inf)
        else:
            port = select_port(sub, ports, counter)
        decisions.append(ChildDecision(x, arb.point[x], agg, keep_cost, port, origin[port.node],
                                       kept=keep_cost <= port.cost))
    if counter is not None:
        counter.tick("root", len(arb))
    cost = math.fsum(d.cost for d in decisions)
    return RootReconnection(decisions, cost, compute_aggregates(arb)[0])


def choose_mu(C: float, D: float) -> MuChoice:
    """
    μ = √(2D/C) を選択

    C = 0 のときは初期木の根-端子パスがすべて長さ0で初期木が最適、
    D = 0 のときは切断しても遅延は改善しないため、どちらも初期木を返す合図を出します。

    Args:
        C: 初期有向木の接続コスト
        D: 遅延下界 Σ w(t)·c(r,t)

    Returns:
        MuChoice: μ または初期木を返す合図
    """
    if C < 0 or D < 0 or math.isnan(C) or math.isnan(D):
        raise ValidationError(f"choose_mu requires C, D >= 0 (got C={C}, D={D})")
    if C == 0:
        return MuChoice(None, "zero-connection-cost")
    if D == 0:
        return MuChoice(None, "zero-delay-bound")
    return MuChoice(math.sqrt(2.0 * D / C))


def reconnect_split(result: SplitResult, ports: str = "terminals",
                    counter: Optional[VisitCounter] = None) -> Tuple[List[PortChoice], RootReconnection]:
    """
    分割結果の全成分を再接続

    Args:
        result: SplitResult
        ports: ポート候補
        counter: 訪問カウンタ

    Returns:
        (list, RootReconnection): 切り離した成分ごとのポートと根成分の再接続結果
    """
    choices = [select_port(comp.arborescence, ports, counter) for comp in result.components]
    root = reconnect_root_component(result.root_component, ports, counter,
                                    keep_all=result.method == "baseline")
    return choices, root


def reconnected_cost(choices: List[PortChoice], root: RootReconnection) -> float:
    """再接続後の総コスト（成分コストの合計）"""
    return math.fsum([c.cost for c in choices] + [root.cost])
