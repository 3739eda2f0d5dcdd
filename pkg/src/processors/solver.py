#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
コスト距離シュタイナー木ソルバー
初期木の構築・二分化、μ の選択、分割、再接続を順に実行し、
各成分と全体のコスト上界を検証した RunReport を作成します。
"""

import json
import math
import traceback
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx

from src.analysis.factors import approx_factor, baseline_factor
from src.core.errors import BoundViolationError, InvariantError, StructureError, ValidationError
from src.core.model import Instance, Solution, delay_lower_bound, evaluate_cost, lower_bound
from src.processors.arborescence import Arborescence
from src.processors.reconnect import (PORT_CHOICES, RootReconnection, choose_mu,
                                      reconnect_split, reconnected_cost)
from src.processors.splitter import SplitResult, compute_aggregates, split
from src.processors.steiner_init import (BETA, EXACT_TERMINAL_LIMIT, exact_steiner,
                                         initial_arborescence, mst_steiner, tree_length)
from src.utils.instrumentation import StageTimer, VisitCounter
from src.utils.log_helper import get_default_helper

SPLITTERS = ("improved", "baseline")
BETA_METHODS = ("mst", "exact")


@dataclass(frozen=True)
class BoundCheck:
    """上界チェック1件（enforced が偽なら記録のみ）"""

    name: str
    value: float
    bound: float
    ok: bool
    enforced: bool = True
    subject: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.value

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "subject": self.subject, "value": self.value,
                "bound": self.bound, "margin": self.margin, "ok": self.ok,
                "enforced": self.enforced}


def check_bound(name: str, value: float, bound: float, tolerance: float = 1e-9,
                enforced: bool = True, subject: str = "") -> BoundCheck:
    """value ≤ bound を相対許容誤差つきで判定"""
    ok = value <= bound + tolerance * max(1.0, abs(bound))
    return BoundCheck(name, float(value), float(bound), ok, enforced, subject)


@dataclass
class ComponentReport:
    """切り離した成分の再接続結果"""

    root: str
    nodes: int
    W: float
    D: float
    C: float
    S1: float
    S2: float
    cut_cost: float
    port: str
    cost: float
    component_bound: float

    def to_json(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class RunReport:
    """1回の solve の記録"""

    instance: str
    beta_method: str
    beta: float
    splitter: str
    ports: str
    mu: Optional[float]
    mu_source: str
    shortcut: Optional[str]
    binary: bool
    initial_connection_cost: float
    delay_lower_bound: float
    components: List[ComponentReport] = field(default_factory=list)
    root_component: Dict[str, Any] = field(default_factory=dict)
    connection_cost: float = 0.0
    delay_cost: float = 0.0
    total: float = 0.0
    accounted_total: float = 0.0
    pruned_cost: float = 0.0
    smt_cost: float = 0.0
    smt_source: str = ""
    lower_bound: float = 0.0
    ratio: Optional[float] = None
    checks: List[BoundCheck] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    visits: Dict[str, int] = field(default_factory=dict)
    nodes: int = 0

    @property
    def bounds_ok(self) -> bool:
        return all(c.ok for c in self.checks if c.enforced)

    def failed_checks(self) -> List[BoundCheck]:
        return [c for c in self.checks if c.enforced and not c.ok]

    def to_json(self) -> Dict[str, Any]:
        return {
            "instance": self.instance,
            "beta_method": self.beta_method,
            "beta": self.beta,
            "splitter": self.splitter,
            "ports": self.ports,
            "mu": self.mu,
            "mu_source": self.mu_source,
            "shortcut": self.shortcut,
            "binary": self.binary,
            "C": self.initial_connection_cost,
            "D": self.delay_lower_bound,
            "components": [c.to_json() for c in self.components],
            "root_component": self.root_component,
            "connection": self.connection_cost,
            "delay": self.delay_cost,
            "total": self.total,
            "accounted_total": self.accounted_total,
            "pruned_cost": self.pruned_cost,
            "smt_cost": self.smt_cost,
            "smt_source": self.smt_source,
            "lower_bound": self.lower_bound,
            "ratio": self.ratio,
            "bounds_ok": self.bounds_ok,
            "checks": [c.to_json() for c in self.checks],
            "timings": self.timings,
            "visits": self.visits,
            "nodes": self.nodes,
        }


class CostDistanceSolver:
    """一様コスト距離シュタイナー木ソルバー"""

    def __init__(self, helper=None):
        """
        初期化

        Args:
            helper: ログヘルパー
        """
        self.helper = helper or get_default_helper()
        self.debug_mode = False
        self.exact_limit = EXACT_TERMINAL_LIMIT
        self.lower_bound_limit = 12
        self.tolerance = 1e-9
        self.ports = "terminals"

    def set_debug_mode(self, debug_mode: bool):
        """デバッグモードを設定"""
        self.debug_mode = debug_mode

    def set_config(self, exact_limit: int = EXACT_TERMINAL_LIMIT, lower_bound_limit: int = 12,
                   tolerance: float = 1e-9, ports: str = "terminals"):
        """
        設定を適用

        Args:
            exact_limit: 厳密シュタイナー木の |T ∪ {r}| 上限
            lower_bound_limit: 下界に厳密な C_SMT を使う |T ∪ {r}| の上限
            tolerance: 上界チェックの許容誤差
            ports: ポート候補（"terminals" / "any"）
        """
        if ports not in PORT_CHOICES:
            raise ValidationError(f"Unknown port mode: {ports}")
        self.exact_limit = exact_limit
        self.lower_bound_limit = lower_bound_limit
        self.tolerance = tolerance
        self.ports = ports
        if self.debug_mode:
            self.helper.log_info("Solver config set", {
                "exact_limit": exact_limit, "lower_bound_limit": lower_bound_limit,
                "tolerance": tolerance, "ports": ports})

    def solve(self, instance: Instance, beta_method: str = "mst", mu: Optional[float] = None,
              splitter: str = "improved", dump_path: Optional[str] = None,
              counter: Optional[VisitCounter] = None) -> Tuple[Solution, RunReport]:
        """
        パイプライン全体を実行

        Args:
            instance: インスタンス
            beta_method: "mst" または "exact"（インスタンスが初期木を持つ場合は無視）
            mu: μ の指定値（None なら自動）
            splitter: "improved" または "baseline"
            dump_path: ノードごとの集計値を JSON Lines で書き出すファイル
            counter: 訪問カウンタ（省略時は内部で作成）

        Returns:
            (Solution, RunReport): コスト付きの解と記録
        """
        if beta_method not in BETA_METHODS:
            raise ValidationError(f"Unknown beta method: {beta_method}")
        if splitter not in SPLITTERS:
            raise ValidationError(f"Unknown splitter: {splitter}")
        if mu is not None and not (math.isfinite(mu) and mu > 0):
            raise ValidationError(f"mu must be a positive finite number (got {mu})")

        timer = StageTimer()
        counter = counter or VisitCounter()
        tol = self.tolerance

        with timer.stage("initial_tree"):
            arb, method, tree_len = initial_arborescence(
                instance, beta_method, exact_limit=self.exact_limit, helper=self.helper)
        beta = BETA[method]
        binary = arb.is_binary()
        C = compute_aggregates(arb)[0].C
        D = delay_lower_bound(instance)

        shortcut = None
        if mu is not None:
            mu_source = "override"
        elif splitter == "baseline":
            mu, mu_source = 1.0 / beta, "baseline-default"
        else:
            choice = choose_mu(C, D)
            mu, shortcut, mu_source = choice.mu, choice.shortcut, "auto"

        report = RunReport(instance=instance.name, beta_method=method, beta=beta,
                           splitter=splitter, ports=self.ports, mu=mu, mu_source=mu_source,
                           shortcut=shortcut, binary=binary, initial_connection_cost=C,
                           delay_lower_bound=D, nodes=len(arb))
        self.helper.log_info("Initial arborescence ready", {
            "instance": instance.name, "beta_method": method, "nodes": len(arb),
            "C": C, "D": D, "mu": mu, "shortcut": shortcut})

        if shortcut is not None:
            solution = arb.to_solution()
            report.accounted_total = C + compute_aggregates(arb)[0].S2
        else:
            with timer.stage("split"):
                result = split(arb, mu, splitter, counter=counter, helper=self.helper,
                               enforce_root_weights=binary, tolerance=tol)
            if dump_path:
                self._dump_aggregates(result, dump_path)
            with timer.stage("reconnect"):
                solution = self._reconnect(instance, arb, result, report, counter)

        with timer.stage("evaluate"):
            try:
                costs = evaluate_cost(instance, solution)
            except StructureError as e:
                # 自分で組み立てた木の構造不整合は内部エラー扱い
                raise InvariantError(f"Solver produced an invalid tree: {e}") from e
        report.connection_cost = costs.connection_cost
        report.delay_cost = costs.delay_cost
        report.total = costs.total

        expected = report.accounted_total - report.pruned_cost
        if abs(costs.total - expected) > tol * max(1.0, abs(expected)):
            raise InvariantError(
                f"Cost accounting mismatch: evaluated {costs.total}, components sum to {expected}")

        with timer.stage("lower_bound"):
            report.smt_cost, report.smt_source = self._smt_cost(instance, method, tree_len)
        report.lower_bound = lower_bound(instance, report.smt_cost)
        if report.lower_bound > 0:
            report.ratio = report.total / report.lower_bound
        elif report.total == 0:
            report.ratio = 1.0

        self._check_totals(report, C, D)
        report.timings = dict(timer.timings)
        report.visits = dict(counter.by_stage)

        self.helper.log_info("Solve finished", {
            "instance": instance.name, "splitter": splitter, "mu": mu, "total": report.total,
            "lower_bound": report.lower_bound, "ratio": report.ratio,
            "components": len(report.components), "bounds_ok": report.bounds_ok})
        failed = report.failed_checks()
        if failed:
            for check in failed:
                self.helper.log_error("Bound check failed", check.to_json())
            raise BoundViolationError(
                f"{len(failed)} bound check(s) failed, first: {failed[0].name} "
                f"({failed[0].value} > {failed[0].bound})", report)
        return solution.with_costs(costs), report

    def _reconnect(self, instance: Instance, arb: Arborescence, result: SplitResult,
                   report: RunReport, counter: VisitCounter) -> Solution:
        """成分ごとにポートを選んで接続し、最終的な木を組み立てる"""
        tol = self.tolerance
        mu = result.mu
        improved = result.method == "improved"
        labels = arb.node_labels()
        root_label = labels[arb.root]
        edges: List[Tuple[str, str]] = []
        choices, reconnection = reconnect_split(result, self.ports, counter)

        for comp, port in zip(result.components, choices):
            sub, origin = comp.arborescence, comp.origin
            agg = comp.aggregates
            subject = labels[origin[0]]
            for i in range(1, len(sub)):
                edges.append((labels[origin[sub.parent[i]]], labels[origin[i]]))
            edges.append((root_label, labels[origin[port.node]]))

            expected = agg.C + 2.0 * agg.S1 / agg.W + (1.0 + 1.0 / agg.W) * agg.D
            report.checks.append(check_bound("port_expected_cost", port.cost, expected, tol,
                                             subject=subject))
            report.checks.append(check_bound(
                "port_weight_bound", expected,
                (1.0 + agg.W / 2.0) * agg.C + (1.0 + 1.0 / agg.W) * agg.D, tol, subject=subject))
            if improved:
                bound = (1.0 + mu / 2.0) * (agg.C + comp.cut_cost) + (1.0 + 1.0 / mu) * agg.D
                enforced = True
            else:
                bound = (1.0 + mu) * agg.C + (1.0 + 1.0 / mu) * agg.D
                enforced = report.binary
            report.checks.append(check_bound("component_bound", port.cost, bound, tol,
                                             enforced=enforced, subject=subject))
            report.components.append(ComponentReport(
                root=subject, nodes=len(sub), W=agg.W, D=agg.D, C=agg.C, S1=agg.S1, S2=agg.S2,
                cut_cost=comp.cut_cost, port=port.point, cost=port.cost, component_bound=bound))
            self.helper.log_debug("Component reconnected", report.components[-1].to_json())

        root_comp = result.root_component
        edges.extend(self._root_edges(root_comp.arborescence, root_comp.origin, reconnection,
                                      labels))
        report.accounted_total = reconnected_cost(choices, reconnection)
        self._check_root(report, reconnection, mu, improved)

        solution, pruned = _assemble(instance, root_label, edges, labels, arb)
        report.pruned_cost = pruned
        return solution

    def _root_edges(self, root_arb: Arborescence, origin: List[int],
                    reconnection: RootReconnection, labels: Dict[int, str]) -> List[Tuple[str, str]]:
        edges = []
        root_label = labels[origin[root_arb.root]]
        for decision in reconnection.decisions:
            x = decision.node
            for y in root_arb.preorder(x):
                if y != x:
                    edges.append((labels[origin[root_arb.parent[y]]], labels[origin[y]]))
            attach = x if decision.kept else decision.port_node
            edges.append((root_label, labels[origin[attach]]))
        return edges

    def _check_root(self, report: RunReport, reconnection: RootReconnection, mu: float,
                    improved: bool):
        tol = self.tolerance
        agg = reconnection.aggregates
        heaviest = max((d.aggregates.W for d in reconnection.decisions), default=0.0)
        report.checks.append(check_bound("root_child_weight", heaviest, mu, tol,
                                         enforced=report.binary or not improved))
        if improved:
            bound = (1.0 + mu / 2.0) * agg.C + (1.0 + 1.0 / mu) * agg.D
            enforced = report.binary
        else:
            bound = (1.0 + mu) * agg.C + (1.0 + 1.0 / mu) * agg.D
            enforced = True
        report.checks.append(check_bound("root_component_bound", reconnection.cost, bound, tol,
                                         enforced=enforced))
        report.root_component = {
            "W": agg.W, "D": agg.D, "C": agg.C, "cost": reconnection.cost, "bound": bound,
            "children": [{
                "point": d.point, "W": d.aggregates.W, "kept": d.kept, "keep_cost": d.keep_cost,
                "port": None if math.isinf(d.port.cost) else d.port.point,
                "port_cost": None if math.isinf(d.port.cost) else d.port.cost,
            } for d in reconnection.decisions],
        }

    def _check_totals(self, report: RunReport, C: float, D: float):
        """全体のコスト上界と近似係数のチェック"""
        tol = self.tolerance
        mu = report.mu
        if report.shortcut is None:
            if report.splitter == "improved":
                bound = (1.0 + mu / 2.0) * C + (1.0 + 1.0 / mu) * D
            else:
                bound = (1.0 + mu) * C + (1.0 + 1.0 / mu) * D
            report.checks.append(check_bound("total_bound", report.total, bound, tol,
                                             enforced=report.binary))
        else:
            report.checks.append(check_bound("shortcut_total", report.total, C + D, tol,
                                             enforced=False))

        if report.smt_source == "exact" and report.beta_method in BETA_METHODS \
                and report.mu_source != "override":
            factor = (approx_factor(report.beta) if report.splitter == "improved"
                      else baseline_factor(report.beta))
            report.checks.append(check_bound("approximation_factor", report.total,
                                             factor * report.lower_bound, tol,
                                             enforced=report.shortcut is None))

    def _smt_cost(self, instance: Instance, method: str,
                  tree_len: Optional[float]) -> Tuple[float, str]:
        """下界用の C_SMT（厳密な木が手元にあればそれ、小さいインスタンスは厳密、それ以外は MST/2）"""
        if method == "exact" and tree_len is not None:
            return tree_len, "exact"
        if len(instance.required_points()) <= self.lower_bound_limit:
            tree = exact_steiner(instance, limit=self.lower_bound_limit, helper=self.helper)
            return tree_length(tree), "exact"
        if method == "mst" and tree_len is not None:
            return tree_len / 2.0, "mst-half"
        return tree_length(mst_steiner(instance, helper=self.helper)) / 2.0, "mst-half"

    def _dump_aggregates(self, result: SplitResult, path: str):
        """ノードごとの集計値を JSON Lines で書き出す"""
        working = result.working
        try:
            with open(path, "w", encoding="utf-8") as handle:
                for v, agg in enumerate(result.aggregates):
                    if agg is None:
                        continue
                    record = {"node": v, "point": working.point[v],
                              "kind": working.kind[v].value, "parent": working.parent[v]}
                    record.update(agg.to_json())
                    handle.write(json.dumps(record) + "\n")
        except OSError as e:
            self.helper.log_error(f"Could not write aggregate dump: {str(e)}")
            if self.debug_mode:
                self.helper.log_error(traceback.format_exc())
            raise
        if self.debug_mode:
            self.helper.log_info(f"Aggregates written to {path}")


def _assemble(instance: Instance, root_label: str, edges: List[Tuple[str, str]],
              labels: Dict[int, str], arb: Arborescence) -> Tuple[Solution, float]:
    """
    辺リストから解を組み立てる（端子でない葉を除去し、根から外向きに並べる）

    Returns:
        (Solution, float): 解と除去した辺のコスト合計
    """
    position = {labels[v]: arb.point[v] for v in labels}
    graph = nx.Graph()
    graph.add_node(root_label)
    graph.add_edges_from(edges)
    required = set(instance.required_points())
    pruned = []
    leaves = [v for v in graph.nodes if graph.degree(v) == 1 and v not in required]
    while leaves:
        v = leaves.pop()
        for u in list(graph.neighbors(v)):
            pruned.append(instance.distance(position[u], position[v]))
            graph.remove_edge(u, v)
            if graph.degree(u) == 1 and u not in required:
                leaves.append(u)
        graph.remove_node(v)
    oriented = list(nx.bfs_edges(graph, root_label))
    used = {v for edge in oriented for v in edge}
    positions = {label: position[label] for label in used if position[label] != label}
    return Solution(edges=tuple(oriented), positions=positions), math.fsum(pruned)


def solve(instance: Instance, beta_method: str = "mst", mu_override: Optional[float] = None,
          splitter: str = "improved", ports: str = "terminals", helper=None,
          **config) -> Tuple[Solution, RunReport]:
    """
    CostDistanceSolver を既定設定で実行する簡易関数

    Args:
        instance: インスタンス
        beta_method: "mst" / "exact"
        mu_override: μ の指定値
        splitter: "improved" / "baseline"
        ports: ポート候補
        helper: ログヘルパー
        **config: set_config に渡す追加設定

    Returns:
        (Solution, RunReport): 解と記録
    """
    solver = CostDistanceSolver(helper)
    solver.set_config(ports=ports, **config)
    return solver.solve(instance, beta_method=beta_method, mu=mu_override, splitter=splitter)
