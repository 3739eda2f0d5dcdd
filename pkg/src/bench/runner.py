#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
ベンチマーク実行
下界ギャップ族・乱数インスタンス族のスイープと、合成有向木による線形時間の計測を行い、
行を CSV（RFC 4180）で出力します。行の順序はインスタンスのキーで決まり、実行順には依存しません。
"""

import csv
import re
import time
import traceback
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

from src.analysis.factors import gap_formulas
from src.core.errors import CdstError, ValidationError
from src.instances.generators import FAMILIES, gen_gap, gen_random, synthetic_arborescence
from src.processors.reconnect import choose_mu, reconnect_split, reconnected_cost
from src.processors.solver import BETA_METHODS, SPLITTERS, CostDistanceSolver
from src.processors.splitter import compute_aggregates, split_improved
from src.utils.instrumentation import VisitCounter
from src.utils.log_helper import get_default_helper

COLUMNS = ("instance", "beta_method", "splitter", "mu", "C", "D", "total", "lower_bound",
           "ratio", "wall_time", "nodes", "visits")

SCALING_SIZES = (10_000, 100_000, 1_000_000)

# ギャップ族の δ′_k·k と δ/δ′
GAP_DELTA_PRIME_SCALE = 0.5
GAP_DELTA_RATIO = 0.5


class BenchRunner:
    """インスタンススイープの実行と CSV 行の生成"""

    def __init__(self, helper=None):
        """
        初期化

        Args:
            helper: ログヘルパー
        """
        self.helper = helper or get_default_helper()
        self.debug_mode = False
        self.solver = CostDistanceSolver(self.helper)

    def set_debug_mode(self, debug_mode: bool):
        """デバッグモードを設定"""
        self.debug_mode = debug_mode
        self.solver.set_debug_mode(debug_mode)

    def set_config(self, **solver_config):
        """ソルバー設定（CostDistanceSolver.set_config の引数）を適用"""
        self.solver.set_config(**solver_config)

    def _solve_row(self, instance, beta_method: str, splitter: str) -> Dict[str, Any]:
        counter = VisitCounter()
        start = time.perf_counter()
        _, report = self.solver.solve(instance, beta_method=beta_method, splitter=splitter,
                                      counter=counter)
        elapsed = time.perf_counter() - start
        return {
            "instance": instance.name, "beta_method": report.beta_method, "splitter": splitter,
            "mu": report.mu, "C": report.initial_connection_cost, "D": report.delay_lower_bound,
            "total": report.total, "lower_bound": report.lower_bound, "ratio": report.ratio,
            "wall_time": elapsed, "nodes": report.nodes, "visits": counter.visits,
        }

    def gap_sweep(self, max_k: int, solve_limit: int = 3,
                  splitters: Sequence[str] = ("improved",)) -> List[Dict[str, Any]]:
        """
        下界ギャップ族のスイープ

        k = 1..max_k について予測値の行（beta_method = "formula"）を出し、
        k ≤ solve_limit では生成したインスタンスを実際に解いた行も加えます。

        Args:
            max_k: 最大の k
            solve_limit: 実際に solve する k の上限
            splitters: solve に使う分割方式

        Returns:
            list: CSV 行
        """
        if max_k < 1:
            raise ValidationError(f"max_k must be >= 1 (got {max_k})")
        rows = []
        for k in range(1, max_k + 1):
            delta_prime = GAP_DELTA_PRIME_SCALE / k
            lb, opt = gap_formulas(k, delta_prime)
            rows.append({"instance": f"gap-k{k}", "beta_method": "formula", "splitter": "",
                         "mu": None, "C": None, "D": None, "total": opt, "lower_bound": lb,
                         "ratio": opt / lb, "wall_time": 0.0, "nodes": None, "visits": None})
            if k > solve_limit:
                continue
            instance = gen_gap(k, delta_prime * GAP_DELTA_RATIO, delta_prime)
            for splitter in splitters:
                rows.append(self._solve_row(instance, "mst", splitter))
        self.helper.log_info("Gap sweep finished", {"max_k": max_k, "rows": len(rows)})
        return rows

    def random_sweep(self, families: Sequence[str] = FAMILIES, seeds: Iterable[int] = range(5),
                     n_terminals: int = 8, beta_methods: Sequence[str] = BETA_METHODS,
                     splitters: Sequence[str] = SPLITTERS) -> List[Dict[str, Any]]:
        """
        乱数インスタンス族のスイープ

        Args:
            families: インスタンス族
            seeds: シード
            n_terminals: 端子数
            beta_methods: 初期木の作り方
            splitters: 分割方式

        Returns:
            list: CSV 行（失敗したインスタンスは記録してスキップ）
        """
        rows = []
        failures = 0
        for family in families:
            for seed in seeds:
                instance = gen_random(n_terminals, seed, family)
                for beta_method in beta_methods:
                    for splitter in splitters:
                        try:
                            rows.append(self._solve_row(instance, beta_method, splitter))
                        except CdstError as e:
                            failures += 1
                            self.helper.log_error(f"Bench run failed: {str(e)}", {
                                "instance": instance.name, "beta_method": beta_method,
                                "splitter": splitter})
                            if self.debug_mode:
                                self.helper.log_error(traceback.format_exc())
        self.helper.log_info("Random sweep finished", {"rows": len(rows), "failures": failures})
        return rows

    def scaling(self, sizes: Sequence[int] = SCALING_SIZES, seed: int = 0) -> List[Dict[str, Any]]:
        """
        合成二分有向木で分割＋再接続の時間と訪問ノード数を計測

        Args:
            sizes: 端子数のリスト
            seed: 乱数シード

        Returns:
            list: CSV 行
        """
        rows = []
        for n in sizes:
            arb = synthetic_arborescence(n, seed)
            top = compute_aggregates(arb)[0]
            choice = choose_mu(top.C, top.D)
            if choice.mu is None:
                raise ValidationError(f"Synthetic tree has no usable mu ({choice.shortcut})")
            counter = VisitCounter()
            start = time.perf_counter()
            result = split_improved(arb, choice.mu, counter=counter, helper=self.helper)
            choices, root = reconnect_split(result, "terminals", counter)
            elapsed = time.perf_counter() - start
            rows.append({
                "instance": f"synthetic-n{n}-s{seed}", "beta_method": "synthetic",
                "splitter": "improved", "mu": choice.mu, "C": top.C, "D": top.D,
                "total": reconnected_cost(choices, root), "lower_bound": None, "ratio": None,
                "wall_time": elapsed, "nodes": len(arb), "visits": counter.visits,
            })
            self.helper.log_info("Scaling point measured", {
                "terminals": n, "nodes": len(arb), "seconds": elapsed, "visits": counter.visits})
        for previous, current in zip(rows, rows[1:]):
            self.helper.log_info("Scaling growth", {
                "from": previous["instance"], "to": current["instance"],
                "visit_ratio": current["visits"] / previous["visits"],
                "time_ratio": current["wall_time"] / max(previous["wall_time"], 1e-12)})
        return rows


def _natural_key(name: str) -> tuple:
    """"gap-k10" が "gap-k9" の後に来るよう数字部分を整数で比較"""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: List[Dict[str, Any]], stream: TextIO, sort: bool = True):
    """
    行を CSV で書き出す

    Args:
        rows: CSV 行
        stream: 出力先
        sort: インスタンスのキー（名前・β・分割方式）で並べ替えるか
    """
    if sort:
        rows = sorted(rows, key=lambda r: (_natural_key(r["instance"]), r["beta_method"],
                                           r["splitter"]))
    writer = csv.DictWriter(stream, fieldnames=COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: _format(row.get(column)) for column in COLUMNS})


def parse_seeds(text: Optional[str]) -> List[int]:
    """
    "0-9" や "1,3,5" 形式のシード指定を解釈

    Args:
        text: シード指定

    Returns:
        list: シードのリスト
    """
    if not text:
        return list(range(5))
    seeds: List[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                low, high = part.split("-", 1)
                seeds.extend(range(int(low), int(high) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise ValidationError(f"Invalid seed list: {text!r}")
    return seeds
