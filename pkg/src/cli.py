#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
cdst - 一様コスト距離シュタイナー木 CLI
solve / bench / check / factors / oracle / gen の各サブコマンドを提供します。
終了コード: 0 成功、1 構造エラー・不一致、2 入力検証エラー、3 不変条件・上界違反
"""

import argparse
import json
import math
import os
import sys
import traceback
from typing import List, Optional

# 絶対インポートが機能するようにパスを設定
current_dir = os.path.dirname(os.path.abspath(__file__))
parent_dir = os.path.dirname(current_dir)
if parent_dir not in sys.path:
    sys.path.insert(0, parent_dir)

from src.analysis.factors import TABLE_BETAS, factor_table, round_up
from src.api.instance_io import (instance_to_json, read_instance, read_solution, write_instance,
                                 write_report, write_solution)
from src.bench.runner import SCALING_SIZES, BenchRunner, parse_seeds, write_csv
from src.core.errors import BoundViolationError, CdstError, SolutionMismatchError, ValidationError
from src.core.model import evaluate_cost
from src.instances.generators import FAMILIES, gen_gap, gen_random, gen_unit_path
from src.oracle.brute_force import brute_force_opt
from src.processors.reconnect import PORT_CHOICES
from src.processors.solver import BETA_METHODS, SPLITTERS, CostDistanceSolver
from src.processors.steiner_init import EXACT_TERMINAL_LIMIT
from src.utils.config_manager import ConfigManager
from src.utils.log_helper import LogHelper, set_default_helper

DEFAULT_CONFIG_PATH = os.path.join(parent_dir, "config.yml")

# check で許容する相対誤差
COST_TOLERANCE = 1e-9


def _parse_mu(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        mu = float(text)
    except ValueError:
        raise ValidationError(f"--mu must be 'auto' or a positive number (got {text!r})")
    if not (math.isfinite(mu) and mu > 0):
        raise ValidationError(f"--mu must be a positive finite number (got {text!r})")
    return mu


def _parse_betas(text: Optional[str]) -> List[float]:
    """"1,ln4,1.5,2" 形式（ln4 は ln 4）"""
    if not text:
        return list(TABLE_BETAS)
    betas = []
    for part in text.split(","):
        part = part.strip().lower()
        try:
            betas.append(math.log(float(part[2:])) if part.startswith("ln") else float(part))
        except ValueError:
            raise ValidationError(f"Invalid beta value: {part!r}")
    return betas


def _print_json(data):
    json.dump(data, sys.stdout, indent=2, allow_nan=False)
    sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    """引数パーサーを構築"""
    parser = argparse.ArgumentParser(prog="cdst",
                                     description="Uniform cost-distance Steiner tree toolkit")
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--beta-method", choices=BETA_METHODS, default="mst")
    p.add_argument("--mu", default="auto", help="'auto' or a positive number")
    p.add_argument("--splitter", choices=SPLITTERS, default="improved")
    p.add_argument("--ports", choices=PORT_CHOICES, default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--report")
    p.add_argument("--dump-aggregates", metavar="FILE")

    p = sub.add_parser("bench", help="run benchmark sweeps and print CSV")
    p.add_argument("--gap", type=int, metavar="K", help="gap family sweep k = 1..K")
    p.add_argument("--gap-solve-limit", type=int, default=3)
    p.add_argument("--random", action="store_true", help="random family sweep")
    p.add_argument("--families", default=",".join(FAMILIES))
    p.add_argument("--seeds", default="0-4", help="e.g. 0-9 or 1,3,5")
    p.add_argument("--n-terminals", type=int, default=8)
    p.add_argument("--beta-methods", default=",".join(BETA_METHODS))
    p.add_argument("--splitters", default=",".join(SPLITTERS))
    p.add_argument("--scaling", action="store_true", help="split+reconnect scaling mode")
    p.add_argument("--sizes", default=",".join(str(n) for n in SCALING_SIZES))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check", help="validate a solution file against an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--solution", required=True)

    p = sub.add_parser("factors", help="print the approximation factor table")
    p.add_argument("--beta", help="comma separated betas, e.g. 1,ln4,1.5,2")

    p = sub.add_parser("oracle", help="exact optimum of a small instance")
    p.add_argument("--input", required=True)
    p.add_argument("--output")

    p = sub.add_parser("gen", help="generate instances")
    gen = p.add_subparsers(dest="generator", required=True)
    g = gen.add_parser("gap")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--delta", type=float)
    g.add_argument("--delta-prime", type=float)
    g.add_argument("--output")
    g = gen.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--family", choices=FAMILIES, default="euclidean2d")
    g.add_argument("--output")
    g = gen.add_parser("unit-path")
    g.add_argument("--output")
    return parser


class CdstCli:
    """コマンドラインアプリケーション"""

    def __init__(self, config_file_path: str = DEFAULT_CONFIG_PATH):
        """
        初期化

        Args:
            config_file_path: 設定ファイルのパス（存在しなければ環境変数とデフォルト値のみ）
        """
        self.config_manager = ConfigManager(config_file_path)
        self._load_configuration()
        self._initialize_modules()
        self._log_configuration()

    def _load_configuration(self):
        """設定を読み込む"""
        # ログ設定
        self.log_level = self.config_manager.get_value("CDST_LOG", ["logging", "level"], "info")
        self.log_format = self.config_manager.get_value(
            "CDST_LOG_FORMAT", ["logging", "format"], "json")

        # ソルバー設定
        self.exact_limit = self.config_manager.get_value(
            "CDST_EXACT_LIMIT", ["solver", "exact_terminal_limit"], EXACT_TERMINAL_LIMIT,
            is_number=True)
        self.lower_bound_limit = self.config_manager.get_value(
            "CDST_LOWER_BOUND_LIMIT", ["solver", "lower_bound_terminal_limit"], 12,
            is_number=True)
        self.tolerance = self.config_manager.get_value(
            "CDST_TOLERANCE", ["solver", "tolerance"], 1e-9, is_float=True)
        self.ports = self.config_manager.get_value("CDST_PORTS", ["solver", "ports"], "terminals")
        self.debug_mode = self.config_manager.get_value(
            "CDST_DEBUG", ["solver", "debug_mode"], False, is_boolean=True)

        # オラクルの規模上限
        self.oracle_max_vertices = self.config_manager.get_value(
            "CDST_ORACLE_MAX_VERTICES", ["oracle", "max_vertices"], 12, is_number=True)
        self.oracle_max_edges = self.config_manager.get_value(
            "CDST_ORACLE_MAX_EDGES", ["oracle", "max_edges"], 20, is_number=True)

    def _initialize_modules(self):
        """モジュールを初期化"""
        try:
            self.helper = LogHelper(level=self.log_level, log_format=self.log_format)
        except ValueError as e:
            raise ValidationError(str(e))
        set_default_helper(self.helper)

        self.solver = CostDistanceSolver(self.helper)
        self.solver.set_debug_mode(self.debug_mode)
        self.solver.set_config(self.exact_limit, self.lower_bound_limit, self.tolerance, self.ports)

        self.bench = BenchRunner(self.helper)
        self.bench.set_debug_mode(self.debug_mode)
        self.bench.set_config(exact_limit=self.exact_limit,
                              lower_bound_limit=self.lower_bound_limit,
                              tolerance=self.tolerance, ports=self.ports)

    def _log_configuration(self):
        """設定情報をログに出力"""
        self.helper.log_debug("Configuration loaded", {
            "log_level": self.log_level, "log_format": self.log_format,
            "exact_limit": self.exact_limit, "lower_bound_limit": self.lower_bound_limit,
            "tolerance": self.tolerance, "ports": self.ports, "debug_mode": self.debug_mode,
            "oracle_max_vertices": self.oracle_max_vertices,
            "oracle_max_edges": self.oracle_max_edges,
            "sources": dict(self.config_manager.sources)})

    def run(self, args: argparse.Namespace) -> int:
        """
        サブコマンドを実行

        Args:
            args: 解析済みの引数

        Returns:
            int: 終了コード
        """
        handlers = {
            "solve": self.cmd_solve, "bench": self.cmd_bench, "check": self.cmd_check,
            "factors": self.cmd_factors, "oracle": self.cmd_oracle, "gen": self.cmd_gen,
        }
        try:
            handlers[args.command](args)
            return 0
        except CdstError as e:
            self.helper.log_error(f"{type(e).__name__}: {str(e)}", {"exit_code": e.exit_code})
            self.helper.log_debug(traceback.format_exc())
            return e.exit_code
        except OSError as e:
            self.helper.log_error(f"I/O error: {str(e)}")
            self.helper.log_debug(traceback.format_exc())
            return 1

    def cmd_solve(self, args: argparse.Namespace):
        """インスタンスを解き、解ファイルとレポートを書き出す"""
        instance = read_instance(args.input)
        mu = _parse_mu(args.mu)
        if args.ports is not None:
            self.solver.set_config(self.exact_limit, self.lower_bound_limit, self.tolerance,
                                   args.ports)
        try:
            solution, report = self.solver.solve(instance, beta_method=args.beta_method, mu=mu,
                                                 splitter=args.splitter,
                                                 dump_path=args.dump_aggregates)
        except BoundViolationError as e:
            # 違反したチェックを確認できるようレポートは残す
            if args.report and e.report is not None:
                write_report(args.report, e.report)
            raise

        write_solution(args.output, solution)
        if args.report:
            write_report(args.report, report)
        _print_json({"instance": report.instance, "splitter": report.splitter, "mu": report.mu,
                     "shortcut": report.shortcut, "total": report.total,
                     "lower_bound": report.lower_bound, "ratio": report.ratio,
                     "bounds_ok": report.bounds_ok})

    def cmd_bench(self, args: argparse.Namespace):
        """ベンチマークを実行し CSV を標準出力に書き出す"""
        run_all = args.gap is None and not args.random and not args.scaling
        rows = []
        if args.gap is not None or run_all:
            rows.extend(self.bench.gap_sweep(args.gap or 50, solve_limit=args.gap_solve_limit))
        if args.random or run_all:
            families = [f.strip() for f in args.families.split(",") if f.strip()]
            rows.extend(self.bench.random_sweep(
                families=families, seeds=parse_seeds(args.seeds), n_terminals=args.n_terminals,
                beta_methods=[b.strip() for b in args.beta_methods.split(",") if b.strip()],
                splitters=[s.strip() for s in args.splitters.split(",") if s.strip()]))
        if args.scaling:
            try:
                sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            except ValueError:
                raise ValidationError(f"Invalid --sizes value: {args.sizes!r}")
            rows.extend(self.bench.scaling(sizes, seed=args.seed))
        write_csv(rows, sys.stdout)

    def cmd_check(self, args: argparse.Namespace):
        """解ファイルの木構造とコストを再検証"""
        instance = read_instance(args.input)
        solution = read_solution(args.solution)
        costs = evaluate_cost(instance, solution)
        if solution.costs is not None:
            diff = {}
            for key, stored, actual in (
                    ("connection", solution.costs.connection_cost, costs.connection_cost),
                    ("delay", solution.costs.delay_cost, costs.delay_cost),
                    ("total", solution.costs.total, costs.total)):
                if abs(stored - actual) > COST_TOLERANCE * max(1.0, abs(actual)):
                    diff[key] = {"file": stored, "recomputed": actual}
            if diff:
                raise SolutionMismatchError(
                    f"Solution costs differ from recomputation: {json.dumps(diff)}", diff)
        self.helper.log_info("Solution check passed", {"solution": args.solution,
                                                       "total": costs.total})
        _print_json({"ok": True, "costs": costs.to_json()})

    def cmd_factors(self, args: argparse.Namespace):
        """近似係数表（改良・ベースライン）を小数5桁（切り上げ）で出力"""
        table = factor_table(_parse_betas(args.beta))
        width = 10
        rows = [("beta", [c.beta for c in table]),
                ("improved", [round_up(c.factor) for c in table]),
                ("baseline", [round_up(c.baseline) for c in table])]
        for label, values in rows:
            sys.stdout.write(label.ljust(width) + "".join(f"{v:>{width}.5f}" for v in values) + "\n")

    def cmd_oracle(self, args: argparse.Namespace):
        """小規模インスタンスの厳密最適解"""
        instance = read_instance(args.input)
        solution, value = brute_force_opt(instance, self.oracle_max_vertices,
                                          self.oracle_max_edges, helper=self.helper)
        if args.output:
            write_solution(args.output, solution)
        _print_json({"instance": instance.name, "optimum": value,
                     "costs": solution.costs.to_json()})

    def cmd_gen(self, args: argparse.Namespace):
        """インスタンスを生成"""
        if args.generator == "gap":
            delta_prime = args.delta_prime if args.delta_prime is not None else 0.5 / args.k
            delta = args.delta if args.delta is not None else delta_prime / 2.0
            instance = gen_gap(args.k, delta, delta_prime)
        elif args.generator == "random":
            instance = gen_random(args.n, args.seed, args.family)
        else:
            instance = gen_unit_path()
        if args.output:
            write_instance(args.output, instance)
            self.helper.log_info("Instance written", {"name": instance.name, "path": args.output})
        else:
            _print_json(instance_to_json(instance))


def main(argv: Optional[List[str]] = None) -> int:
    """
    エントリポイント

    Args:
        argv: 引数（省略時は sys.argv）

    Returns:
        int: 終了コード
    """
    args = build_parser().parse_args(argv)
    try:
        cli = CdstCli(args.config)
    except CdstError as e:
        sys.stderr.write(f"Configuration error: {str(e)}\n")
        return e.exit_code
    return cli.run(args)


if __name__ == "__main__":
    sys.exit(main())
