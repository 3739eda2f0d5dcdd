#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
例外クラス
CLIの終了コードと対応付けられた例外階層を定義します。
"""

from typing import Any, Optional


class CdstError(Exception):
    """全ての例外の基底クラス"""

    exit_code = 1


class ValidationError(CdstError):
    """入力値・パラメータの検証エラー"""

    exit_code = 2


class InstanceParseError(ValidationError):
    """インスタンスJSONの解析エラー（JSONポインタ付き）"""

    def __init__(self, message: str, pointer: str = ""):
        """
        初期化

        Args:
            message: エラーメッセージ
            pointer: 問題箇所を示すJSONポインタ
        """
        self.pointer = pointer
        where = f" at {pointer}" if pointer else ""
        super().__init__(f"{message}{where}")


class InstanceTooLargeError(ValidationError):
    """総当たり系の処理がサイズ上限を超えた"""

    def __init__(self, what: str, size: Any, limit: Any):
        self.size = size
        self.limit = limit
        super().__init__(f"{what}: size {size} exceeds limit {limit}")


class StructureError(CdstError):
    """木構造の不整合（木でない・到達不能な端子など）"""

    exit_code = 1

    def __init__(self, message: str, vertex: Optional[str] = None):
        self.vertex = vertex
        suffix = f" (vertex {vertex!r})" if vertex is not None else ""
        super().__init__(f"{message}{suffix}")


class InvariantError(CdstError):
    """アルゴリズム内部の不変条件違反"""

    exit_code = 3


class BoundViolationError(InvariantError):
    """強制対象のコスト上界チェックが失敗した"""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class SolutionMismatchError(CdstError):
    """解ファイルのコストと再計算値の不一致"""

    exit_code = 1

    def __init__(self, message: str, diff: Optional[dict] = None):
        self.diff = diff or {}
        super().__init__(message)
