#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
ログヘルパー
各コンポーネントに注入する log_info / log_error 形式のロガーを提供します。
出力はJSON Lines（python-json-logger）またはテキストです。
"""

import logging
import sys
from typing import Any, Optional

from pythonjsonlogger import jsonlogger

LOGGER_NAME = "cdst"

_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "warn": logging.WARNING,
    "error": logging.ERROR,
}


class LogHelper:
    """構造化ログ出力ヘルパー"""

    def __init__(self, level: str = "info", log_format: str = "json", name: str = LOGGER_NAME,
                 stream=None):
        """
        初期化

        Args:
            level: ログレベル（debug / info / warning / error）
            log_format: "json" または "text"
            name: ロガー名
            stream: 出力先ストリーム（省略時はstderr）
        """
        level_key = str(level).lower()
        if level_key not in _LEVELS:
            raise ValueError(f"Unknown log level: {level}")
        self.level = level_key
        self.logger = logging.getLogger(name)
        self.logger.setLevel(_LEVELS[level_key])
        self.logger.propagate = False

        # 既存ハンドラを置き換える（再初期化時の重複出力を防ぐ）
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)

        handler = logging.StreamHandler(stream or sys.stderr)
        if log_format == "json":
            formatter = jsonlogger.JsonFormatter(
                "%(asctime)s %(levelname)s %(name)s %(message)s",
                rename_fields={"levelname": "level", "asctime": "timestamp"},
            )
        else:
            formatter = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        handler.setFormatter(formatter)
        self.logger.addHandler(handler)

    def is_debug(self) -> bool:
        """デバッグレベルが有効か"""
        return self.logger.isEnabledFor(logging.DEBUG)

    def log_debug(self, message: str, meta: Optional[dict] = None):
        self.logger.debug(message, extra=meta or {})

    def log_info(self, message: str, meta: Optional[dict] = None):
        self.logger.info(message, extra=meta or {})

    def log_warning(self, message: str, meta: Optional[dict] = None):
        self.logger.warning(message, extra=meta or {})

    def log_error(self, message: str, meta: Optional[dict] = None):
        self.logger.error(message, extra=meta or {})


_default_helper: Optional[LogHelper] = None


def get_default_helper() -> LogHelper:
    """
    共有のデフォルトヘルパーを取得（未設定なら警告レベルで生成）

    Returns:
        LogHelper: デフォルトヘルパー
    """
    global _default_helper
    if _default_helper is None:
        _default_helper = LogHelper(level="warning")
    return _default_helper


def set_default_helper(helper: Any):
    """デフォルトヘルパーを差し替える"""
    global _default_helper
    _default_helper = helper
