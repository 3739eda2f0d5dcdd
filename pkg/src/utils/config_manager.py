#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
設定管理クラス
CDST_* 環境変数と config.yml を統合し、型変換した値を返します。
"""

import os
from typing import Any, Dict, List, Optional, Sequence

import yaml

from src.core.errors import ValidationError

_TRUE_WORDS = {"true", "yes", "1", "on"}
_FALSE_WORDS = {"false", "no", "0", "off", ""}


class ConfigManager:
    """設定管理クラス"""

    def __init__(self, config_file_path: Optional[str] = None):
        """
        設定マネージャーを初期化

        Args:
            config_file_path: config.yml のパス（存在しなければ環境変数とデフォルト値のみ）
        """
        self.config: Dict[str, Any] = {}
        # 設定名ごとの取得元（"env" / "yaml" / "default"）
        self.sources: Dict[str, str] = {}

        if config_file_path and os.path.isfile(config_file_path):
            try:
                with open(config_file_path, "r", encoding="utf-8") as config_file:
                    loaded = yaml.safe_load(config_file)
            except yaml.YAMLError as e:
                raise ValidationError(f"Invalid YAML in {config_file_path}: {e}")
            if loaded is not None and not isinstance(loaded, dict):
                raise ValidationError(f"{config_file_path} must contain a mapping at top level")
            self.config = loaded or {}

    def get_value(self, env_var_name: str, yaml_path: Optional[Sequence[str]] = None,
                  default: Any = None, is_number: bool = False, is_float: bool = False,
                  is_boolean: bool = False, is_list: bool = False, delimiter: str = ",") -> Any:
        """
        設定値を取得（優先順位: 環境変数 > YAML設定ファイル > デフォルト値）

        Args:
            env_var_name: 環境変数名
            yaml_path: YAML内の入れ子キー（例: ["solver", "tolerance"]）
            default: デフォルト値
            is_number: 整数に変換
            is_float: 浮動小数点数に変換
            is_boolean: ブール値に変換
            is_list: 区切り文字でリストに分割
            delimiter: リストの区切り文字

        Returns:
            変換済みの設定値

        Raises:
            ValidationError: 変換できない値
        """
        raw, source = self._resolve(env_var_name, yaml_path, default)
        self.sources[env_var_name] = source
        if raw is None:
            return None
        try:
            if is_number:
                return int(raw)
            if is_float:
                return float(raw)
            if is_boolean:
                return self._parse_boolean(raw)
            if is_list:
                return self._parse_list(raw, delimiter)
        except (TypeError, ValueError) as e:
            raise ValidationError(
                f"Invalid value for {env_var_name} (from {source}): {raw!r} ({e})")
        return raw

    def _resolve(self, env_var_name: str, yaml_path: Optional[Sequence[str]], default: Any):
        value = os.getenv(env_var_name)
        if value is not None:
            return value, "env"
        node: Any = self.config
        for key in yaml_path or ():
            if not isinstance(node, dict) or key not in node:
                return default, "default"
            node = node[key]
        if yaml_path:
            return node, "yaml"
        return default, "default"

    @staticmethod
    def _parse_boolean(value: Any) -> bool:
        if isinstance(value, bool):
            return value
        word = str(value).strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
        raise ValueError("expected one of true/false, yes/no, on/off, 1/0")

    @staticmethod
    def _parse_list(value: Any, delimiter: str) -> List[Any]:
        """文字列は区切り文字で分割（空要素は捨てる）、リストはそのまま"""
        if isinstance(value, (list, tuple)):
            return list(value)
        return [item.strip() for item in str(value).split(delimiter) if item.strip()]
