#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
計測ユーティリティ
ノード訪問回数とステージごとの経過時間を記録します。
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict


@dataclass
class VisitCounter:
    """ノード訪問カウンタ（分割・再接続の線形性確認用）"""

    visits: int = 0
    by_stage: Dict[str, int] = field(default_factory=dict)

    def tick(self, stage: str, count: int = 1):
        self.visits += count
        self.by_stage[stage] = self.by_stage.get(stage, 0) + count


@dataclass
class StageTimer:
    """ステージ別の経過時間（秒）"""

    timings: Dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + (time.perf_counter() - start)
