#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
メトリック空間クラス
明示的な距離行列・ユークリッド点列・辺重み付きグラフ（最短路閉包）の3種類を扱います。
グラフメトリックは必要になった始点から最短路を計算し、結果を読み取り専用の行としてロック付きで保持します。
行は入力グラフだけで決まるため、問い合わせの順序やスレッドによらず同じ距離を返します。
"""

import math
import threading
from abc import ABC, abstractmethod
from functools import cached_property
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import networkx as nx
import numpy as np

from src.core.errors import ValidationError

TOLERANCE = 1e-9

# コピー頂点ラベルの区切り文字（点IDには使用不可）
COPY_SEPARATOR = "#"


class Metric(ABC):
    """メトリック空間の基底クラス"""

    kind = "abstract"

    def __init__(self, point_ids: Sequence[str]):
        """
        初期化

        Args:
            point_ids: 点IDのリスト（文字列、重複不可）
        """
        ids = [str(p) for p in point_ids]
        if len(set(ids)) != len(ids):
            raise ValidationError("Duplicate point ids in metric")
        for p in ids:
            if COPY_SEPARATOR in p:
                raise ValidationError(f"Point id {p!r} must not contain {COPY_SEPARATOR!r}")
        self.point_ids: Tuple[str, ...] = tuple(ids)
        self.index: Dict[str, int] = {p: i for i, p in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.point_ids)

    def __contains__(self, point: str) -> bool:
        return point in self.index

    @abstractmethod
    def distance(self, u: str, v: str) -> float:
        """2点間の距離"""

    def distances_from(self, source: str) -> Dict[str, float]:
        """
        始点から全点への距離

        Args:
            source: 始点ID

        Returns:
            dict: 点ID -> 距離
        """
        return {p: self.distance(source, p) for p in self.point_ids}

    @cached_property
    def matrix(self) -> np.ndarray:
        """全点対距離行列（point_ids順）"""
        n = len(self.point_ids)
        result = np.zeros((n, n))
        for i, u in enumerate(self.point_ids):
            row = self.distances_from(u)
            result[i, :] = [row[p] for p in self.point_ids]
        return result

    def as_graph(self) -> nx.Graph:
        """
        点集合上のグラフ表現（行列・ユークリッドは完全グラフ）

        Returns:
            nx.Graph: 'weight' 属性付きグラフ
        """
        graph = nx.Graph()
        graph.add_nodes_from(self.point_ids)
        d = self.matrix
        n = len(self.point_ids)
        for i in range(n):
            for j in range(i + 1, n):
                graph.add_edge(self.point_ids[i], self.point_ids[j], weight=float(d[i, j]))
        return graph

    @abstractmethod
    def to_json(self) -> Dict[str, Any]:
        """JSON表現"""


class MatrixMetric(Metric):
    """明示的な対称距離行列"""

    kind = "matrix"

    def __init__(self, point_ids: Sequence[str], matrix: Any, tolerance: float = TOLERANCE):
        super().__init__(point_ids)
        d = np.asarray(matrix, dtype=float)
        n = len(self.point_ids)
        if d.shape != (n, n):
            raise ValidationError(f"Distance matrix shape {d.shape} does not match {n} points")
        self._audit(d, tolerance)
        # 読み取り専用にして共有可能にする
        d.setflags(write=False)
        self.__dict__["matrix"] = d

    def _audit(self, d: np.ndarray, tolerance: float):
        """対称性・非負性・対角0・三角不等式の監査"""
        if not np.all(np.isfinite(d)):
            raise ValidationError("Distance matrix contains non-finite entries")
        if np.any(d < 0):
            i, j = np.argwhere(d < 0)[0]
            raise ValidationError(
                f"Negative distance between {self.point_ids[i]!r} and {self.point_ids[j]!r}")
        if np.any(np.abs(np.diag(d)) > tolerance):
            i = int(np.argmax(np.abs(np.diag(d))))
            raise ValidationError(f"Nonzero self-distance at {self.point_ids[i]!r}")
        if np.any(np.abs(d - d.T) > tolerance):
            i, j = np.argwhere(np.abs(d - d.T) > tolerance)[0]
            raise ValidationError(
                f"Asymmetric distance between {self.point_ids[i]!r} and {self.point_ids[j]!r}")
        for k in range(d.shape[0]):
            via_k = d[:, k:k + 1] + d[k:k + 1, :]
            bad = d > via_k + tolerance
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                raise ValidationError(
                    "Triangle inequality violated: "
                    f"c({self.point_ids[i]},{self.point_ids[j]}) > "
                    f"c({self.point_ids[i]},{self.point_ids[k]}) + c({self.point_ids[k]},{self.point_ids[j]})")

    def distance(self, u: str, v: str) -> float:
        return float(self.matrix[self.index[u], self.index[v]])

    def distances_from(self, source: str) -> Dict[str, float]:
        row = self.matrix[self.index[source]]
        return {p: float(row[i]) for i, p in enumerate(self.point_ids)}

    def to_json(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "points": list(self.point_ids),
            "matrix": self.matrix.tolist(),
        }


class EuclideanMetric(Metric):
    """ユークリッド空間の点列"""

    kind = "euclidean"

    def __init__(self, point_ids: Sequence[str], coordinates: Any):
        super().__init__(point_ids)
        coords = np.asarray(coordinates, dtype=float)
        if coords.ndim != 2 or coords.shape[0] != len(self.point_ids):
            raise ValidationError(
                f"Coordinates shape {coords.shape} does not match {len(self.point_ids)} points")
        if not np.all(np.isfinite(coords)):
            raise ValidationError("Coordinates contain non-finite values")
        coords.setflags(write=False)
        self.coordinates = coords
        self.dimension = int(coords.shape[1])
        self._tuples: List[Tuple[float, ...]] = [tuple(row) for row in coords.tolist()]

    def distance(self, u: str, v: str) -> float:
        return math.dist(self._tuples[self.index[u]], self._tuples[self.index[v]])

    @cached_property
    def matrix(self) -> np.ndarray:
        diff = self.coordinates[:, None, :] - self.coordinates[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
        d.setflags(write=False)
        return d

    def to_json(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "dimension": self.dimension,
            "points": [{"id": p, "coords": list(c)} for p, c in zip(self.point_ids, self._tuples)],
        }


class GraphMetric(Metric):
    """辺重み付き無向グラフの最短路閉包"""

    kind = "graph"

    def __init__(self, graph: nx.Graph):
        if graph.number_of_nodes() == 0:
            raise ValidationError("Graph metric needs at least one vertex")
        super().__init__([str(v) for v in graph.nodes])
        for u, v, data in graph.edges(data=True):
            weight = data.get("weight")
            if weight is None or not math.isfinite(weight) or weight < 0:
                raise ValidationError(f"Edge {u}-{v} has invalid length {weight!r}")
        if not nx.is_connected(graph):
            isolated = sorted(nx.connected_components(graph), key=len)[0]
            raise ValidationError(f"Graph is not connected (e.g. vertex {sorted(isolated)[0]!r})")
        self.graph = nx.freeze(graph.copy())
        # 始点 -> 読み取り専用の距離行（凍結グラフから一意に決まるメモ）
        self._rows: Dict[str, Mapping[str, float]] = {}
        self._rows_lock = threading.Lock()

    def distances_from(self, source: str) -> Mapping[str, float]:
        if source not in self.index:
            raise ValidationError(f"Unknown point {source!r}")
        with self._rows_lock:
            row = self._rows.get(source)
            if row is None:
                lengths = nx.single_source_dijkstra_path_length(self.graph, source, weight="weight")
                row = MappingProxyType({p: float(lengths[p]) for p in self.point_ids})
                self._rows[source] = row
        return row

    def distance(self, u: str, v: str) -> float:
        # 対称なので既に計算済みの行があればそちらを使う
        row = self._rows.get(v)
        if row is not None and u not in self._rows:
            return row[u]
        return self.distances_from(u)[v]

    def as_graph(self) -> nx.Graph:
        return nx.Graph(self.graph)

    def to_json(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "vertices": list(self.point_ids),
            "edges": [[u, v, float(d["weight"])] for u, v, d in self.graph.edges(data=True)],
        }
