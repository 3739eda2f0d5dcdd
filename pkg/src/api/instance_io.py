#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
インスタンス・解・レポートのファイル入出力
読み込み時は jsonschema で検証し、違反箇所を JSON ポインタで報告します。
"""

import json
from typing import Any, Dict, Optional

import networkx as nx
from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from src.api.schemas import INSTANCE_SCHEMA, SOLUTION_SCHEMA
from src.core.errors import InstanceParseError
from src.core.metric import EuclideanMetric, GraphMetric, MatrixMetric, Metric
from src.core.model import CostBreakdown, Instance, Solution, Terminal

_INSTANCE_VALIDATOR = Draft7Validator(INSTANCE_SCHEMA)
_SOLUTION_VALIDATOR = Draft7Validator(SOLUTION_SCHEMA)


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def load_json(path: str) -> Any:
    """
    JSONファイルを読み込む（NaN / Infinity は拒否）

    Args:
        path: ファイルパス

    Returns:
        読み込んだオブジェクト
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"Malformed JSON in {path}: {e.msg} (line {e.lineno})")
    except ValueError as e:
        raise InstanceParseError(f"Invalid JSON in {path}: {str(e)}")
    except OSError as e:
        raise InstanceParseError(f"Could not read {path}: {str(e)}")


def _validate(validator: Draft7Validator, data: Any, what: str):
    error = best_match(validator.iter_errors(data))
    if error is not None:
        raise InstanceParseError(f"{what} schema violation: {error.message}",
                                 _pointer(error.absolute_path))


def _metric_from_json(metric: Dict[str, Any]) -> Metric:
    kind = metric["type"]
    if kind == "matrix":
        return MatrixMetric(metric["points"], metric["matrix"])
    if kind == "euclidean":
        points = metric["points"]
        dimension = metric.get("dimension", len(points[0]["coords"]))
        for i, point in enumerate(points):
            if len(point["coords"]) != dimension:
                raise InstanceParseError(
                    f"Point {point['id']!r} has {len(point['coords'])} coordinates, expected {dimension}",
                    f"/metric/points/{i}/coords")
        return EuclideanMetric([p["id"] for p in points], [p["coords"] for p in points])
    graph = nx.Graph()
    graph.add_nodes_from(metric.get("vertices", []))
    for i, (u, v, w) in enumerate(metric["edges"]):
        if u == v:
            raise InstanceParseError(f"Self-loop on vertex {u!r}", f"/metric/edges/{i}")
        graph.add_edge(u, v, weight=float(w))
    return GraphMetric(graph)


def instance_from_json(data: Any) -> Instance:
    """
    JSONオブジェクトからインスタンスを生成

    Args:
        data: json.load の結果

    Returns:
        Instance: 検証済みのインスタンス
    """
    _validate(_INSTANCE_VALIDATOR, data, "Instance")
    metric = _metric_from_json(data["metric"])
    terminals = tuple(Terminal(t["id"], float(t["weight"])) for t in data["terminals"])
    arborescence = data.get("arborescence")
    return Instance(
        metric=metric,
        root=data["root"],
        terminals=terminals,
        name=data.get("name", ""),
        arborescence=tuple(tuple(e) for e in arborescence) if arborescence is not None else None,
        meta=data.get("meta", {}),
    )


def instance_to_json(instance: Instance) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "name": instance.name,
        "metric": instance.metric.to_json(),
        "root": instance.root,
        "terminals": [{"id": t.id, "weight": t.weight} for t in instance.terminals],
    }
    if instance.arborescence is not None:
        data["arborescence"] = [list(e) for e in instance.arborescence]
    if instance.meta:
        data["meta"] = dict(instance.meta)
    return data


def read_instance(path: str) -> Instance:
    """インスタンスファイルを読み込む"""
    return instance_from_json(load_json(path))


def _dump(path: str, data: Any):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, allow_nan=False)
        handle.write("\n")


def write_instance(path: str, instance: Instance):
    """インスタンスをJSONで書き出す"""
    _dump(path, instance_to_json(instance))


def write_solution(path: str, solution: Solution, report: Optional[Any] = None):
    """
    解をJSONで書き出す

    Args:
        path: 出力先
        solution: 解（costs 付き）
        report: 指定時は "report" キーに RunReport を埋め込む
    """
    data = solution.to_json()
    if report is not None:
        data["report"] = report.to_json()
    _dump(path, data)


def write_report(path: str, report: Any):
    """RunReport をJSONで書き出す"""
    _dump(path, report.to_json())


def read_solution(path: str) -> Solution:
    """
    解ファイルを読み込む

    Args:
        path: ファイルパス

    Returns:
        Solution: 解（ファイルに costs があれば付与）
    """
    data = load_json(path)
    _validate(_SOLUTION_VALIDATOR, data, "Solution")
    costs = None
    if "costs" in data:
        c = data["costs"]
        costs = CostBreakdown(float(c["connection"]), float(c["delay"]), float(c["total"]))
    return Solution(edges=tuple(tuple(e) for e in data["edges"]),
                    positions=data.get("positions", {}), costs=costs)
