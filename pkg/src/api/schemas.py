#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
JSONスキーマ定義（Draft 7）
インスタンス・解ファイルの形式を定義します。形式の説明は README.md を参照してください。
"""

_ID = {"type": "string", "minLength": 1, "pattern": "^[^#]*$"}
_LENGTH = {"type": "number", "minimum": 0}

MATRIX_METRIC = {
    "type": "object",
    "required": ["type", "points", "matrix"],
    "properties": {
        "type": {"const": "matrix"},
        "points": {"type": "array", "items": _ID, "minItems": 1},
        "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}

EUCLIDEAN_METRIC = {
    "type": "object",
    "required": ["type", "points"],
    "properties": {
        "type": {"const": "euclidean"},
        "dimension": {"type": "integer", "minimum": 1},
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "coords"],
                "properties": {
                    "id": _ID,
                    "coords": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

GRAPH_METRIC = {
    "type": "object",
    "required": ["type", "edges"],
    "properties": {
        "type": {"const": "graph"},
        "vertices": {"type": "array", "items": _ID},
        "edges": {
            "type": "array",
            "items": {
                "type": "array",
                "items": [_ID, _ID, _LENGTH],
                "minItems": 3,
                "maxItems": 3,
            },
        },
    },
    "additionalProperties": False,
}

INSTANCE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "cdst instance",
    "type": "object",
    "required": ["metric", "root", "terminals"],
    "properties": {
        "name": {"type": "string"},
        "metric": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": ["matrix", "euclidean", "graph"]}},
            "allOf": [
                {"if": {"properties": {"type": {"const": "matrix"}}}, "then": MATRIX_METRIC},
                {"if": {"properties": {"type": {"const": "euclidean"}}}, "then": EUCLIDEAN_METRIC},
                {"if": {"properties": {"type": {"const": "graph"}}}, "then": GRAPH_METRIC},
            ],
        },
        "root": _ID,
        "terminals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "weight"],
                "properties": {"id": _ID, "weight": {"type": "number", "minimum": 0}},
                "additionalProperties": False,
            },
        },
        "arborescence": {
            "type": "array",
            "items": {"type": "array", "items": _ID, "minItems": 2, "maxItems": 2},
        },
        "meta": {"type": "object"},
    },
    "additionalProperties": False,
}

SOLUTION_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "cdst solution",
    "type": "object",
    "required": ["edges"],
    "properties": {
        "edges": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "positions": {"type": "object", "additionalProperties": {"type": "string"}},
        "costs": {
            "type": "object",
            "required": ["connection", "delay", "total"],
            "properties": {
                "connection": {"type": "number"},
                "delay": {"type": "number"},
                "total": {"type": "number"},
            },
        },
        "report": {"type": "object"},
    },
    "additionalProperties": False,
}
