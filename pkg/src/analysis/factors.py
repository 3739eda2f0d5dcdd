#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
近似係数と解析関数
近似係数 β + β/(√(β²+1)+β−1)、ベースライン係数 1+β、領域 X^μ 上の関数 f, g、
係数の上界を与える関数 h、下界ギャップ族の予測値を計算します。
関数はスカラーと numpy 配列の両方を受け付けます。
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.core.errors import ValidationError

ArrayLike = Union[float, np.ndarray]

# 係数表の β（1, ln 4, 1.5, 2）
TABLE_BETAS: Tuple[float, ...] = (1.0, math.log(4.0), 1.5, 2.0)

SQRT2 = math.sqrt(2.0)


def _check_beta(beta: float):
    if not math.isfinite(beta) or beta < 1:
        raise ValidationError(f"beta must be >= 1 (got {beta})")


def factor_constant(beta: float) -> float:
    """a = β/(√(β²+1)+β−1)"""
    _check_beta(beta)
    return beta / (math.sqrt(beta * beta + 1.0) + beta - 1.0)


def approx_factor(beta: float) -> float:
    """
    改良アルゴリズムの近似係数 β + β/(√(β²+1)+β−1)

    Args:
        beta: 初期シュタイナー木の近似係数（≥ 1）

    Returns:
        float: 近似係数
    """
    return beta + factor_constant(beta)


def baseline_factor(beta: float) -> float:
    """ベースライン（μ = 1/β）の近似係数 1 + β"""
    _check_beta(beta)
    return 1.0 + beta


@dataclass(frozen=True)
class FactorTable:
    """係数表の1列"""

    beta: float
    factor: float
    constant: float
    baseline: float

    def to_json(self):
        return {"beta": self.beta, "factor": self.factor, "constant": self.constant,
                "baseline": self.baseline}


def factor_table(betas: Sequence[float] = TABLE_BETAS) -> List[FactorTable]:
    """
    β ごとに両方の近似係数を並べた表

    Args:
        betas: β のリスト

    Returns:
        list: FactorTable のリスト
    """
    return [FactorTable(float(b), approx_factor(b), factor_constant(b), baseline_factor(b))
            for b in betas]


def round_up(value: float, digits: int = 5) -> float:
    """係数表の表示値（上界なので小数 digits 桁に切り上げ）"""
    scale = 10 ** digits
    return math.ceil(value * scale - 1e-9) / scale


def _scalar_or_array(value: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


def _check_x_domain(a, b, c, mu):
    """(a,b,c) ∈ X^μ を検証し、最初に破れた制約を名指しで報告"""
    if not (isinstance(mu, (int, float)) and math.isfinite(mu) and mu > 0):
        raise ValidationError(f"mu must be a positive finite number (got {mu})")
    constraints = (
        ("mu < a", a > mu),
        ("a < 2*mu", a < 2 * mu),
        ("0 < b", b > 0),
        ("b < mu", b < mu),
        ("0 < c", c > 0),
        ("c < mu", c < mu),
        ("c <= a - b", c <= a - b),
        ("a - b < mu", a - b < mu),
    )
    for name, holds in constraints:
        if not np.all(holds):
            raise ValidationError(f"(a, b, c) outside X^mu: constraint {name} violated")


def _f_g_common(a, b, c, mu):
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    _check_x_domain(a, b, c, mu)
    d = a - b
    head = 2.0 * (a - c) * c / a - mu / 2.0
    scale = (1.0 / a - 1.0 / mu) / (1.0 / d - 1.0 / mu)
    return a, b, c, d, head, scale


def f_func(a: ArrayLike, b: ArrayLike, c: ArrayLike, mu: float) -> ArrayLike:
    """
    f(a,b,c) = 2(a−c)c/a − μ/2 + (1/a − 1/μ)/(1/(a−b) − 1/μ) · (μ/2 − 2((a−b)−c)c/(a−b))

    Args:
        a, b, c: X^μ の点（スカラーまたは同形状の配列）
        mu: μ > 0

    Returns:
        float または ndarray
    """
    a_, b_, c_, d, head, scale = _f_g_common(a, b, c, mu)
    value = head + scale * (mu / 2.0 - 2.0 * (d - c_) * c_ / d)
    return _scalar_or_array(value, a, b, c)


def g_func(a: ArrayLike, b: ArrayLike, c: ArrayLike, mu: float) -> ArrayLike:
    """g(a,b,c) = 2(a−c)c/a − μ/2 + (1/a − 1/μ)/(1/(a−b) − 1/μ) · μ/2"""
    a_, b_, c_, d, head, scale = _f_g_common(a, b, c, mu)
    value = head + scale * (mu / 2.0)
    return _scalar_or_array(value, a, b, c)


def f_closed(a: ArrayLike, b: ArrayLike, c: ArrayLike, mu: float) -> ArrayLike:
    """f の閉形式 −b(2c−μ)²/(2a(μ+b−a))"""
    a_, b_, c_ = (np.asarray(x, dtype=float) for x in (a, b, c))
    _check_x_domain(a_, b_, c_, mu)
    value = -b_ * (2.0 * c_ - mu) ** 2 / (2.0 * a_ * (mu + b_ - a_))
    return _scalar_or_array(value, a, b, c)


def sample_x_domain(mu: float, size: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    X^μ から一様に近い標本を生成

    a ∈ (μ, 2μ)、b ∈ (0, μ) を引き、a − b < μ でないものを棄却し、
    c を (0, a−b] から一様に引きます。

    Args:
        mu: μ > 0
        size: 標本数
        rng: 乱数生成器

    Returns:
        (ndarray, ndarray, ndarray): a, b, c
    """
    if mu <= 0:
        raise ValidationError("mu must be positive")
    chunks_a, chunks_b = [], []
    have = 0
    while have < size:
        a = mu * (1.0 + rng.random(2 * size))
        b = mu * rng.random(2 * size)
        keep = (a - b < mu) & (a > mu) & (b > 0)
        chunks_a.append(a[keep])
        chunks_b.append(b[keep])
        have += int(keep.sum())
    a = np.concatenate(chunks_a)[:size]
    b = np.concatenate(chunks_b)[:size]
    c = (a - b) * (1.0 - rng.random(size))
    return a, b, c


def h_func(x: ArrayLike, y: ArrayLike, beta: float) -> ArrayLike:
    """
    h(x,y) = (βx + y + √2·√(βxy)) / (x+y)

    Args:
        x: > 0（C_SMT に相当）
        y: ≥ 0（D に相当）
        beta: ≥ 1

    Returns:
        float または ndarray
    """
    _check_beta(beta)
    x_ = np.asarray(x, dtype=float)
    y_ = np.asarray(y, dtype=float)
    if not np.all(x_ > 0):
        raise ValidationError("h requires x > 0")
    if not np.all(y_ >= 0):
        raise ValidationError("h requires y >= 0")
    value = (beta * x_ + y_ + SQRT2 * np.sqrt(beta * x_ * y_)) / (x_ + y_)
    return _scalar_or_array(value, x, y)


def h_maximizer(beta: float, y: float = 1.0) -> Tuple[float, float]:
    """
    与えた y に対して h を最大にする x（√x = √β/(√2·a)·√y）

    Args:
        beta: ≥ 1
        y: > 0

    Returns:
        (float, float): (x, y)
    """
    if y <= 0:
        raise ValidationError("h_maximizer requires y > 0")
    a = factor_constant(beta)
    return beta * y / (2.0 * a * a), y


def gap_formulas(k: int, delta_prime: float) -> Tuple[float, float]:
    """
    下界ギャップ族の下界と最適値

    Args:
        k: 端子 t_i の数（≥ 1）
        delta_prime: c–t_i パスの辺長上限（0 < δ′ < 1/k）

    Returns:
        (float, float): (lb, opt) = (2 + √2·k, (1+√2)k + 2 − δ′k)
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be an integer >= 1 (got {k})")
    if not (0 < delta_prime < 1.0 / k):
        raise ValidationError(f"delta_prime must satisfy 0 < delta_prime < 1/k (got {delta_prime})")
    lb = 2.0 + SQRT2 * k
    opt = (1.0 + SQRT2) * k + 2.0 - delta_prime * k
    return lb, opt


def gap_ratio_sequence(max_k: int, delta_prime_scale: float = 0.5) -> List[float]:
    """
    k = 1..max_k の予測比 opt/lb（δ′_k = scale/k）

    Args:
        max_k: 最大の k
        delta_prime_scale: δ′_k·k（0 < scale < 1）

    Returns:
        list: 比の列（単調増加で 1 + 1/√2 に近づく）
    """
    if not (0 < delta_prime_scale < 1):
        raise ValidationError("delta_prime_scale must lie in (0, 1)")
    ratios = []
    for k in range(1, max_k + 1):
        lb, opt = gap_formulas(k, delta_prime_scale / k)
        ratios.append(opt / lb)
    return ratios


def discretized_gap_optimum(k: int, rc_edge: float, ct_edge: float) -> float:
    """
    有限離散化したギャップインスタンスの厳密最適値

    全頂点が端子なので解は全域木で、r と c を結ぶ k+1 本の経路のうち k 本を1辺ずつ切ります。
    星辺を切ると遅延が増えるため、切るのは c–t_i パスの辺（または r–c パスの辺を1本）です。

    Args:
        k: 端子 t_i の数
        rc_edge: r–c パスの辺長
        ct_edge: c–t_i パスの辺長

    Returns:
        float: 最適値 (1+√2)k + 2 − (k·ct_edge + max(0, rc_edge − ct_edge))
    """
    if k < 1 or rc_edge <= 0 or ct_edge <= 0:
        raise ValidationError("discretized_gap_optimum needs k >= 1 and positive edge lengths")
    saving = k * ct_edge + max(0.0, rc_edge - ct_edge)
    return (1.0 + SQRT2) * k + 2.0 - saving
