"""
迟反转骰子族 Δ(x) = {x, 5, 3, -9, 1-x}
首次反转扫描、A=B 条件分布以及 x > 9k 时的恒定倾斜
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple

import numpy as np

from src.core.dice import Die, format_rational, raw_moment
from src.core.dominance import RelationLabel, iter_labels, tilt_counts
from src.core.errors import DegenerateFitError, PreconditionError
from src.core.lattice import mixture, power, support_gcd, to_lattice
from src.core.workers import run_ordered

logger = logging.getLogger(__name__)

CORE_FACES = (5, 3, -9)


@dataclass(frozen=True)
class FamilyPoint:
    """
    单个 x 的扫描结果
    first_inversion 为 None 表示 kmax_searched 之内没有反转；
    tie_at 记录打断全胜前缀的平局
    """

    x: Fraction
    first_inversion: int | None
    kmax_searched: int
    gate_span_one: bool = True
    gate_positive_third_moment: bool = True
    tie_at: int | None = None

    def __post_init__(self):
        if self.first_inversion is not None and self.first_inversion > self.kmax_searched:
            raise PreconditionError(f"首次反转 {self.first_inversion} 超出搜索范围 {self.kmax_searched}")

    @property
    def gates_passed(self):
        return self.gate_span_one and self.gate_positive_third_moment

    def to_dict(self):
        return {
            "x": format_rational(self.x),
            "first_inversion": self.first_inversion,
            "kmax_searched": self.kmax_searched,
            "gate_span_one": self.gate_span_one,
            "gate_positive_third_moment": self.gate_positive_third_moment,
            "tie_at": self.tie_at,
        }


@dataclass(frozen=True)
class TiltInvariance:
    holds: bool
    counts_1: object
    counts_2: object
    conditional_margin: int


class QuadraticFit(NamedTuple):
    c2: float
    c1: float
    c0: float
    residual: float


def family_die(x):
    x = Fraction(x)
    return Die((x, *CORE_FACES, 1 - x))


def conditional_pair_distribution(k):
    """
    E[k]：x 与 1-x 出现次数相同 (A = B) 时的和分布
    A 对 (x, 1-x) 合计贡献 +A，其余 k-2A 次来自 {5, 3, -9}
    """
    if k < 1:
        raise PreconditionError(f"k 必须 >= 1: {k}")
    _, core = to_lattice(Die(CORE_FACES))
    parts = []
    for a in range(k // 2 + 1):
        coef = factorial(k) // (factorial(a) ** 2 * factorial(k - 2 * a))
        parts.append((coef, power(core, k - 2 * a).shifted(a)))
    return mixture(parts)


def conditional_tilt(k):
    return tilt_counts(conditional_pair_distribution(k), 0)


def _family_counts(x, k):
    _, dist = to_lattice(family_die(x))
    return tilt_counts(power(dist, k), 0)


def tilt_invariance_check(x1, x2, k):
    """x1、x2 都严格大于 9k 时，两者在 0 处的计数应完全相同，且净胜权重等于 E[k] 的净胜权重"""
    x1, x2 = Fraction(x1), Fraction(x2)
    if k < 1:
        raise PreconditionError(f"k 必须 >= 1: {k}")
    if min(x1, x2) <= 9 * k:
        raise PreconditionError(f"需要 min(x1, x2) > 9k = {9 * k}，收到 {format_rational(min(x1, x2))}")
    counts_1 = _family_counts(x1, k)
    counts_2 = counts_1 if x1 == x2 else _family_counts(x2, k)
    conditional_margin = conditional_tilt(k).margin
    holds = counts_1 == counts_2 and counts_1.margin == conditional_margin
    if not holds:
        logger.warning(f"倾斜不恒定: x = {x1}, {x2}, k = {k}: {counts_1} / {counts_2} / {conditional_margin}")
    return TiltInvariance(holds, counts_1, counts_2, conditional_margin)


def _scan_task(task):
    x, kmax, kernel = task
    die = family_die(x)
    _, dist = to_lattice(die)
    span_one = support_gcd(dist) == 1
    positive_skew = raw_moment(die, 3) > 0
    first_inversion = tie_at = None
    for k, label in iter_labels(dist, kmax, kernel):
        if label is RelationLabel.WIN:
            continue
        if label is RelationLabel.LOSS and k > 1:
            first_inversion = k
        elif label is RelationLabel.TIE:
            tie_at = k
        break
    return FamilyPoint(x, first_inversion, kmax, span_one, positive_skew, tie_at)


def first_inversion_scan(xs, kmax, jobs=1, kernel="auto", cancel=None, progress_updated=None):
    """
    每个 x 找第一个 k：之前全胜、此时严格输
    span 不为 1 或三阶矩不为正的点照常扫描，只做标记
    """
    if kmax < 1:
        raise PreconditionError(f"kmax 必须 >= 1: {kmax}")
    tasks = [(Fraction(x), kmax, kernel) for x in sorted(set(Fraction(x) for x in xs))]
    logger.info(f"扫描 {len(tasks)} 个 x，kmax = {kmax}")
    points = list(run_ordered(_scan_task, tasks, jobs, cancel, progress_updated))
    for point in points:
        if not point.gates_passed:
            logger.warning(f"x = {format_rational(point.x)} 不满足 span 为 1 且三阶矩为正的条件")
    return points


def is_nondecreasing(points):
    """已找到的反转时间是否随 x 单调不减"""
    found = [p.first_inversion for p in sorted(points, key=lambda p: p.x) if p.first_inversion is not None]
    return all(a <= b for a, b in zip(found, found[1:]))


def quadratic_fit(points):
    """最小二乘二次拟合，返回系数和残差范数"""
    points = list(points)
    if len({Fraction(x) for x, _ in points}) < 3:
        raise DegenerateFitError("二次拟合至少需要 3 个不同的 x")
    xs = np.array([float(x) for x, _ in points])
    ks = np.array([float(k) for _, k in points])
    c2, c1, c0 = np.polyfit(xs, ks, 2)
    residual = float(np.linalg.norm(np.polyval([c2, c1, c0], xs) - ks))
    return QuadraticFit(float(c2), float(c1), float(c0), residual)
