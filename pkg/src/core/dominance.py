"""
优势关系模块
A[k] 与 B[k] 的胜负只取决于差骰子 Δ = A - B 的 k 次自卷积在 0 处的倾斜 (tilt)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from src.core.dice import Die, difference_die
from src.core.errors import PreconditionError, SpanUndefinedError
from src.core.lattice import PowerCache, common_lattice, convolve, support_gcd, to_lattice

logger = logging.getLogger(__name__)


class RelationLabel(Enum):
    """第一个参数视角下的胜负"""

    LOSS = 0
    TIE = 1
    WIN = 2

    @property
    def digit(self):
        return str(self.value)

    @property
    def letter(self):
        return self.name[0]

    @classmethod
    def from_letter(cls, letter):
        for label in cls:
            if label.letter == letter:
                return label
        raise ValueError(f"未知的胜负字符: {letter!r}")

    @classmethod
    def from_sign(cls, sign):
        if sign > 0:
            return cls.WIN
        if sign < 0:
            return cls.LOSS
        return cls.TIE

    def flipped(self):
        return RelationLabel(2 - self.value)


@dataclass(frozen=True)
class DominanceSequence:
    """labels[k-1] 为掷 k 次后的胜负"""

    labels: tuple

    @classmethod
    def from_letters(cls, text):
        return cls(tuple(RelationLabel.from_letter(c) for c in text))

    @property
    def kmax(self):
        return len(self.labels)

    def at(self, k):
        return self.labels[k - 1]

    def flipped(self):
        return DominanceSequence(tuple(label.flipped() for label in self.labels))

    def __str__(self):
        return "".join(label.letter for label in self.labels)


@dataclass(frozen=True)
class TiltCounts:
    """严格大于 / 等于 / 严格小于中心的总权重"""

    above: int
    equal: int
    below: int

    @property
    def total(self):
        return self.above + self.equal + self.below

    @property
    def margin(self):
        return self.above - self.below

    @property
    def tilt(self):
        return Fraction(self.margin, self.total)

    @property
    def label(self):
        return RelationLabel.from_sign(self.margin)

    def to_dict(self):
        return {
            "above": str(self.above),
            "equal": str(self.equal),
            "below": str(self.below),
            "total": str(self.total),
            "tilt": f"{self.tilt.numerator}/{self.tilt.denominator}",
        }


@dataclass(frozen=True)
class SpanShift:
    """支撑集都形如 a + b*k，b 取最大"""

    b: int
    a: int


@dataclass(frozen=True)
class TrinaryCode:
    digits: str
    value: int

    @property
    def kmax(self):
        return len(self.digits)


@dataclass(frozen=True)
class InversionWitness:
    """首次反转的见证"""

    k: int | None
    prefix_label: RelationLabel | None
    tie_at: int | None
    periodic_suffix: bool


def tilt_counts(dist, center=None):
    """
    统计分布在 center 两侧的权重
    center 默认为分布均值，可以是有理数
    """
    if center is None:
        center = dist.mean()
    center = Fraction(center)
    above = equal = below = 0
    for v, w in dist.items():
        if v > center:
            above += w
        elif v < center:
            below += w
        else:
            equal += w
    return TiltCounts(above, equal, below)


def label_at_zero(dist):
    """分布相对 {0} 骰子的胜负"""
    return tilt_counts(dist, 0).label


def difference_lattice(a, b):
    """差骰子映射到整数格点 (正缩放不改变胜负)"""
    _, dist = to_lattice(difference_die(a, b))
    return dist


def compare(a, b, k, kernel="auto"):
    if k < 1:
        raise PreconditionError(f"掷骰次数必须 >= 1: {k}")
    cache = PowerCache(difference_lattice(a, b), kernel)
    return label_at_zero(cache.power(k))


def iter_labels(dist, kmax, kernel="auto", cancel=None, start=1):
    """逐次卷积产出 (k, label)"""
    cache = PowerCache(dist, kernel, cancel)
    for k, current in cache.successive(start, kmax):
        yield k, label_at_zero(current)


def sequence_of(dist, kmax, kernel="auto", cancel=None):
    """格点分布对 {0} 的胜负序列"""
    if kmax < 1:
        raise PreconditionError(f"kmax 必须 >= 1: {kmax}")
    return DominanceSequence(tuple(label for _, label in iter_labels(dist, kmax, kernel, cancel)))


def dominance_sequence(a, b, kmax, kernel="auto", cancel=None):
    if kmax < 1:
        raise PreconditionError(f"kmax 必须 >= 1: {kmax}")
    if difference_die(a, b).is_symmetric():
        # 差骰子关于 0 对称，任意 k 都是平局
        logger.debug(f"差骰子对称，跳过卷积: {a} - {b}")
        return DominanceSequence((RelationLabel.TIE,) * kmax)
    return sequence_of(difference_lattice(a, b), kmax, kernel, cancel)


def trinary_code(seq):
    """LOSS/TIE/WIN -> 0/1/2，最早的一次掷骰为最高位"""
    digits = "".join(label.digit for label in seq.labels)
    return TrinaryCode(digits, int(digits, 3) if digits else 0)


def span_shift(dist):
    b = support_gcd(dist)
    if b == 0:
        raise SpanUndefinedError("单点支撑集没有 span")
    return SpanShift(b, dist.offset % b)


def suffix_period(labels, max_period):
    """
    观察到的后半段是否与某个 <= max_period 的周期一致
    返回最小的这样的周期，没有则返回 None (仅为启发式判断)
    """
    labels = list(labels)
    start = len(labels) // 2
    for p in range(1, max_period + 1):
        if start + p >= len(labels):
            break
        if all(labels[i] == labels[i + p] for i in range(start, len(labels) - p)):
            return p
    return None


def scan_inversion(labels, max_period=None):
    """
    在胜负序列中找首次反转
    前缀必须是同一个严格胜负，随后出现相反的严格胜负；中途出现平局则记录并放弃
    """
    labels = list(labels)
    periodic = max_period is not None and suffix_period(labels, max_period) is not None
    if not labels or labels[0] is RelationLabel.TIE:
        return InversionWitness(None, None, 1 if labels else None, periodic)
    first = labels[0]
    for k, label in enumerate(labels[1:], start=2):
        if label is first:
            continue
        if label is RelationLabel.TIE:
            return InversionWitness(None, first, k, periodic)
        return InversionWitness(k, first, None, periodic)
    return InversionWitness(None, first, None, periodic)


def inversion_witness(a, b, kmax, kernel="auto", cancel=None):
    seq = dominance_sequence(a, b, kmax, kernel, cancel)
    return scan_inversion(seq.labels, max_period=max(a.sides, b.sides))


def first_inversion(a, b, kmax, kernel="auto", cancel=None):
    return inversion_witness(a, b, kmax, kernel, cancel).k


def cycle_direction(dice, k, kernel="auto"):
    """
    1: dice[0] > dice[1] > ... > dice[0]
    -1: 反向成环
    0: 不成环
    """
    if len(dice) < 3:
        raise PreconditionError("成环判断至少需要 3 个骰子")
    if k < 1:
        raise PreconditionError(f"掷骰次数必须 >= 1: {k}")
    # 所有骰子共用一个 scale，A - B 即 A 与 -B 的卷积
    _, dists = common_lattice(*dice)
    labels = []
    for i, da in enumerate(dists):
        db = dists[(i + 1) % len(dists)]
        diff = convolve(da, db.negated(), kernel)
        labels.append(label_at_zero(PowerCache(diff, kernel).power(k)))
    if all(label is RelationLabel.WIN for label in labels):
        return 1
    if all(label is RelationLabel.LOSS for label in labels):
        return -1
    return 0


def is_intransitive_cycle(dice, k, kernel="auto"):
    return cycle_direction(dice, k, kernel) == 1


ZERO_DIE = Die((0,))
