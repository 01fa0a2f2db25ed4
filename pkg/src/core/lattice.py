"""
整数格点分布模块
精确表示 D[k] 的分布：起点 offset + 连续的大整数权重数组
卷积内核可替换：默认逐项乘法，长数组时走 Kronecker 打包 + gmpy2 大整数乘法
"""

import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import gmpy2

from src.core.errors import ComputationCancelled

# 大整数十进制输出不设上限
sys.set_int_max_str_digits(0)

logger = logging.getLogger(__name__)

DEFAULT_KRONECKER_MIN_LENGTH = 48

_kronecker_min_length = DEFAULT_KRONECKER_MIN_LENGTH


def set_kronecker_min_length(length):
    """设置 auto 内核切换到 Kronecker 的最短长度"""
    global _kronecker_min_length
    _kronecker_min_length = max(1, int(length))


@dataclass(frozen=True)
class LatticeDistribution:
    """整数格点上的精确分布，P(v) = weights[v - offset] / total"""

    offset: int
    weights: tuple
    total: int

    def __post_init__(self):
        if not self.weights:
            raise ValueError("权重数组不能为空")
        if self.weights[0] == 0 or self.weights[-1] == 0:
            raise ValueError("支撑集首尾权重必须非零")
        if self.total < 1:
            raise ValueError(f"总权重必须 >= 1: {self.total}")

    @classmethod
    def from_weights(cls, offset, weights, total=None):
        """裁剪首尾零权重后构造；total 未给出时重新求和并检查非负"""
        weights = list(weights)
        lo, hi = 0, len(weights) - 1
        while lo <= hi and weights[lo] == 0:
            lo += 1
        while hi >= lo and weights[hi] == 0:
            hi -= 1
        if lo > hi:
            raise ValueError("权重全为零")
        trimmed = tuple(weights[lo:hi + 1])
        if total is None:
            if any(w < 0 for w in trimmed):
                raise ValueError("权重不能为负")
            total = sum(trimmed)
        return cls(offset + lo, trimmed, total)

    @classmethod
    def point(cls, value=0):
        return cls(value, (1,), 1)

    def __len__(self):
        return len(self.weights)

    @property
    def min_value(self):
        return self.offset

    @property
    def max_value(self):
        return self.offset + len(self.weights) - 1

    def is_point_mass(self):
        return len(self.weights) == 1

    def items(self):
        """按值递增输出 (value, weight)，跳过零权重"""
        for i, w in enumerate(self.weights):
            if w:
                yield self.offset + i, w

    def support(self):
        return [v for v, _ in self.items()]

    def weight_at(self, value):
        index = value - self.offset
        if 0 <= index < len(self.weights):
            return self.weights[index]
        return 0

    def probability(self, value):
        return Fraction(self.weight_at(value), self.total)

    def moment(self, k):
        """原点矩 E[X^k]"""
        return Fraction(sum(v ** k * w for v, w in self.items()), self.total)

    def mean(self):
        return self.moment(1)

    def variance(self):
        mu = self.mean()
        return self.moment(2) - mu * mu

    def negated(self):
        return LatticeDistribution(-self.max_value, tuple(reversed(self.weights)), self.total)

    def shifted(self, c):
        return LatticeDistribution(self.offset + int(c), self.weights, self.total)

    def to_dict(self):
        return {
            "offset": self.offset,
            "length": len(self.weights),
            "total": str(self.total),
            "weights": [str(w) for w in self.weights],
        }


DELTA0 = LatticeDistribution.point(0)


def to_lattice(die):
    """
    把骰子映射到整数格点
    scale 为所有分母的最小公倍数，面值 f 落在整数 scale * f 上
    """
    scale = lcm(*(f.denominator for f in die.faces))
    return scale, _tally([int(f * scale) for f in die.faces])


def common_lattice(*dice):
    """多个骰子共用一个 scale"""
    scale = lcm(*(f.denominator for die in dice for f in die.faces))
    return scale, [_tally([int(f * scale) for f in die.faces]) for die in dice]


def _tally(values):
    lo = min(values)
    weights = [0] * (max(values) - lo + 1)
    for v in values:
        weights[v - lo] += 1
    return LatticeDistribution(lo, tuple(weights), len(values))


# ---------------------------------------------------------------------------
# 卷积内核
# ---------------------------------------------------------------------------

def schoolbook_kernel(w1, w2):
    """逐项乘法卷积"""
    if len(w1) > len(w2):
        w1, w2 = w2, w1
    n2 = len(w2)
    out = [0] * (len(w1) + n2 - 1)
    for i, a in enumerate(w1):
        if not a:
            continue
        out[i:i + n2] = [o + a * b for o, b in zip(out[i:i + n2], w2)]
    return out


def _pack(weights, width):
    """把权重数组按固定字节宽度拼成一个大整数 (小端)"""
    return gmpy2.mpz(int.from_bytes(b"".join(w.to_bytes(width, "little") for w in weights), "little"))


def kronecker_kernel(w1, w2):
    """
    Kronecker 代换：两组权重各自打包成一个大整数，一次乘法后按槽位拆开
    槽宽留足保护位，保证系数之间没有进位
    """
    bound = max(w1) * max(w2) * min(len(w1), len(w2))
    width = bound.bit_length() // 8 + 1
    packed1 = _pack(w1, width)
    packed2 = packed1 if w2 is w1 else _pack(w2, width)
    n = len(w1) + len(w2) - 1
    raw = int(packed1 * packed2).to_bytes(width * n, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(n)]


KERNELS = {
    "schoolbook": schoolbook_kernel,
    "kronecker": kronecker_kernel,
}


def resolve_kernel(kernel, n1, n2):
    if kernel == "auto":
        return kronecker_kernel if min(n1, n2) >= _kronecker_min_length else schoolbook_kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ValueError(f"未知的卷积内核: {kernel!r}") from None


def convolve(d1, d2, kernel="auto"):
    """两个分布的卷积：total 相乘，offset 相加"""
    if d1.is_point_mass():
        d1, d2 = d2, d1
    if d2.is_point_mass():
        w = d2.weights[0]
        weights = d1.weights if w == 1 else tuple(x * w for x in d1.weights)
        return LatticeDistribution(d1.offset + d2.offset, weights, d1.total * d2.total)
    fn = resolve_kernel(kernel, len(d1.weights), len(d2.weights))
    # 首尾权重非零，乘积首尾也非零，无需再裁剪
    return LatticeDistribution(d1.offset + d2.offset, tuple(fn(d1.weights, d2.weights)),
                               d1.total * d2.total)


def check_cancel(cancel):
    if cancel is not None and cancel.is_set():
        raise ComputationCancelled("计算已取消")


def power(d, k, kernel="auto", cancel=None):
    """k 次自卷积，二进制快速幂；k = 0 返回 δ0"""
    if k < 0:
        raise ValueError(f"幂次必须 >= 0: {k}")
    result = DELTA0
    base = d
    while k:
        if k & 1:
            result = convolve(result, base, kernel)
        k >>= 1
        if k:
            check_cancel(cancel)
            base = convolve(base, base, kernel)
    return result


def mixture(parts):
    """
    加权叠加若干分布 (系数为非负整数)
    结果的 total 为各部分 coef * total 之和
    """
    parts = [(coef, dist) for coef, dist in parts if coef]
    if not parts:
        raise ValueError("混合分布至少需要一个非零系数")
    lo = min(dist.min_value for _, dist in parts)
    hi = max(dist.max_value for _, dist in parts)
    weights = [0] * (hi - lo + 1)
    for coef, dist in parts:
        start = dist.offset - lo
        for i, w in enumerate(dist.weights):
            weights[start + i] += coef * w
    return LatticeDistribution.from_weights(lo, weights, sum(coef * dist.total for coef, dist in parts))


def support_gcd(dist):
    """支撑集两两差值的最大公约数 (单点时为 0)"""
    g = 0
    first = dist.offset
    for v, _ in dist.items():
        g = gcd(g, v - first)
        if g == 1:
            break
    return g


class PowerCache:
    """
    缓存 d^(2^j)
    逐步推进 (k -> k+1 只需一次与 d 的卷积) 时顺带记录 2 的幂，
    任意 k 都能由已缓存的平方组合出来
    """

    def __init__(self, base, kernel="auto", cancel=None, power_saved=None):
        self.base = base
        self.kernel = kernel
        self.cancel = cancel
        self.power_saved = power_saved  # 回调 (exponent, dist)
        self._powers = {1: base}

    def seed(self, exponent, dist):
        """载入检查点中的 d^exponent (exponent 必须是 2 的幂)"""
        if exponent < 1 or exponent & (exponent - 1):
            raise ValueError(f"只能缓存 2 的幂: {exponent}")
        self._powers[exponent] = dist

    def exponents(self):
        return sorted(self._powers)

    def _store(self, exponent, dist):
        if exponent not in self._powers:
            self._powers[exponent] = dist
            if self.power_saved is not None:
                self.power_saved(exponent, dist)

    def square(self, exponent):
        """取 d^exponent (2 的幂)，不足时从已有的最大平方继续平方"""
        if exponent in self._powers:
            return self._powers[exponent]
        current = max(e for e in self._powers if e < exponent)
        dist = self._powers[current]
        while current < exponent:
            check_cancel(self.cancel)
            dist = convolve(dist, dist, self.kernel)
            current *= 2
            self._store(current, dist)
        return dist

    def power(self, k):
        if k < 0:
            raise ValueError(f"幂次必须 >= 0: {k}")
        result = DELTA0
        bit = 1
        while bit <= k:
            if k & bit:
                result = convolve(result, self.square(bit), self.kernel)
            bit <<= 1
        return result

    def successive(self, start, stop):
        """依次产出 (k, d^k)，k 从 start 到 stop (含)"""
        if start < 1:
            raise ValueError(f"起始幂次必须 >= 1: {start}")
        current = self.power(start - 1)
        for k in range(start, stop + 1):
            check_cancel(self.cancel)
            current = convolve(current, self.base, self.kernel)
            if k & (k - 1) == 0:
                self._store(k, current)
            yield k, current
