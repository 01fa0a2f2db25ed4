"""
Edgeworth 展开模块
对平衡、span 为 b 的格点分布计算倾斜的主项 -ν3 / (3 sqrt(2πn))、显式误差界，
以及误差界被主项压住的阈值 N (证书)
实数常数用 mpmath 高精度计算；误差界各项向上取整，主项向零取整，阈值因此偏保守
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from src.core.dominance import span_shift
from src.core.errors import (
    BelowValidityFloorError,
    NoLeadingTermError,
    PreconditionError,
    ThresholdNotFoundError,
    UnbalancedDistributionError,
    UnsupportedLatticeError,
)

logger = logging.getLogger(__name__)

DEFAULT_DPS = 60
# 定向舍入：按相对误差 10^-(dps - ROUNDING_GUARD_DIGITS) 向外推
ROUNDING_GUARD_DIGITS = 10
DEFAULT_CHECK_FACTOR = 20
DEFAULT_PRESCREEN_MARGIN = 1e-5
DEFAULT_MAX_N = 10 ** 9


def _mpf(value):
    value = Fraction(value)
    return mpmath.mpf(value.numerator) / value.denominator


def _nudge(x, dps, direction):
    """按 direction (+1 向上 / -1 向下) 把 x 向外推一个保护量"""
    return x + direction * abs(x) * mpmath.mpf(10) ** (ROUNDING_GUARD_DIGITS - dps)


def _q5(q3, q4):
    return q3 ** 3 / 6 + 3 * q3 ** 2 * q4 / 2 + 15 * q3 * q4 ** 2 / 2 + 35 * q4 ** 3 / 2


@dataclass(frozen=True)
class EdgeworthParams:
    """一个差骰子的全部附录常数"""

    a: int
    b: int
    m_min: Fraction
    C: Fraction
    mu1: Fraction
    mu2: Fraction
    mu3: Fraction
    mu4: Fraction
    sigma: object
    nu3: object
    nu4: object
    beta: object
    p0: object
    p1: object
    q1: object
    q2: object
    q3: object
    q4: object
    q5: object
    r: object
    n_min: object
    dps: int = DEFAULT_DPS

    @property
    def validity_floor(self):
        return int(mpmath.ceil(self.n_min))

    def exact_fields(self):
        return {
            "a": Fraction(self.a),
            "b": Fraction(self.b),
            "m": self.m_min,
            "C": self.C,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu3": self.mu3,
            "mu4": self.mu4,
        }

    def real_fields(self):
        return {
            "sigma": self.sigma,
            "nu3": self.nu3,
            "nu4": self.nu4,
            "beta": self.beta,
            "p0": self.p0,
            "p1": self.p1,
            "q1": self.q1,
            "q2": self.q2,
            "q3": self.q3,
            "q4": self.q4,
            "q5": self.q5,
            "r": self.r,
            "n_min": self.n_min,
        }


@dataclass(frozen=True)
class ExpandedBound:
    """
    代入常数后的误差界
    |E| <= inv_n/n + exp_prefactor*e^(-exp_rate*n)/n + n32/n^(3/2)
           + e^(-sqrt_rate*sqrt(n)) * (a_half/sqrt(n) + b_inv/n + c_quarter*n^(-1/4)*(d_half/sqrt(n) + e_const))
    """

    inv_n: object
    exp_prefactor: object
    exp_rate: object
    n32: object
    sqrt_rate: object
    a_half: object
    b_inv: object
    c_quarter: object
    d_half: object
    e_const: object
    leading: object

    def coefficients(self):
        return {
            "inv_n": self.inv_n,
            "exp_prefactor": self.exp_prefactor,
            "exp_rate": self.exp_rate,
            "n32": self.n32,
            "sqrt_rate": self.sqrt_rate,
            "a_half": self.a_half,
            "b_inv": self.b_inv,
            "c_quarter": self.c_quarter,
            "d_half": self.d_half,
            "e_const": self.e_const,
        }

    def evaluate(self, n):
        n = mpmath.mpf(n)
        s = mpmath.sqrt(n)
        return (self.inv_n / n + self.exp_prefactor * mpmath.exp(-self.exp_rate * n) / n
                + self.n32 / n ** 1.5
                + mpmath.exp(-self.sqrt_rate * s) * (self.a_half / s + self.b_inv / n
                                                      + self.c_quarter / mpmath.root(n, 4)
                                                      * (self.d_half / s + self.e_const)))


@dataclass(frozen=True)
class ThresholdCertificate:
    """n >= threshold 时 |主项| > 误差界；扫描覆盖到 check_radius，之后由单调性保证"""

    threshold: int
    check_radius: int
    sign: int
    tail_monotone: bool
    prescreened: int
    rigorous_checks: int

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "check_radius": self.check_radius,
            "sign": self.sign,
            "tail_monotone": self.tail_monotone,
            "prescreened": self.prescreened,
            "rigorous_checks": self.rigorous_checks,
        }


def compute_params(dist, C=None, dps=DEFAULT_DPS):
    """从平衡的格点分布计算全部常数"""
    span = span_shift(dist)
    mu1 = dist.mean()
    if mu1 != 0:
        raise UnbalancedDistributionError(f"分布均值必须为 0，实际为 {mu1}")
    mu2, mu3, mu4 = (dist.moment(k) for k in (2, 3, 4))
    b, a = span.b, span.a
    m_min = Fraction(min(w for _, w in dist.items()), dist.total)
    C = Fraction(C) if C is not None else Fraction(2 * b)
    if C <= 0:
        raise PreconditionError(f"常数 C 必须为正: {C}")

    with mpmath.workdps(dps):
        pi = +mpmath.pi
        sigma = mpmath.sqrt(_mpf(mu2))
        nu3 = _mpf(mu3) / sigma ** 3
        nu4 = _mpf(mu4) / _mpf(mu2) ** 2
        beta = _mpf(Fraction(b, 2) - a % b) / sigma
        p0 = mpmath.e - 1
        p1 = 3 * (pi - 3) / pi ** 3
        q1 = mpmath.mpf(1) / 5 + nu4 / 24
        q2 = p0 * q1 / 2 + b ** 2 * p1 / _mpf(mu2)
        q3 = abs(beta)
        q4 = abs(nu3) / 6
        q5 = _q5(q3, q4)
        r = 16 * b ** 2 * _mpf(m_min) / (pi * _mpf(C) * sigma) ** 2
        n_min = max(q1 / 4, 1 / q1, 81 * mpmath.mpf(b) ** 4 / (q1 * pi ** 4 * _mpf(mu2) ** 2))

    logger.debug(f"Edgeworth 常数: b={b}, a={a}, nu3={mpmath.nstr(nu3, 10)}, n_min={mpmath.nstr(n_min, 10)}")
    return EdgeworthParams(
        a=a, b=b, m_min=m_min, C=C,
        mu1=mu1, mu2=mu2, mu3=mu3, mu4=mu4,
        sigma=sigma, nu3=nu3, nu4=nu4, beta=beta,
        p0=p0, p1=p1, q1=q1, q2=q2, q3=q3, q4=q4, q5=q5, r=r,
        n_min=n_min, dps=dps,
    )


def beta_at(p, n):
    """β = (b/2 - (n·a mod b)) / σ"""
    with mpmath.workdps(p.dps):
        return _mpf(Fraction(p.b, 2) - (n * p.a) % p.b) / p.sigma


def leading_coefficient(p):
    """主项中 1/sqrt(n) 的系数 -ν3 / (3 sqrt(2π))"""
    with mpmath.workdps(p.dps):
        return -p.nu3 / (3 * mpmath.sqrt(2 * mpmath.pi))


def leading_term(p, n):
    """-ν3 / (3 sqrt(2πn))，向零取整"""
    if n < 1:
        raise BelowValidityFloorError(f"n 必须 >= 1: {n}")
    with mpmath.workdps(p.dps):
        value = -p.nu3 / (3 * mpmath.sqrt(2 * mpmath.pi * n))
        return value - mpmath.sign(value) * abs(value) * mpmath.mpf(10) ** (ROUNDING_GUARD_DIGITS - p.dps)


def L_function(p, c):
    """L(c) = ((-c) mod b - c mod b) / σ - ν3"""
    with mpmath.workdps(p.dps):
        return mpmath.mpf((-c) % p.b - c % p.b) / p.sigma - p.nu3


def error_bound(p, n):
    """误差项 |E| 的显式上界，各项向上取整"""
    if n < p.validity_floor:
        raise BelowValidityFloorError(f"误差界仅对 n >= {p.validity_floor} 成立，收到 n = {n}")
    with mpmath.workdps(p.dps):
        pi = +mpmath.pi
        n = mpmath.mpf(n)
        q3 = abs(beta_at(p, int(n))) if p.a % p.b else p.q3
        q5 = _q5(q3, p.q4) if p.a % p.b else p.q5
        s = mpmath.sqrt(n / p.q1)
        terms = (
            2 * p.q2 / n,
            mpmath.exp(-n * p.r / 2) / (n * p.r),
            2 * q5 / mpmath.sqrt(2 * pi * n ** 3),
            mpmath.exp(-2 * s) * ((1 + p.p0) / (2 * s) + 4 * p.p0 * p.q1 / n
                                  + 1 / (pi * mpmath.root(p.q1 * n, 4)) * ((q3 + p.q4) / (2 * s) + 2 * p.q4)),
        )
        return sum(_nudge(t, p.dps, 1) for t in terms)


def expanded_bound(p):
    """误差界代入常数后的十个系数"""
    with mpmath.workdps(p.dps):
        pi = +mpmath.pi
        root_q1 = mpmath.sqrt(p.q1)
        return ExpandedBound(
            inv_n=2 * p.q2,
            exp_prefactor=1 / p.r,
            exp_rate=p.r / 2,
            n32=2 * p.q5 / mpmath.sqrt(2 * pi),
            sqrt_rate=2 / root_q1,
            a_half=(1 + p.p0) * root_q1 / 2,
            b_inv=4 * p.p0 * p.q1,
            c_quarter=1 / (pi * mpmath.root(p.q1, 4)),
            d_half=(p.q3 + p.q4) * root_q1 / 2,
            e_const=2 * p.q4,
            leading=-p.nu3 / (3 * mpmath.sqrt(2 * pi)),
        )


def truncate_decimal(value, digits):
    """截断 (不四舍五入) 到 digits 位小数"""
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        negative = value < 0
        scaled = abs(value) * 10 ** digits
        units = scaled.numerator // scaled.denominator
    else:
        with mpmath.workdps(max(mpmath.mp.dps, digits + 30)):
            negative = value < 0
            units = int(mpmath.floor(abs(value) * mpmath.mpf(10) ** digits))
    text = str(units // 10 ** digits)
    if digits:
        text += f".{units % 10 ** digits:0{digits}d}"
    return ("-" if negative and units else "") + text


class _ThresholdScanner:
    """浮点预筛 + 高精度复核"""

    def __init__(self, p, margin):
        self.p = p
        self.margin = margin
        self.prescreened = 0
        self.rigorous_checks = 0
        with mpmath.workdps(p.dps):
            self.lead = float(abs(leading_coefficient(p)))
            self.q1, self.q2, self.q3, self.q4, self.q5 = (float(v) for v in (p.q1, p.q2, p.q3, p.q4, p.q5))
            self.p0, self.r = float(p.p0), float(p.r)

    def _float_margin(self, ns):
        q1, q2, q3, q4, q5, p0, r = self.q1, self.q2, self.q3, self.q4, self.q5, self.p0, self.r
        s = np.sqrt(ns / q1)
        bound = (2 * q2 / ns + np.exp(-ns * r / 2) / (ns * r) + 2 * q5 / np.sqrt(2 * np.pi * ns ** 3)
                 + np.exp(-2 * s) * ((1 + p0) / (2 * s) + 4 * p0 * q1 / ns
                                     + 1 / (np.pi * (q1 * ns) ** 0.25) * ((q3 + q4) / (2 * s) + 2 * q4)))
        lead = self.lead / np.sqrt(ns)
        return (lead - bound) / lead

    def passes(self, n):
        """高精度判断 |主项(n)| > 误差界(n)"""
        self.rigorous_checks += 1
        return abs(leading_term(self.p, n)) > error_bound(self.p, n)

    def failures(self, lo, hi):
        """[lo, hi] 中不满足条件的 n"""
        ns = np.arange(lo, hi + 1, dtype=np.float64)
        self.prescreened += len(ns)
        margin = self._float_margin(ns)
        failing = ns[margin < -self.margin].astype(np.int64).tolist()
        uncertain = ns[np.abs(margin) <= self.margin].astype(np.int64).tolist()
        failing.extend(n for n in uncertain if not self.passes(int(n)))
        return sorted(int(n) for n in failing)


def _tail_is_monotone(p, n_check):
    """
    误差界各项乘以 sqrt(n) 后在 [n_check, ∞) 上递减
    前三项恒递减；第四项各部分形如 e^(-c s) s^j (s = sqrt(n), j <= 1/2)，在 s > j/c 时递减
    """
    with mpmath.workdps(p.dps):
        rate = 2 / mpmath.sqrt(p.q1)
        return bool(p.q1 > 0 and p.r > 0 and mpmath.sqrt(n_check) > mpmath.mpf(1) / (2 * rate))


def certified_threshold(p, check_factor=DEFAULT_CHECK_FACTOR, prescreen_margin=DEFAULT_PRESCREEN_MARGIN,
                        max_n=DEFAULT_MAX_N):
    """
    最小的 N >= ceil(n_min)，使 [N, check_factor*N] 上每个 n 都有 |主项| > 误差界
    仅支持 b = 1, a = 0 (β 与 n 无关)
    """
    if p.mu3 == 0:
        raise NoLeadingTermError("三阶矩为 0，主项消失，无法给出阈值")
    if p.b != 1 or p.a != 0:
        raise UnsupportedLatticeError(f"阈值证书只支持 b = 1, a = 0，当前 b = {p.b}, a = {p.a}")

    scanner = _ThresholdScanner(p, prescreen_margin)
    n0 = p.validity_floor
    last_fail = n0 - 1
    scanned = n0 - 1
    limit = max(n0 * check_factor, 1024)
    while True:
        if limit > max_n:
            raise ThresholdNotFoundError(f"在 n <= {max_n} 内找不到阈值")
        failures = scanner.failures(scanned + 1, limit)
        if failures:
            last_fail = failures[-1]
        scanned = limit
        threshold = last_fail + 1
        logger.info(f"阈值扫描至 n = {scanned}，当前候选 N = {threshold}")
        if threshold * check_factor <= scanned:
            break
        limit = threshold * check_factor

    if not _tail_is_monotone(p, scanned):
        raise ThresholdNotFoundError(f"误差界在 n >= {scanned} 上的单调性无法确认，不给出阈值")

    sign = 1 if p.mu3 < 0 else -1
    return ThresholdCertificate(
        threshold=threshold,
        check_radius=scanned,
        sign=sign,
        tail_monotone=True,
        prescreened=scanner.prescreened,
        rigorous_checks=scanner.rigorous_checks,
    )
