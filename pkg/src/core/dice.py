"""
骰子模型模块
骰子是有理数面值的多重集，每个面等概率出现
"""

from dataclasses import dataclass
from fractions import Fraction

from src.core.errors import DieParseError


def parse_rational(token):
    """解析单个面值：整数或 p/q 形式的分数"""
    text = token.strip()
    if not text:
        raise DieParseError("空的面值")
    if text.count('/') > 1:
        raise DieParseError(f"无法解析的面值: {token!r}")
    num_text, _, den_text = text.partition('/')
    try:
        numerator = int(num_text.strip())
        denominator = int(den_text.strip()) if den_text else 1
    except ValueError:
        raise DieParseError(f"无法解析的面值: {token!r}") from None
    if denominator == 0:
        raise DieParseError(f"分母为零: {token!r}")
    return Fraction(numerator, denominator)


def format_rational(value):
    """输出 p 或 p/q"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, eq=False)
class Die:
    """m 面骰子，面的顺序无关"""

    faces: tuple

    def __post_init__(self):
        faces = tuple(Fraction(f) for f in self.faces)
        if not faces:
            raise DieParseError("骰子至少需要一个面")
        object.__setattr__(self, "faces", faces)

    @property
    def sides(self):
        return len(self.faces)

    def sorted_faces(self):
        return tuple(sorted(self.faces))

    def __eq__(self, other):
        if not isinstance(other, Die):
            return NotImplemented
        return self.sorted_faces() == other.sorted_faces()

    def __hash__(self):
        return hash(self.sorted_faces())

    def __str__(self):
        return ",".join(format_rational(f) for f in self.faces)

    def __repr__(self):
        return f"Die({{{self}}})"

    def is_symmetric(self):
        """面值多重集关于 0 对称"""
        return self.sorted_faces() == tuple(sorted(-f for f in self.faces))


def parse_die(text):
    """解析逗号分隔的面值列表，保留重复值"""
    if text is None or not text.strip():
        raise DieParseError("空的骰子列表")
    return Die(tuple(parse_rational(token) for token in text.split(',')))


def difference_die(a, b):
    """差骰子 A - B：所有 a_i - b_j，共 m_A * m_B 个面"""
    return Die(tuple(x - y for x in a.faces for y in b.faces))


def negate(die):
    return Die(tuple(-f for f in die.faces))


def shift(die, c):
    c = Fraction(c)
    return Die(tuple(f + c for f in die.faces))


def scale(die, c):
    c = Fraction(c)
    if c == 0:
        raise DieParseError("缩放系数不能为 0")
    return Die(tuple(f * c for f in die.faces))


def raw_moment(die, k):
    """原点矩 E[X^k]，精确有理数"""
    if k < 1:
        raise ValueError(f"矩的阶数必须 >= 1: {k}")
    return sum((f ** k for f in die.faces), Fraction(0)) / die.sides


def mean(die):
    return raw_moment(die, 1)


def variance(die):
    mu = mean(die)
    return raw_moment(die, 2) - mu * mu
