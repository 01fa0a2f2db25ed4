"""
命令行解析模块
所有参数在计算开始前完成校验：骰子、区间和枚举值都由 argparse 的 type 转换
"""

import argparse
from dataclasses import dataclass
from enum import Enum

from src.core.dice import parse_die, parse_rational
from src.core.dominance import RelationLabel
from src.core.errors import DiceError, PreconditionError
from src.core.mapper import Domain

SUBCOMMANDS = ("compare", "sequence", "tilt", "span", "edgeworth", "verify", "map3", "map4", "family", "cycle")


class OutputFormat(Enum):
    HUMAN = "human"
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class CommandSpec:
    """一次命令调用：子命令、已解析的选项和输出格式"""

    subcommand: str
    options: argparse.Namespace
    output: OutputFormat = OutputFormat.HUMAN

    def option(self, name, default=None):
        return getattr(self.options, name, default)


def parse_range(text):
    """闭区间 a..b，单个整数 k 视为 k..k"""
    head, sep, tail = text.strip().partition("..")
    try:
        start = int(head)
        stop = int(tail) if sep else start
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析的区间: {text!r}") from None
    if start < 1 or stop < start:
        raise argparse.ArgumentTypeError(f"区间必须满足 1 <= a <= b: {text!r}")
    return range(start, stop + 1)


def parse_int_list(text):
    """逗号分隔的正整数，空串表示空列表"""
    if not text.strip():
        return ()
    try:
        values = tuple(int(token) for token in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析的整数列表: {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"k 必须 >= 1: {text!r}")
    return values


def parse_dice_list(text):
    """分号分隔的骰子列表"""
    return tuple(_die(part) for part in text.split(";"))


def _die(text):
    try:
        return parse_die(text)
    except DiceError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _rational(text):
    try:
        return parse_rational(text)
    except DiceError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _positive_rational(text):
    value = _rational(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"需要正数: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要正整数: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"需要正整数: {text!r}")
    return value


def _label(text):
    try:
        return RelationLabel.from_letter(text.strip().upper())
    except (DiceError, ValueError, KeyError):
        raise argparse.ArgumentTypeError(f"胜负必须是 L/T/W: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """参数错误抛出异常而不是直接退出，由调用方映射退出码"""

    def error(self, message):
        raise PreconditionError(f"{self.prog}: {message}")


def _global_options():
    """全局选项，子命令前后都可以写"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=argparse.SUPPRESS,
                        help="输出格式 (默认 human)")
    common.add_argument("--jobs", type=_positive_int, default=argparse.SUPPRESS,
                        help="并行进程数 (默认取 ANTIDICE_JOBS 或配置文件)")
    common.add_argument("--config", default=argparse.SUPPRESS, help="配置文件路径")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=argparse.SUPPRESS)
    common.add_argument("--kernel", choices=["auto", "schoolbook", "kronecker"], default=argparse.SUPPRESS,
                        help="卷积内核")
    return common


def _add_pair(parser, b_required=True):
    parser.add_argument("--a", type=_die, required=True, help="骰子 A，例如 \"1,1,4,4,5,6\"")
    if b_required:
        parser.add_argument("--b", type=_die, required=True, help="骰子 B")
    else:
        parser.add_argument("--b", type=_die, default=parse_die("0"), help="骰子 B (默认 {0})")


def build_parser():
    common = _global_options()
    parser = _Parser(prog="antidice", description="骰子多次投掷的精确胜负计算", parents=[common])
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = subparsers.add_parser("compare", parents=[common], help="A 与 B 掷 k 次的胜负")
    _add_pair(p)
    p.add_argument("--rolls", type=parse_range, required=True, help="掷骰次数区间 a..b")

    p = subparsers.add_parser("sequence", parents=[common], help="胜负序列、三进制编码与首次反转")
    _add_pair(p)
    p.add_argument("--kmax", type=_positive_int, required=True)

    p = subparsers.add_parser("tilt", parents=[common], help="和分布在中心两侧的权重")
    _add_pair(p, b_required=False)
    p.add_argument("--rolls", type=parse_range, required=True)
    p.add_argument("--center", type=_rational, default=None, help="中心 (默认 0)")

    p = subparsers.add_parser("span", parents=[common], help="差骰子的 span 与 shift")
    _add_pair(p, b_required=False)

    p = subparsers.add_parser("edgeworth", parents=[common], help="Edgeworth 常数与阈值")
    _add_pair(p, b_required=False)
    p.add_argument("--C", dest="C", type=_positive_rational, default=None, help="常数 C (默认 2b)")
    p.add_argument("--digits", type=_positive_int, default=None, help="小数位数 (截断)")
    p.add_argument("--dps", type=_positive_int, default=None, help="mpmath 精度")
    p.add_argument("--threshold", action=argparse.BooleanOptionalAction, default=True, help="是否计算阈值")
    p.add_argument("--at", type=_positive_int, action="append", default=[], help="在指定 n 处求主项与误差界")

    p = subparsers.add_parser("verify", parents=[common], help="穷举验证一段 k 的胜负")
    _add_pair(p)
    p.add_argument("--expect-win-at", type=parse_int_list, default=(), help="预期 A 获胜的 k，逗号分隔")
    p.add_argument("--expect-default", type=_label, default=RelationLabel.LOSS, help="其余 k 的预期 (默认 L)")
    p.add_argument("--min-k", type=_positive_int, default=1)
    p.add_argument("--max-k", type=_positive_int, required=True)
    p.add_argument("--checkpoint", nargs="?", const="", default=None,
                   help="检查点数据库 (不带值时使用配置文件中的路径)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--resume", action="store_true", help="从检查点续算")
    group.add_argument("--fresh", action="store_true", help="忽略已有进度重新开始 (默认)")

    p = subparsers.add_parser("map3", parents=[common], help="3 面骰子 {1, x, -1-x} 的胜负图")
    _add_map_options(p)
    p.add_argument("--x-min", type=_rational, default=None)
    p.add_argument("--x-max", type=_rational, default=None)
    p.add_argument("--assert-claims", action="store_true", help="检查不平局与 3n 次必输")

    p = subparsers.add_parser("map4", parents=[common], help="4 面骰子 {1, x, y, -1-x-y} 的胜负图")
    _add_map_options(p)
    p.add_argument("--domain", choices=[Domain.FOUR_SIDED_FUNDAMENTAL.value, Domain.FOUR_SIDED_FULL.value],
                   default=None)

    p = subparsers.add_parser("family", parents=[common], help="Δ(x) 族的首次反转扫描")
    p.add_argument("--x-min", type=_rational, default=None)
    p.add_argument("--x-max", type=_rational, default=None)
    p.add_argument("--x-step", type=_rational, default=None)
    p.add_argument("--kmax", type=_positive_int, default=None)
    p.add_argument("--fit", action="store_true", help="对反转时间做二次拟合")
    p.add_argument("--assert-monotone", action="store_true", help="反转时间不单调时以退出码 2 结束")

    p = subparsers.add_parser("cycle", parents=[common], help="骰子环的方向")
    p.add_argument("--dice", type=parse_dice_list, required=True, help="分号分隔的骰子，例如 \"2,2,6;1,5,5;3,3,4\"")
    p.add_argument("--rolls", type=parse_range, required=True)

    return parser


def _add_map_options(parser):
    parser.add_argument("--resolution", type=_positive_int, default=None)
    parser.add_argument("--kmax", type=_positive_int, default=None)
    parser.add_argument("--slice-k", type=_positive_int, default=None, help="只画第 k 次掷骰")
    parser.add_argument("--depth", type=_positive_int, default=None, help="灰度使用的三进制位数")
    parser.add_argument("--out", default=None, help="输出前缀，写出 PREFIX.csv 与 PREFIX.pgm")


def parse_command(argv):
    """解析命令行，返回 CommandSpec"""
    options = build_parser().parse_args(argv)
    output = OutputFormat(getattr(options, "format", OutputFormat.HUMAN.value))
    return CommandSpec(options.subcommand, options, output)
