"""
参数空间扫描模块
3 面骰子 {1, x, -1-x} 与 4 面骰子 {1, x, y, -1-x-y} 对 {0} 骰子的胜负序列，
输出 CSV 数据与 16 位 PGM 灰度图
"""

import csv
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import ceil
from pathlib import Path

from PIL import Image as PILImage

from src.core.dice import Die, format_rational
from src.core.dominance import DominanceSequence, RelationLabel, sequence_of, trinary_code
from src.core.errors import IncompleteGridError, PreconditionError
from src.core.lattice import to_lattice
from src.core.workers import run_ordered

logger = logging.getLogger(__name__)

PGM_MAX = 65535
BACKGROUND = PGM_MAX


class Domain(Enum):
    THREE_SIDED = "three"
    FOUR_SIDED_FUNDAMENTAL = "four-fundamental"
    FOUR_SIDED_FULL = "four-full"


@dataclass(frozen=True)
class GridSpec:
    """扫描配置；x_range 仅用于 3 面骰子的备选闭区间"""

    resolution: int
    kmax: int = 20
    domain: Domain = Domain.FOUR_SIDED_FUNDAMENTAL
    x_range: tuple | None = None

    def __post_init__(self):
        if self.resolution < 2:
            raise PreconditionError(f"分辨率必须 >= 2: {self.resolution}")
        if self.kmax < 1:
            raise PreconditionError(f"kmax 必须 >= 1: {self.kmax}")
        if self.x_range is not None:
            lo, hi = (Fraction(v) for v in self.x_range)
            if lo >= hi:
                raise PreconditionError(f"x 区间为空: [{lo}, {hi}]")
            object.__setattr__(self, "x_range", (lo, hi))


@dataclass(frozen=True)
class OutcomeRecord:
    """一个参数点的胜负序列"""

    coords: tuple
    labels: DominanceSequence

    @property
    def code(self):
        return trinary_code(self.labels).digits

    def die(self):
        return die3(*self.coords) if len(self.coords) == 1 else die4(*self.coords)


def die3(x):
    x = Fraction(x)
    return Die((Fraction(1), x, -1 - x))


def die4(x, y):
    x, y = Fraction(x), Fraction(y)
    return Die((Fraction(1), x, y, -1 - x - y))


def in_fundamental_domain(x, y):
    """-1/3 <= x <= 1 且 -(1+x)/2 <= y <= -|x|，边界包含在内"""
    x, y = Fraction(x), Fraction(y)
    return Fraction(-1, 3) <= x <= 1 and -(1 + x) / 2 <= y <= -abs(x)


def grid_axes(spec):
    """矩形网格的横轴 (x 递增) 与纵轴 (y 递增)；3 面骰子纵轴为 [None]"""
    q = spec.resolution
    if spec.domain is Domain.THREE_SIDED:
        if spec.x_range is None:
            xs = [Fraction(-p, 2 * q) for p in range(q - 1, 0, -1)]
        else:
            lo, hi = spec.x_range
            xs = [lo + (hi - lo) * i / q for i in range(q + 1)]
        return xs, [None]
    if spec.domain is Domain.FOUR_SIDED_FUNDAMENTAL:
        xs = [Fraction(i, q) for i in range(ceil(-q / 3), q + 1)]
        ys = [Fraction(j, q) for j in range(-q, 1)]
    else:
        xs = [Fraction(i, q) for i in range(-q, q + 1)]
        ys = list(xs)
    return xs, ys


def _expected_at(spec, x, y):
    if spec.domain is Domain.FOUR_SIDED_FUNDAMENTAL:
        return in_fundamental_domain(x, y)
    return True


def grid_points(spec):
    """按坐标排序的扫描点"""
    xs, ys = grid_axes(spec)
    if spec.domain is Domain.THREE_SIDED:
        return [(x,) for x in xs]
    return [(x, y) for x in xs for y in ys if _expected_at(spec, x, y)]


def _record_task(task):
    coords, kmax, kernel = task
    die = die3(*coords) if len(coords) == 1 else die4(*coords)
    _, dist = to_lattice(die)
    return OutcomeRecord(coords, sequence_of(dist, kmax, kernel))


def _sweep(spec, jobs, kernel, cancel, progress_updated):
    tasks = [(coords, spec.kmax, kernel) for coords in grid_points(spec)]
    logger.info(f"扫描 {spec.domain.value}: {len(tasks)} 个点，kmax = {spec.kmax}")
    yield from run_ordered(_record_task, tasks, jobs, cancel, progress_updated)


def sweep3(spec, jobs=1, kernel="auto", cancel=None, progress_updated=None):
    if spec.domain is not Domain.THREE_SIDED:
        raise PreconditionError(f"sweep3 需要 3 面骰子配置，收到 {spec.domain.value}")
    yield from _sweep(spec, jobs, kernel, cancel, progress_updated)


def sweep4(spec, jobs=1, kernel="auto", cancel=None, progress_updated=None):
    if spec.domain is Domain.THREE_SIDED:
        raise PreconditionError("sweep4 需要 4 面骰子配置")
    yield from _sweep(spec, jobs, kernel, cancel, progress_updated)


def slice_records(records, k):
    """只保留第 k 次掷骰的胜负"""
    sliced = []
    for record in records:
        if k < 1 or k > record.labels.kmax:
            raise PreconditionError(f"切片 k = {k} 超出序列长度 {record.labels.kmax}")
        sliced.append(OutcomeRecord(record.coords, DominanceSequence((record.labels.at(k),))))
    return sliced


def check_three_sided_claims(records):
    """
    默认区间 -1/2 < x < 0 内的两条观察：从不平局；掷 3n 次时总是输
    返回 (坐标, 描述) 列表，空表示全部符合
    """
    anomalies = []
    for record in records:
        x = record.coords[0]
        if len(record.coords) != 1 or not Fraction(-1, 2) < x < 0:
            continue
        for k, label in enumerate(record.labels.labels, start=1):
            if label is RelationLabel.TIE:
                anomalies.append((record.coords, f"tie at k={k}"))
            elif k % 3 == 0 and label is not RelationLabel.LOSS:
                anomalies.append((record.coords, f"no loss at k={k}"))
    for coords, what in anomalies:
        logger.warning(f"3 面骰子异常 x = {format_rational(coords[0])}: {what}")
    return anomalies


def write_csv(records, path):
    records = list(records)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        two_d = bool(records) and len(records[0].coords) == 2
        writer.writerow(["x", "y", "labels", "code"] if two_d else ["x", "labels", "code"])
        for record in records:
            writer.writerow([format_rational(c) for c in record.coords] + [str(record.labels), record.code])
    logger.info(f"已写出 {len(records)} 条记录: {path}")


def gray_value(code, depth):
    """前 depth 位三进制值线性映射到 [0, 65535]"""
    return int(code[:depth], 3) * PGM_MAX // (3 ** depth - 1)


def write_pgm(records, spec, path, depth):
    """
    二进制 P5、16 位大端；行按 y 递减，列按 x 递增
    不在区域内的网格点填背景色
    """
    by_coords = {record.coords: record for record in records}
    if depth < 1:
        raise PreconditionError(f"depth 必须 >= 1: {depth}")
    for record in by_coords.values():
        if depth > record.labels.kmax:
            raise PreconditionError(f"depth = {depth} 超过序列长度 {record.labels.kmax}")

    xs, ys = grid_axes(spec)
    pixels = []
    for y in reversed(ys):
        for x in xs:
            coords = (x,) if y is None else (x, y)
            record = by_coords.get(coords)
            if record is not None:
                pixels.append(gray_value(record.code, depth))
            elif y is None or _expected_at(spec, x, y):
                raise IncompleteGridError(f"缺少网格点 {tuple(format_rational(c) for c in coords)}")
            else:
                pixels.append(BACKGROUND)

    image = PILImage.new("I", (len(xs), len(ys)))
    image.putdata(pixels)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    image.save(path, format="PPM")
    logger.info(f"已写出 {len(xs)}x{len(ys)} 灰度图: {path}")
