import csv
import hashlib
import json
from fractions import Fraction
from pathlib import Path

import pytest

from oracles import brute_labels
from src.core.dice import Die, format_rational, mean
from src.core.dominance import ZERO_DIE, DominanceSequence, RelationLabel
from src.core.errors import IncompleteGridError, PreconditionError
from src.core.mapper import (
    Domain,
    GridSpec,
    OutcomeRecord,
    check_three_sided_claims,
    die3,
    die4,
    gray_value,
    grid_axes,
    grid_points,
    in_fundamental_domain,
    slice_records,
    sweep3,
    sweep4,
    write_csv,
    write_pgm,
)


def _csv_rows(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))[1:]


def _expected_rows(records):
    return [[format_rational(c) for c in r.coords] + [str(r.labels), r.code] for r in records]


def _pixels(path, count):
    data = path.read_bytes()
    assert data.startswith(b"P5")
    assert b"65535" in data[:32]
    raw = data[-2 * count:]
    return [int.from_bytes(raw[i:i + 2], "big") for i in range(0, len(raw), 2)]


def test_normalized_dice_are_balanced():
    for x in (Fraction(-1, 3), Fraction(-1, 2), Fraction(2, 7)):
        assert mean(die3(x)) == 0
        assert mean(die4(x, Fraction(-1, 5))) == 0
    assert die4(1, -1) == Die((1, 1, -1, -1))


@pytest.mark.parametrize("x, y, inside", [
    (0, Fraction(-1, 2), True),
    (Fraction(1, 2), 0, False),
    (Fraction(-1, 3), Fraction(-1, 3), True),
    (1, -1, True),
    (0, 0, True),
    (Fraction(-1, 2), Fraction(-1, 2), False),
    (Fraction(1, 2), Fraction(-4, 5), False),
])
def test_fundamental_domain(x, y, inside):
    assert in_fundamental_domain(x, y) is inside


def test_grid_spec_validation():
    with pytest.raises(PreconditionError):
        GridSpec(1)
    with pytest.raises(PreconditionError):
        GridSpec(4, kmax=0)
    with pytest.raises(PreconditionError):
        GridSpec(4, domain=Domain.THREE_SIDED, x_range=(1, 0))


def test_three_sided_grid():
    spec = GridSpec(4, kmax=3, domain=Domain.THREE_SIDED)
    assert grid_points(spec) == [(Fraction(-3, 8),), (Fraction(-1, 4),), (Fraction(-1, 8),)]
    alternate = GridSpec(4, kmax=3, domain=Domain.THREE_SIDED, x_range=(0, 1))
    assert [p[0] for p in grid_points(alternate)] == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]


def test_fundamental_grid_points_sorted_and_inside():
    spec = GridSpec(3, kmax=2)
    points = grid_points(spec)
    assert points == sorted(points)
    assert all(in_fundamental_domain(x, y) for x, y in points)
    assert (Fraction(-1, 3), Fraction(-1, 3)) in points
    xs, ys = grid_axes(spec)
    assert xs[0] == Fraction(-1, 3) and xs[-1] == 1
    assert ys == [Fraction(j, 3) for j in range(-3, 1)]


def test_sweep3_matches_enumeration():
    spec = GridSpec(6, kmax=6, domain=Domain.THREE_SIDED)
    records = list(sweep3(spec))
    assert [r.coords for r in records] == grid_points(spec)
    third = next(r for r in records if r.coords == (Fraction(-1, 3),))
    assert str(third.labels) == brute_labels(die3(Fraction(-1, 3)), ZERO_DIE, 6)
    assert all(r.labels.kmax == 6 for r in records)


def test_three_sided_claims_hold_on_default_grid():
    records = list(sweep3(GridSpec(8, kmax=12, domain=Domain.THREE_SIDED)))
    assert check_three_sided_claims(records) == []


def test_three_sided_claims_report_anomalies():
    fake = [OutcomeRecord((Fraction(-1, 4),), DominanceSequence.from_letters("LTW"))]
    anomalies = check_three_sided_claims(fake)
    assert [what for _, what in anomalies] == ["tie at k=2", "no loss at k=3"]
    outside = [OutcomeRecord((Fraction(1, 4),), DominanceSequence.from_letters("LTW"))]
    assert check_three_sided_claims(outside) == []


def test_sweep4_symmetric_dice_tie():
    records = list(sweep4(GridSpec(4, kmax=5)))
    symmetric = [r for r in records if r.coords[1] == -r.coords[0]]
    assert symmetric
    assert all(set(r.labels.labels) == {RelationLabel.TIE} for r in symmetric)


def test_sweep4_first_roll_counts_faces():
    for record in sweep4(GridSpec(4, kmax=1, domain=Domain.FOUR_SIDED_FULL)):
        faces = record.die().faces
        margin = sum(f > 0 for f in faces) - sum(f < 0 for f in faces)
        assert record.labels.at(1) is RelationLabel.from_sign(margin)


def test_sweep_rejects_wrong_domain():
    with pytest.raises(PreconditionError):
        list(sweep3(GridSpec(4)))
    with pytest.raises(PreconditionError):
        list(sweep4(GridSpec(4, domain=Domain.THREE_SIDED)))


def test_parallel_sweep_same_order():
    spec = GridSpec(3, kmax=4)
    assert list(sweep4(spec, jobs=2)) == list(sweep4(spec))


def test_slice_records():
    records = list(sweep3(GridSpec(4, kmax=5, domain=Domain.THREE_SIDED)))
    sliced = slice_records(records, 3)
    assert all(r.labels.kmax == 1 for r in sliced)
    assert [r.labels.at(1) for r in sliced] == [r.labels.at(3) for r in records]
    with pytest.raises(PreconditionError):
        slice_records(records, 6)


def test_csv_rows_match_records(tmp_path):
    records = list(sweep4(GridSpec(3, kmax=4)))
    path = tmp_path / "map.csv"
    write_csv(records, path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "x,y,labels,code"
    assert _csv_rows(path) == _expected_rows(records)


def test_csv_three_sided_header(tmp_path):
    records = list(sweep3(GridSpec(4, kmax=2, domain=Domain.THREE_SIDED)))
    path = tmp_path / "map3.csv"
    write_csv(records, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,labels,code"
    assert lines[1].startswith("-3/8,")


def test_csv_creates_parent_directory(tmp_path):
    records = list(sweep3(GridSpec(4, kmax=2, domain=Domain.THREE_SIDED)))
    path = tmp_path / "nested" / "deeper" / "map3.csv"
    write_csv(records, path)
    assert _csv_rows(path) == _expected_rows(records)


def test_gray_value_scaling():
    assert [gray_value(code, 1) for code in ("0", "1", "2")] == [0, 32767, 65535]
    assert gray_value("22", 2) == 65535
    assert gray_value("102", 1) == 32767


def test_pgm_linear_scaling(tmp_path):
    spec = GridSpec(4, kmax=1, domain=Domain.THREE_SIDED)
    records = [OutcomeRecord(coords, DominanceSequence.from_letters(letter))
               for coords, letter in zip(grid_points(spec), "LTW")]
    path = tmp_path / "map.pgm"
    write_pgm(records, spec, path, depth=1)
    assert _pixels(path, 3) == [0, 32767, 65535]


def test_pgm_background_and_row_order(tmp_path):
    spec = GridSpec(3, kmax=2)
    records = list(sweep4(spec))
    path = tmp_path / "map4.pgm"
    write_pgm(records, spec, path, depth=2)
    xs, ys = grid_axes(spec)
    pixels = _pixels(path, len(xs) * len(ys))
    top_row = pixels[:len(xs)]
    # 首行是 y = 0：只有 x = 0 在区域内，对称骰子全平
    assert top_row[xs.index(0)] == gray_value("11", 2)
    assert top_row[xs.index(Fraction(1, 3))] == 65535


def test_pgm_incomplete_grid(tmp_path):
    spec = GridSpec(3, kmax=2)
    records = list(sweep4(spec))[1:]
    with pytest.raises(IncompleteGridError):
        write_pgm(records, spec, tmp_path / "broken.pgm", depth=1)


def test_pgm_depth_beyond_kmax(tmp_path):
    spec = GridSpec(3, kmax=2)
    with pytest.raises(PreconditionError):
        write_pgm(list(sweep4(spec)), spec, tmp_path / "deep.pgm", depth=3)


MAP_DIGESTS = Path(__file__).parent / "data" / "map_digests.json"


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _check_digests(digests):
    """首次运行记录基线，之后逐字节比对"""
    known = json.loads(MAP_DIGESTS.read_text(encoding="utf-8")) if MAP_DIGESTS.exists() else {}
    missing = {name: value for name, value in digests.items() if name not in known}
    if missing:
        MAP_DIGESTS.parent.mkdir(parents=True, exist_ok=True)
        MAP_DIGESTS.write_text(json.dumps({**known, **missing}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for name, value in digests.items():
        assert known.get(name, value) == value, name


@pytest.mark.slow
@pytest.mark.parametrize("kmax", [19, 20])
def test_full_resolution_maps_are_stable(tmp_path, kmax):
    spec = GridSpec(200, kmax=kmax)
    records = list(sweep4(spec, jobs=4))
    write_csv(records, tmp_path / "fundamental.csv")
    write_pgm(records, spec, tmp_path / "fundamental.pgm", depth=kmax)
    write_pgm(slice_records(records, kmax), spec, tmp_path / "slice.pgm", depth=1)
    _check_digests({
        f"four-fundamental-200-k{kmax}.csv": _digest(tmp_path / "fundamental.csv"),
        f"four-fundamental-200-k{kmax}.pgm": _digest(tmp_path / "fundamental.pgm"),
        f"four-fundamental-200-k{kmax}-slice.pgm": _digest(tmp_path / "slice.pgm"),
    })


@pytest.mark.slow
def test_full_resolution_three_sided_claims(tmp_path):
    three = GridSpec(200, kmax=20, domain=Domain.THREE_SIDED)
    records = list(sweep3(three, jobs=4))
    assert check_three_sided_claims(records) == []
    write_csv(records, tmp_path / "three.csv")
    write_pgm(records, three, tmp_path / "three.pgm", depth=20)
    _check_digests({
        "three-200-k20.csv": _digest(tmp_path / "three.csv"),
        "three-200-k20.pgm": _digest(tmp_path / "three.pgm"),
    })
