import random
from fractions import Fraction

import pytest

from src.core.dice import Die, negate, scale, shift
from src.core.dominance import (
    ZERO_DIE,
    RelationLabel,
    compare,
    dominance_sequence,
    span_shift,
    trinary_code,
)
from src.core.lattice import DELTA0, KERNELS, LatticeDistribution, convolve, power, to_lattice

SEEDS = range(12)


def random_die(rng, max_sides=5, spread=6, fractional=False):
    faces = [rng.randint(-spread, spread) for _ in range(rng.randint(2, max_sides))]
    if fractional:
        faces = [Fraction(f, rng.choice((1, 2, 3))) for f in faces]
    return Die(tuple(faces))


def random_dist(rng):
    return to_lattice(random_die(rng))[1]


def naive_power(d, k):
    result = DELTA0
    for _ in range(k):
        result = convolve(result, d, "schoolbook")
    return result


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("kernel", sorted(KERNELS))
def test_convolution_commutative_and_associative(seed, kernel):
    rng = random.Random(seed)
    d1, d2, d3 = (random_dist(rng) for _ in range(3))
    assert convolve(d1, d2, kernel) == convolve(d2, d1, kernel)
    left = convolve(convolve(d1, d2, kernel), d3, kernel)
    right = convolve(d1, convolve(d2, d3, kernel), kernel)
    assert left == right


@pytest.mark.parametrize("seed", SEEDS)
def test_kernels_agree(seed):
    rng = random.Random(seed)
    d1, d2 = random_dist(rng), random_dist(rng)
    assert convolve(d1, d2, "kronecker") == convolve(d1, d2, "schoolbook")


@pytest.mark.parametrize("seed", SEEDS)
def test_total_mean_variance_additive(seed):
    rng = random.Random(seed)
    d1, d2 = random_dist(rng), random_dist(rng)
    both = convolve(d1, d2)
    assert both.total == d1.total * d2.total
    assert both.mean() == d1.mean() + d2.mean()
    assert both.variance() == d1.variance() + d2.variance()
    for k in (2, 5):
        dk = power(d1, k)
        assert dk.total == d1.total ** k
        assert dk.mean() == k * d1.mean()
        assert dk.variance() == k * d1.variance()


@pytest.mark.parametrize("seed", SEEDS)
def test_power_matches_naive_repetition(seed):
    rng = random.Random(seed)
    d = random_dist(rng)
    for k in range(9):
        assert power(d, k) == naive_power(d, k), k


@pytest.mark.parametrize("seed", SEEDS)
def test_compare_antisymmetric(seed):
    rng = random.Random(seed)
    a, b = random_die(rng, fractional=True), random_die(rng, fractional=True)
    for k in (1, 2, 3):
        assert compare(b, a, k) is compare(a, b, k).flipped()


@pytest.mark.parametrize("seed", SEEDS)
def test_labels_invariant_under_shift_and_positive_scale(seed):
    rng = random.Random(seed)
    a, b = random_die(rng), random_die(rng)
    c = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    factor = Fraction(rng.randint(1, 7), rng.randint(1, 3))
    seq = dominance_sequence(a, b, 5)
    assert dominance_sequence(shift(a, c), shift(b, c), 5) == seq
    assert dominance_sequence(scale(a, factor), scale(b, factor), 5) == seq
    assert dominance_sequence(scale(a, -factor), scale(b, -factor), 5) == seq.flipped()


@pytest.mark.parametrize("seed", SEEDS)
def test_symmetric_die_always_ties(seed):
    rng = random.Random(seed)
    half = [rng.randint(1, 6) for _ in range(rng.randint(1, 3))]
    die = Die(tuple(half + [-f for f in half] + [0] * rng.randint(0, 2)))
    assert die.is_symmetric()
    seq = dominance_sequence(die, ZERO_DIE, 8)
    assert set(seq.labels) == {RelationLabel.TIE}


@pytest.mark.parametrize("seed", SEEDS)
def test_dividing_out_the_span_leaves_span_one(seed):
    rng = random.Random(seed)
    b = rng.randint(1, 5)
    offset = rng.randint(-10, 10)
    die = Die(tuple(offset + b * rng.randint(-4, 4) for _ in range(rng.randint(2, 6))))
    _, dist = to_lattice(die)
    if dist.is_point_mass():
        return
    span = span_shift(dist)
    assert span.b % b == 0
    assert all((v - span.a) % span.b == 0 for v in dist.support())
    reduced = LatticeDistribution.from_weights(
        0, [dist.weight_at(dist.offset + span.b * i) for i in range((len(dist) - 1) // span.b + 1)])
    assert reduced.total == dist.total
    assert span_shift(reduced).b == 1


@pytest.mark.parametrize("seed", SEEDS)
def test_trinary_code_prefix(seed):
    rng = random.Random(seed)
    a, b = random_die(rng), random_die(rng)
    kmax = 8
    full = dominance_sequence(a, b, kmax)
    code = trinary_code(full)
    for j in range(1, kmax):
        prefix = dominance_sequence(a, b, j)
        assert prefix.labels == full.labels[:j]
        assert trinary_code(prefix).value == code.value // 3 ** (kmax - j)


def test_negated_die_code_is_complement(david, goliath):
    seq = dominance_sequence(david, goliath, 10)
    flipped = dominance_sequence(negate(david), negate(goliath), 10)
    assert trinary_code(flipped).value == 3 ** 10 - 1 - trinary_code(seq).value
