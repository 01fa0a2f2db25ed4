import threading

import pytest

from src.core.errors import ComputationCancelled
from src.core.workers import run_ordered


def _square(n):
    return n * n


def test_inline_and_pool_keep_order():
    items = list(range(20))
    assert list(run_ordered(_square, items)) == [n * n for n in items]
    assert list(run_ordered(_square, items, jobs=3)) == [n * n for n in items]


def test_progress_reported_per_item():
    seen = []
    list(run_ordered(_square, [1, 2, 3], progress_updated=lambda done, total: seen.append((done, total))))
    assert seen == [(1, 3), (2, 3), (3, 3)]


def test_cancel_between_items():
    cancel = threading.Event()
    results = run_ordered(_square, range(10), cancel=cancel)
    assert next(results) == 0
    cancel.set()
    with pytest.raises(ComputationCancelled):
        next(results)
