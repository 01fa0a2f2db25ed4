import threading

import pytest

from src.core.database import create_checkpoint_engine, get_db
from src.core.dominance import RelationLabel, difference_lattice
from src.core.errors import CheckpointError, ComputationCancelled, PreconditionError
from src.core.initializer import CheckpointInitializer
from src.core.lattice import power
from src.core.verifier import ExhaustiveVerifier, ExpectedPattern, exhaustive_verify, pair_key
from src.models import CHECKPOINT_FORMAT_VERSION, PowerCheckpoint, VerificationRun


def test_expected_pattern():
    expected = ExpectedPattern.win_at([4, 4, 9])
    assert expected(4) is RelationLabel.WIN
    assert expected(5) is RelationLabel.LOSS
    assert expected.describe() == "default=L;4=W;9=W"


def test_david_goliath_first_two_hundred(david, goliath):
    assert exhaustive_verify(david, goliath, range(1, 201), ExpectedPattern.win_at([4])) == []


def test_wrong_expectation_is_detected(david, goliath):
    assert exhaustive_verify(david, goliath, range(1, 21), ExpectedPattern.win_at([4, 5])) == [5]
    assert exhaustive_verify(david, goliath, range(1, 21), ExpectedPattern()) == [4]


def test_partial_range(david, goliath):
    report = ExhaustiveVerifier(david, goliath, range(3, 8), ExpectedPattern.win_at([4])).run()
    assert report.mismatches == []
    assert report.checked == 5
    assert report.complete
    assert report.to_dict()["k_start"] == 3


def test_empty_range_rejected(david, goliath):
    with pytest.raises(PreconditionError):
        ExhaustiveVerifier(david, goliath, range(0), ExpectedPattern())


def test_checkpoint_stores_powers_of_two(tmp_path, david, goliath):
    db = tmp_path / "ck.db"
    exhaustive_verify(david, goliath, range(1, 40), ExpectedPattern.win_at([4]), checkpoint=db)
    engine = create_checkpoint_engine(db)
    key = pair_key(david, goliath)
    with get_db(engine) as session:
        rows = session.query(PowerCheckpoint).filter_by(pair_key=key).all()
        exponents = {row.exponent for row in rows}
        assert {2, 4, 8, 16, 32} <= exponents
        row16 = next(row for row in rows if row.exponent == 16)
        assert row16.to_distribution() == power(difference_lattice(david, goliath), 16)
        run = session.query(VerificationRun).one()
        assert run.status == "completed"
        assert run.next_k == 40


def test_resume_after_interruption_gives_same_report(tmp_path, david, goliath):
    db = tmp_path / "ck.db"
    expected = ExpectedPattern.win_at([100])
    cancel = threading.Event()

    def interrupt(done, total):
        if done == 50:
            cancel.set()

    first = ExhaustiveVerifier(david, goliath, range(1, 121), expected, checkpoint=db,
                               cancel=cancel, commit_every=16, progress_updated=interrupt)
    with pytest.raises(ComputationCancelled):
        first.run()

    engine = create_checkpoint_engine(db)
    with get_db(engine) as session:
        run = session.query(VerificationRun).one()
        assert run.status == "interrupted"
        assert run.next_k == 51
        assert run.mismatch_list() == [4]

    resumed = ExhaustiveVerifier(david, goliath, range(1, 121), expected, checkpoint=db, resume=True).run()
    assert resumed.resumed_from == 51
    uninterrupted = ExhaustiveVerifier(david, goliath, range(1, 121), expected).run()
    assert resumed.mismatches == uninterrupted.mismatches == [4, 100]


def test_fresh_run_ignores_saved_progress(tmp_path, david, goliath):
    db = tmp_path / "ck.db"
    expected = ExpectedPattern.win_at([4])
    exhaustive_verify(david, goliath, range(1, 30), expected, checkpoint=db)
    report = ExhaustiveVerifier(david, goliath, range(1, 30), expected, checkpoint=db).run()
    assert report.resumed_from is None
    assert report.mismatches == []


def test_sharded_run_matches_sequential(tmp_path, david, goliath):
    expected = ExpectedPattern.win_at([4, 7])
    sharded = ExhaustiveVerifier(david, goliath, range(1, 61), expected, jobs=2,
                                 checkpoint=tmp_path / "ck.db").run()
    assert sharded.mismatches == [7]


def test_checkpoint_format_checks(david, goliath):
    dist = power(difference_lattice(david, goliath), 4)
    row = PowerCheckpoint.from_distribution("k", 4, dist)
    assert row.format_version == CHECKPOINT_FORMAT_VERSION
    assert row.to_distribution() == dist

    row.total = str(dist.total + 1)
    with pytest.raises(CheckpointError):
        row.to_distribution()

    row = PowerCheckpoint.from_distribution("k", 4, dist)
    row.format_version = CHECKPOINT_FORMAT_VERSION + 1
    with pytest.raises(CheckpointError):
        row.to_distribution()


def test_initializer_health_on_memory_engine():
    engine = create_checkpoint_engine(":memory:")
    assert CheckpointInitializer.initialize_database(engine)
    health = CheckpointInitializer.check_database_health(engine)
    assert health["healthy"]
    assert health["rows"] == {"power_checkpoints": 0, "verification_runs": 0}


@pytest.mark.slow
def test_david_goliath_up_to_threshold(tmp_path, david, goliath):
    report = ExhaustiveVerifier(david, goliath, range(1, 58117), ExpectedPattern.win_at([4]),
                                checkpoint=tmp_path / "ck.db", resume=True).run()
    assert report.mismatches == []


def test_unhealthy_checkpoint_is_rejected(tmp_path, monkeypatch, david, goliath):
    monkeypatch.setattr(CheckpointInitializer, "check_database_health",
                        staticmethod(lambda engine: {"healthy": False, "tables": [], "rows": {}}))
    verifier = ExhaustiveVerifier(david, goliath, range(1, 5), ExpectedPattern.win_at([4]),
                                  checkpoint=tmp_path / "ck.db")
    with pytest.raises(CheckpointError):
        verifier.run()
