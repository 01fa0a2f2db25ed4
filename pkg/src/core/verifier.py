"""
穷举验证模块
在一段 k 范围内逐一计算精确胜负并与预期比对
检查点保存在 SQLite 中：每到 2 的幂次保存 Δ^k，并定期提交进度，中断后可续算
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field

from src.core.database import create_checkpoint_engine, get_db
from src.core.dominance import RelationLabel, difference_lattice, label_at_zero
from src.core.errors import CheckpointError, ComputationCancelled, PreconditionError
from src.core.initializer import CheckpointInitializer
from src.core.lattice import PowerCache
from src.core.workers import run_ordered
from src.models import PowerCheckpoint, VerificationRun

logger = logging.getLogger(__name__)

DEFAULT_COMMIT_EVERY = 64


@dataclass(frozen=True)
class ExpectedPattern:
    """预期胜负：默认值加上个别 k 的例外"""

    default: RelationLabel = RelationLabel.LOSS
    overrides: tuple = ()

    @classmethod
    def win_at(cls, ks, default=RelationLabel.LOSS):
        return cls(default, tuple((int(k), RelationLabel.WIN) for k in sorted(set(ks))))

    def __call__(self, k):
        for key, label in self.overrides:
            if key == k:
                return label
        return self.default

    def describe(self):
        parts = [f"default={self.default.letter}"]
        parts.extend(f"{k}={label.letter}" for k, label in self.overrides)
        return ";".join(parts)


@dataclass
class VerificationReport:
    k_start: int
    k_end: int
    mismatches: list = field(default_factory=list)
    checked: int = 0
    complete: bool = False
    resumed_from: int | None = None

    def to_dict(self):
        return {
            "k_start": self.k_start,
            "k_end": self.k_end,
            "checked": self.checked,
            "mismatch_count": len(self.mismatches),
            "mismatches": list(self.mismatches),
            "complete": self.complete,
            "resumed_from": self.resumed_from,
        }


def pair_key(die_a, die_b):
    """同一对骰子共享 2 的幂次检查点"""
    text = f"{','.join(map(str, die_a.sorted_faces()))}|{','.join(map(str, die_b.sorted_faces()))}"
    return hashlib.md5(text.encode()).hexdigest()


def run_key(die_a, die_b, ks, expected):
    text = f"{pair_key(die_a, die_b)}|{ks[0]}..{ks[-1]}|{len(ks)}|{expected.describe()}"
    return hashlib.md5(text.encode()).hexdigest()


def _load_powers(engine, key):
    """读取某对骰子的全部 2 的幂次检查点"""
    with get_db(engine) as db:
        rows = db.query(PowerCheckpoint).filter_by(pair_key=key).order_by(PowerCheckpoint.exponent).all()
        return {row.exponent: row.to_distribution() for row in rows}


def _verify_shard(task):
    """工作进程：验证一段连续的 k"""
    die_a, die_b, ks, expected, kernel, checkpoint, key = task
    cache = PowerCache(difference_lattice(die_a, die_b), kernel)
    if checkpoint:
        for exponent, dist in _load_powers(create_checkpoint_engine(checkpoint), key).items():
            cache.seed(exponent, dist)
    wanted = set(ks)
    mismatches = []
    for k, current in cache.successive(ks[0], ks[-1]):
        if k in wanted and label_at_zero(current) is not expected(k):
            mismatches.append(k)
    return mismatches


class ExhaustiveVerifier:
    """穷举验证器"""

    def __init__(self, die_a, die_b, k_range, expected, checkpoint=None, resume=False, jobs=1,
                 kernel="auto", cancel=None, commit_every=DEFAULT_COMMIT_EVERY,
                 progress_updated=None, verify_completed=None):
        self.die_a = die_a
        self.die_b = die_b
        self.ks = sorted(set(k_range))
        if not self.ks or self.ks[0] < 1:
            raise PreconditionError("k 范围必须非空且 k >= 1")
        self.expected = expected
        self.checkpoint = checkpoint
        self.resume = resume
        self.jobs = max(1, jobs)
        self.kernel = kernel
        self.cancel = cancel
        self.commit_every = max(1, commit_every)
        self.progress_updated = progress_updated  # (当前进度, 总数)
        self.verify_completed = verify_completed  # (报告)
        self.pair_key = pair_key(die_a, die_b)
        self.run_key = run_key(die_a, die_b, self.ks, expected)
        self.engine = None

    def run(self):
        """验证入口"""
        report = VerificationReport(self.ks[0], self.ks[-1])
        next_k = self.ks[0]
        if self.checkpoint:
            self.engine = create_checkpoint_engine(self.checkpoint)
            CheckpointInitializer.initialize_database(self.engine)
            health = CheckpointInitializer.check_database_health(self.engine)
            if not health["healthy"]:
                raise CheckpointError(f"检查点数据库不可用: {health.get('error', health['tables'])}")
            logger.info(f"检查点数据库已有记录: {health['rows']}")
            next_k = self._open_run(report)

        if next_k <= report.k_end:
            pending = [k for k in self.ks if k >= next_k]
            if self.jobs > 1:
                self._run_sharded(report, pending)
            else:
                self._run_sequential(report, pending)

        report.complete = True
        report.checked = len(self.ks)
        self._save_progress(report.k_end + 1, report.mismatches, "completed")
        logger.info(f"验证完成: k = {report.k_start}..{report.k_end}，不符 {len(report.mismatches)} 处")
        if self.verify_completed:
            self.verify_completed(report)
        return report

    def _open_run(self, report):
        """获取或创建运行记录，返回下一个待验证的 k"""
        with get_db(self.engine) as db:
            run = db.query(VerificationRun).filter_by(run_key=self.run_key).first()
            if run and self.resume:
                report.mismatches = run.mismatch_list()
                report.resumed_from = run.next_k
                logger.info(f"从检查点续算: next_k = {run.next_k}，已记录不符 {len(report.mismatches)} 处")
                return run.next_k
            if run is None:
                run = VerificationRun(
                    run_key=self.run_key,
                    pair_key=self.pair_key,
                    die_a=str(self.die_a),
                    die_b=str(self.die_b),
                    expectation=self.expected.describe(),
                    k_start=report.k_start,
                    k_end=report.k_end,
                )
                db.add(run)
            run.next_k = report.k_start
            run.mismatches = "[]"
            run.status = "running"
            db.commit()
        return report.k_start

    def _save_progress(self, next_k, mismatches, status):
        if self.engine is None:
            return
        with get_db(self.engine) as db:
            run = db.query(VerificationRun).filter_by(run_key=self.run_key).first()
            if run is None:
                raise CheckpointError(f"找不到运行记录: {self.run_key}")
            run.next_k = next_k
            run.mismatches = json.dumps(mismatches)
            run.status = status
            db.commit()

    def _save_power(self, exponent, dist):
        """把新得到的 Δ^(2^j) 写入检查点"""
        with get_db(self.engine) as db:
            exists = db.query(PowerCheckpoint).filter_by(pair_key=self.pair_key, exponent=exponent).first()
            if exists is None:
                db.add(PowerCheckpoint.from_distribution(self.pair_key, exponent, dist))
                db.commit()
                logger.debug(f"已保存检查点 Δ^{exponent}")

    def _new_cache(self):
        power_saved = self._save_power if self.engine is not None else None
        cache = PowerCache(difference_lattice(self.die_a, self.die_b), self.kernel, self.cancel, power_saved)
        if self.engine is not None:
            for exponent, dist in _load_powers(self.engine, self.pair_key).items():
                cache.seed(exponent, dist)
        return cache

    def _run_sequential(self, report, pending):
        cache = self._new_cache()
        wanted = set(pending)
        total = len(self.ks)
        done = total - len(pending)
        next_k = pending[0]
        try:
            for k, current in cache.successive(pending[0], pending[-1]):
                if k not in wanted:
                    next_k = k + 1
                    continue
                if label_at_zero(current) is not self.expected(k):
                    report.mismatches.append(k)
                    logger.warning(f"k = {k} 与预期不符")
                next_k = k + 1
                done += 1
                if self.progress_updated:
                    self.progress_updated(done, total)
                if done % self.commit_every == 0:
                    self._save_progress(next_k, report.mismatches, "running")
        except (ComputationCancelled, KeyboardInterrupt):
            self._save_progress(next_k, report.mismatches, "interrupted")
            logger.warning(f"验证中断，进度已保存: next_k = {next_k}")
            raise

    def _run_sharded(self, report, pending):
        """分片并行：每片由工作进程从 2 的幂次重建起点"""
        if self.engine is not None:
            # 先把所需的平方算好并写入检查点，工作进程直接读取
            cache = self._new_cache()
            bit = 1
            while bit <= pending[-1]:
                cache.square(bit)
                bit <<= 1
        shard_count = min(len(pending), self.jobs * 4)
        size = -(-len(pending) // shard_count)
        shards = [pending[i:i + size] for i in range(0, len(pending), size)]
        tasks = [(self.die_a, self.die_b, shard, self.expected, self.kernel, self.checkpoint, self.pair_key)
                 for shard in shards]
        next_k = pending[0]
        done = len(self.ks) - len(pending)
        try:
            for shard, mismatches in zip(shards, run_ordered(_verify_shard, tasks, self.jobs, self.cancel)):
                report.mismatches.extend(mismatches)
                done += len(shard)
                next_k = shard[-1] + 1
                self._save_progress(next_k, report.mismatches, "running")
                if self.progress_updated:
                    self.progress_updated(done, len(self.ks))
        except (ComputationCancelled, KeyboardInterrupt):
            self._save_progress(next_k, report.mismatches, "interrupted")
            logger.warning(f"验证中断，进度已保存: next_k = {next_k}")
            raise


def exhaustive_verify(die_a, die_b, k_range, expected, **kwargs):
    """返回与预期不符的全部 k"""
    return ExhaustiveVerifier(die_a, die_b, k_range, expected, **kwargs).run().mismatches
