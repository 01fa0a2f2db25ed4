from sqlalchemy import Column, Integer, String, DateTime, Text
from datetime import datetime
import json
from src.core.database import Base


class VerificationRun(Base):
    """一次穷举验证的进度"""

    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    run_key = Column(String(64), unique=True, nullable=False, index=True)
    pair_key = Column(String(64), nullable=False, index=True)
    die_a = Column(Text, nullable=False)
    die_b = Column(Text, nullable=False)
    expectation = Column(Text, nullable=False)
    k_start = Column(Integer, nullable=False)
    k_end = Column(Integer, nullable=False)
    next_k = Column(Integer, nullable=False)
    mismatches = Column(Text, default="[]")  # JSON 列表
    status = Column(String(20), default="running")  # running / interrupted / completed
    created_at = Column(DateTime, default=datetime.now)
    updated_at = Column(DateTime, default=datetime.now, onupdate=datetime.now)

    def mismatch_list(self):
        return json.loads(self.mismatches or "[]")

    def to_dict(self):
        return {
            "id": self.id,
            "run_key": self.run_key,
            "die_a": self.die_a,
            "die_b": self.die_b,
            "expectation": self.expectation,
            "k_start": self.k_start,
            "k_end": self.k_end,
            "next_k": self.next_k,
            "mismatches": self.mismatch_list(),
            "status": self.status,
            "created_at": self.created_at.isoformat() if self.created_at else None,
            "updated_at": self.updated_at.isoformat() if self.updated_at else None
        }
