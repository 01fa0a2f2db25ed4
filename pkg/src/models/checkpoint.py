from sqlalchemy import Column, Integer, String, DateTime, Text, UniqueConstraint
from datetime import datetime
from src.core.database import Base
from src.core.errors import CheckpointError
from src.core.lattice import LatticeDistribution

# 序列化格式版本，跨主版本不保证兼容
CHECKPOINT_FORMAT_VERSION = 1


class PowerCheckpoint(Base):
    """差骰子分布的 2 的幂次自卷积 Δ^(2^j)"""

    __tablename__ = "power_checkpoints"
    __table_args__ = (UniqueConstraint("pair_key", "exponent", name="uq_pair_exponent"),)

    id = Column(Integer, primary_key=True, index=True)
    pair_key = Column(String(64), nullable=False, index=True)
    exponent = Column(Integer, nullable=False)
    format_version = Column(Integer, nullable=False, default=CHECKPOINT_FORMAT_VERSION)
    offset = Column(Integer, nullable=False)
    length = Column(Integer, nullable=False)
    total = Column(Text, nullable=False)  # 十进制字符串
    weights = Column(Text, nullable=False)  # 逗号分隔的十进制字符串
    created_at = Column(DateTime, default=datetime.now)

    @classmethod
    def from_distribution(cls, pair_key, exponent, dist):
        return cls(
            pair_key=pair_key,
            exponent=exponent,
            format_version=CHECKPOINT_FORMAT_VERSION,
            offset=dist.offset,
            length=len(dist.weights),
            total=str(dist.total),
            weights=",".join(str(w) for w in dist.weights),
        )

    def to_distribution(self):
        if self.format_version != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointError(f"不支持的检查点格式版本: {self.format_version}")
        try:
            weights = tuple(int(w) for w in self.weights.split(","))
            total = int(self.total)
        except ValueError as e:
            raise CheckpointError(f"检查点权重无法解析: {e}") from None
        if len(weights) != self.length:
            raise CheckpointError(f"检查点长度不符: 记录 {self.length}，实际 {len(weights)}")
        if sum(weights) != total:
            raise CheckpointError(f"检查点总权重不符 (exponent={self.exponent})")
        return LatticeDistribution(self.offset, weights, total)

    def to_dict(self):
        return {
            "id": self.id,
            "pair_key": self.pair_key,
            "exponent": self.exponent,
            "format_version": self.format_version,
            "offset": self.offset,
            "length": self.length,
            "created_at": self.created_at.isoformat() if self.created_at else None
        }
