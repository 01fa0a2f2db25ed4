"""
数据模型模块
"""

from src.core.database import Base
from src.models.checkpoint import CHECKPOINT_FORMAT_VERSION, PowerCheckpoint
from src.models.run import VerificationRun

__all__ = [
    "Base",
    "CHECKPOINT_FORMAT_VERSION",
    "PowerCheckpoint",
    "VerificationRun",
]
