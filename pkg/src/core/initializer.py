"""
检查点数据库初始化模块
负责创建数据库和表结构
"""

import logging
from sqlalchemy import inspect
from sqlalchemy.exc import SQLAlchemyError

from src.core.database import Base
from src.core.errors import CheckpointError
from src.models import PowerCheckpoint, VerificationRun  # noqa: F401  注册表结构

logger = logging.getLogger(__name__)

EXPECTED_TABLES = ['power_checkpoints', 'verification_runs']


class CheckpointInitializer:
    """检查点数据库初始化器"""

    @staticmethod
    def initialize_database(engine):
        """
        初始化数据库
        创建所有表结构，缺表时报错
        """
        try:
            # 创建所有表
            Base.metadata.create_all(bind=engine)

            # 验证表是否创建成功
            inspector = inspect(engine)
            tables = inspector.get_table_names()

            missing_tables = [table for table in EXPECTED_TABLES if table not in tables]
            if missing_tables:
                raise CheckpointError(f"缺少表: {missing_tables}")

            logger.info(f"检查点数据库就绪，包含表: {tables}")
            return True

        except SQLAlchemyError as e:
            logger.error(f"检查点数据库初始化失败: {e}")
            raise CheckpointError(f"检查点数据库初始化失败: {e}") from e

    @staticmethod
    def check_database_health(engine):
        """
        检查数据库健康状态
        返回表信息和已保存的检查点数量
        """
        try:
            inspector = inspect(engine)
            tables = inspector.get_table_names()
            with engine.connect() as conn:
                counts = {
                    table: conn.exec_driver_sql(f"SELECT COUNT(*) FROM {table}").scalar()
                    for table in EXPECTED_TABLES if table in tables
                }

            return {
                "tables_count": len(tables),
                "tables": tables,
                "rows": counts,
                "healthy": all(table in tables for table in EXPECTED_TABLES)
            }

        except Exception as e:
            logger.error(f"检查数据库健康状态时出错: {e}")
            return {
                "tables_count": 0,
                "tables": [],
                "rows": {},
                "healthy": False,
                "error": str(e)
            }
