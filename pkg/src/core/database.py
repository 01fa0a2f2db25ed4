"""
检查点数据库模块
每个检查点文件对应一个 SQLite 数据库，引擎按路径创建
"""

from contextlib import contextmanager
from pathlib import Path

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

# 创建基类
Base = declarative_base()


def create_checkpoint_engine(path):
    """为检查点文件创建引擎，必要时创建父目录"""
    if str(path) == ":memory:":
        return create_engine("sqlite://", echo=False)
    db_file = Path(path)
    db_file.parent.mkdir(parents=True, exist_ok=True)
    return create_engine(
        f"sqlite:///{db_file}",
        echo=False,
        connect_args={"timeout": 60},  # 多进程读取时的锁等待（秒）
    )


@contextmanager
def get_db(engine):
    """获取数据库会话"""
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
