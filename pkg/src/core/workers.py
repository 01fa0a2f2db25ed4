"""
工作进程池模块
把彼此独立的计算任务分发给进程池，按提交顺序收集结果
"""

import logging
from concurrent.futures import ProcessPoolExecutor

from src.core.lattice import check_cancel

logger = logging.getLogger(__name__)


def run_ordered(func, items, jobs=1, cancel=None, progress_updated=None):
    """
    依次产出 func(item) 的结果，顺序与 items 一致
    jobs = 1 时在当前进程内执行；每个任务之间检查取消标志
    progress_updated(当前进度, 总数)
    """
    items = list(items)
    total = len(items)
    if jobs <= 1 or total <= 1:
        for done, item in enumerate(items, start=1):
            check_cancel(cancel)
            yield func(item)
            if progress_updated:
                progress_updated(done, total)
        return

    with ProcessPoolExecutor(max_workers=jobs) as executor:
        futures = [executor.submit(func, item) for item in items]
        try:
            for done, future in enumerate(futures, start=1):
                check_cancel(cancel)
                yield future.result()
                if progress_updated:
                    progress_updated(done, total)
        finally:
            for future in futures:
                future.cancel()
