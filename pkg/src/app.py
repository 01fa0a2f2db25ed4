"""
应用入口模块
提供统一的启动接口
"""

import sys
import traceback
from pathlib import Path

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.cli.runner import AppManager  # noqa: E402

EXIT_INTERRUPTED = 130


def create_app(argv=None):
    """创建应用实例"""
    return AppManager(argv)


def run_app(argv=None):
    """运行应用"""
    try:
        app_manager = create_app(argv)
        exit_code = app_manager.run()
        sys.exit(exit_code)
    except KeyboardInterrupt:
        print("\n计算被用户中断", file=sys.stderr)
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        print(f"运行失败: {e}", file=sys.stderr)
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    run_app()
