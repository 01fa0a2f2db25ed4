"""
命令运行器
负责加载配置、初始化日志、分发子命令，并把异常映射为退出码
"""

import logging
import sys

from src.cli.commands import COMMANDS, EXIT_ERROR, RunContext
from src.cli.parser import parse_command
from src.cli.render import emit
from src.core.errors import DiceError
from src.core.lattice import set_kronecker_min_length
from src.core.settings import load_settings

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level, stream=None):
    """日志只写错误流，标准输出保留给结果"""
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=stream or sys.stderr,
        force=True,
    )


class CommandRunner:
    """执行一个已解析的命令"""

    def __init__(self, settings, stdout=None, stderr=None, cancel=None):
        self.settings = settings
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.cancel = cancel

    def context_for(self, spec):
        compute = self.settings.get("compute", {})
        set_kronecker_min_length(compute.get("kronecker_min_length", 48))
        return RunContext(
            settings=self.settings,
            jobs=spec.option("jobs") or compute.get("jobs", 1),
            kernel=spec.option("kernel") or compute.get("kernel", "auto"),
            cancel=self.cancel,
        )

    def run(self, spec):
        """返回退出码：0 成功，1 输入或计算错误，2 验证不符"""
        handler = COMMANDS[spec.subcommand]
        try:
            result = handler(spec.options, self.context_for(spec))
        except DiceError as e:
            logger.debug("命令失败", exc_info=True)
            self.stderr.write(f"错误: {e}\n")
            return EXIT_ERROR
        except OSError as e:
            self.stderr.write(f"文件错误: {e}\n")
            return EXIT_ERROR
        emit(result, spec.output, self.stdout)
        return result.exit_code


class AppManager:
    """应用管理器"""

    def __init__(self, argv=None, stdout=None, stderr=None):
        self.argv = sys.argv[1:] if argv is None else list(argv)
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.settings = None
        self.spec = None

    def run(self):
        """运行应用"""
        try:
            self.spec = parse_command(self.argv)
        except DiceError as e:
            self.stderr.write(f"{e}\n")
            return EXIT_ERROR

        self.settings = load_settings(self.spec.option("config"))
        level = self.spec.option("log_level") or self.settings.get("logging", {}).get("level", "INFO")
        setup_logging(level, self.stderr)
        logger.debug(f"子命令 {self.spec.subcommand}，输出格式 {self.spec.output.value}")

        runner = CommandRunner(self.settings, self.stdout, self.stderr)
        return runner.run(self.spec)
