"""
命令行模块
"""

from src.cli.parser import CommandSpec, OutputFormat, build_parser, parse_command
from src.cli.runner import AppManager, CommandRunner

__all__ = [
    "AppManager",
    "CommandRunner",
    "CommandSpec",
    "OutputFormat",
    "build_parser",
    "parse_command",
]
