"""
输出模块
同一个命令结果可以输出为人类可读文本、JSON 或 CSV
"""

import csv
import json
from dataclasses import dataclass, field

from src.cli.parser import OutputFormat


@dataclass
class CommandResult:
    """
    payload: JSON 输出 (字段顺序固定)
    lines: 人类可读输出
    table: (表头, 行) 供 CSV 输出；为 None 时输出 payload 中的标量键值对
    """

    payload: dict
    lines: list = field(default_factory=list)
    table: tuple | None = None
    exit_code: int = 0


def _scalar_rows(payload):
    return [[key, value] for key, value in payload.items() if not isinstance(value, (dict, list))]


def emit(result, output, stream):
    if output is OutputFormat.JSON:
        stream.write(json.dumps(result.payload, ensure_ascii=False, indent=2))
        stream.write("\n")
    elif output is OutputFormat.CSV:
        writer = csv.writer(stream, lineterminator="\n")
        if result.table is not None:
            header, rows = result.table
            writer.writerow(header)
            writer.writerows(rows)
        else:
            writer.writerow(["key", "value"])
            writer.writerows(_scalar_rows(result.payload))
    else:
        for line in result.lines:
            stream.write(f"{line}\n")
    stream.flush()
