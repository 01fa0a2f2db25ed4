"""
配置加载模块
读取 config/settings.json，缺失的键使用默认值
"""

import copy
import json
import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)

SETTINGS_FILE = Path(__file__).parent.parent.parent / "config" / "settings.json"

JOBS_ENV_VAR = "ANTIDICE_JOBS"

DEFAULT_SETTINGS = {
    "compute": {
        "jobs": 1,
        "kernel": "auto",
        "kronecker_min_length": 48,
    },
    "mapper": {
        "resolution": 200,
        "kmax": 20,
        "depth": 20,
        "domain": "four-fundamental",
    },
    "edgeworth": {
        "digits": 6,
        "precision_dps": 60,
        "check_factor": 20,
        "prescreen_margin": 1e-5,
    },
    "family": {
        "x_min": 10,
        "x_max": 200,
        "x_step": 2,
        "kmax": 200,
    },
    "checkpoint": {
        "database": "./data/checkpoints.db",
        "commit_every": 64,
    },
    "logging": {
        "level": "INFO",
    },
}


def _merge(base, override):
    """递归合并两个字典，override 优先"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(path=None):
    """
    加载配置
    文件不存在或无法解析时退回默认配置
    """
    config_file = Path(path) if path else SETTINGS_FILE
    settings = copy.deepcopy(DEFAULT_SETTINGS)
    try:
        if config_file.exists():
            with open(config_file, 'r', encoding='utf-8') as f:
                settings = _merge(settings, json.load(f))
        elif path:
            logger.warning(f"配置文件不存在，使用默认配置: {config_file}")
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"读取配置文件失败，使用默认配置: {e}")

    env_jobs = os.environ.get(JOBS_ENV_VAR)
    if env_jobs:
        try:
            settings["compute"]["jobs"] = max(1, int(env_jobs))
        except ValueError:
            logger.warning(f"{JOBS_ENV_VAR} 不是整数，忽略: {env_jobs!r}")
    return settings
