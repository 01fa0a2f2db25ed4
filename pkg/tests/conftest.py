import sys
from pathlib import Path

import pytest

# 确保项目根目录在Python路径中
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.core.dice import parse_die  # noqa: E402


@pytest.fixture
def david():
    return parse_die("1,1,4,4,5,6")


@pytest.fixture
def goliath():
    return parse_die("0,1,2,6,6,6")


@pytest.fixture
def zero_die():
    return parse_die("0")


@pytest.fixture
def magic_square_dice():
    """幻方的三行：每一对都以 5/9 胜出，构成一个环"""
    return [parse_die("2,7,6"), parse_die("9,5,1"), parse_die("4,3,8")]
