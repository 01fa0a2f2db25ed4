"""
异常定义模块
所有库函数抛出的异常都继承自 DiceError，命令行层据此映射退出码
"""


class DiceError(Exception):
    """骰子计算相关错误的基类"""


class DieParseError(DiceError, ValueError):
    """骰子文本格式错误"""


class SpanUndefinedError(DiceError):
    """支撑集只有一个点，span 无定义"""


class UnbalancedDistributionError(DiceError):
    """分布均值不为 0"""


class NoLeadingTermError(DiceError):
    """三阶矩为 0，Edgeworth 主项消失"""


class UnsupportedLatticeError(DiceError):
    """span/shift 不在证书支持的范围内 (仅支持 b = 1, a = 0)"""


class BelowValidityFloorError(DiceError):
    """n 低于误差界的适用下限"""


class ThresholdNotFoundError(DiceError):
    """在搜索上限内找不到阈值"""


class PreconditionError(DiceError):
    """前置条件不满足"""


class IncompleteGridError(DiceError):
    """记录不能构成完整的矩形网格"""


class DegenerateFitError(DiceError):
    """拟合点不足 (不同的 x 少于 3 个)"""


class CheckpointError(DiceError):
    """检查点读写失败或格式不兼容"""


class ComputationCancelled(DiceError):
    """计算被调用方取消"""
