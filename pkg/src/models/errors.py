"""
异常定义 - 所有检查器与构造器抛出的错误
"""
from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from .entities import InequalityReport


class SphereLabError(ValueError):
    """实验室根异常"""


class DimensionTooLarge(SphereLabError):
    """维数超过稠密存储上限"""


class DimMismatch(SphereLabError):
    """两个向量（或向量与映射）维数不一致"""


class NotBlockSequence(SphereLabError):
    """块序列的支撑不满足不相交且顺序相接"""


class DegenerateDenominator(SphereLabError):
    """φ-映射的分母 ∑|φ_j(x_j)| 退化为 0"""


class NotInPositivePart(SphereLabError):
    """输入存在负坐标，不在正部 S⁺ 中"""


class NotOnSphere(SphereLabError):
    """输入不在指定单位球面上"""


class KTooLargeForExact(SphereLabError):
    """精确对称化需要 k! 项，维数过大"""


class TargetNotPositiveFacet(SphereLabError):
    """映射像不在正面 S⁺_{ℓ₁ᵏ} 中"""


class BadTuple(SphereLabError):
    """元组不严格递增、越界或不交错"""


class OracleIsC0Like(SphereLabError):
    """基本函数 ψ 在扫描范围内有界（等价于 c₀ 基）"""


class NotEnoughElements(SphereLabError):
    """增长集中低于预算的元素不足 2d 个"""


class NoSignChange(SphereLabError):
    """路径两端尾坐标不跨越零点"""


class CatalogError(SphereLabError):
    """无法解析的范数或映射标识"""


class ManifestError(SphereLabError):
    """实验清单无效"""


class HypothesisViolated(SphereLabError):
    """定理假设在实际使用的向量上不成立"""

    def __init__(self, hypothesis: str, detail: str = "",
                 report: Optional["InequalityReport"] = None):
        self.hypothesis = hypothesis
        self.detail = detail
        self.report = report
        message = f"假设不成立: {hypothesis}"
        if detail:
            message += f"（{detail}）"
        super().__init__(message)


class BisectionDidNotConverge(HypothesisViolated):
    """二分在最大迭代次数内未把尾坐标压到容差以内（连续性存疑）"""
