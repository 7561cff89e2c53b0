"""
数据模型 - 检查报告、模连续性估计、见证剖面、交错元组对
"""
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .errors import BadTuple, NotOnSphere


class Verdict(Enum):
    """检查结论"""
    PASS = "pass"
    FAIL = "fail"
    HYPOTHESIS_NOT_MET = "hypothesis_not_met"


# 不等式方向：le 表示 结论 ≤ 阈值，ge 表示 结论 ≥ 阈值，gt 表示严格大于，between 表示双边估计
DIRECTIONS = ("le", "ge", "gt", "between")


@dataclass
class InequalityReport:
    """单次检查器运行的结果"""
    checker: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    hypothesis_values: Dict[str, float] = field(default_factory=dict)
    conclusion_value: float = 0.0
    threshold: float = 0.0
    direction: str = "le"
    margin: float = 0.0  # 满足不等式时为正
    verdict: Verdict = Verdict.PASS
    block_readouts: Optional[Dict[str, List[float]]] = None  # α_s, β_s, γ
    notes: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_comparison(
        cls,
        checker: str,
        value: float,
        threshold: float,
        direction: str,
        tol: float = 0.0,
        **kwargs,
    ) -> "InequalityReport":
        """
        按方向比较结论值与阈值并给出 verdict

        le/ge 允许 tol 的松弛；gt 要求余量至少为 tol（严格不等式）
        """
        if direction == "le":
            margin = threshold - value
            ok = margin >= -tol
        elif direction == "ge":
            margin = value - threshold
            ok = margin >= -tol
        elif direction == "gt":
            margin = value - threshold
            ok = margin >= tol
        else:
            raise ValueError(f"未知的不等式方向: {direction}")

        return cls(
            checker=checker,
            conclusion_value=float(value),
            threshold=float(threshold),
            direction=direction,
            margin=float(margin),
            verdict=Verdict.PASS if ok else Verdict.FAIL,
            **kwargs,
        )

    @classmethod
    def hypothesis_not_met(cls, checker: str, hypothesis: str, **kwargs) -> "InequalityReport":
        """假设不成立时的报告（不给出结论判断）"""
        notes = kwargs.pop("notes", {})
        notes = {**notes, "failed_hypothesis": hypothesis}
        return cls(checker=checker, verdict=Verdict.HYPOTHESIS_NOT_MET, notes=notes, **kwargs)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data


@dataclass
class ModulusEstimate:
    """模连续性 ω_F(t) 的下界估计"""
    map_name: str
    t: float
    lower_bound: float = 0.0
    witness_pair: Optional[Tuple[Any, Any]] = None
    witness_distance: float = 0.0  # 见证对的定义域距离
    witness_source: str = ""
    pairs_tried: int = 0
    pairs_skipped: int = 0  # 距离超过 t 被跳过的点对数

    def to_dict(self, max_dense: int = 10_000) -> Dict[str, Any]:
        """超过 max_dense 维的稠密见证只记录维数"""
        pair = None
        if self.witness_pair is not None:
            pair = [
                v.to_json() if hasattr(v, "segments") or v.dim <= max_dense else {"dim": v.dim, "omitted": True}
                for v in self.witness_pair
            ]
        return {
            "map": self.map_name,
            "t": self.t,
            "lower_bound": self.lower_bound,
            "witness_pair": pair,
            "witness_distance": self.witness_distance,
            "witness_source": self.witness_source,
            "pairs_tried": self.pairs_tried,
            "pairs_skipped": self.pairs_skipped,
        }


@dataclass(frozen=True)
class Profile:
    """见证剖面 u = ((a_s), (b_s), c) ∈ S_{ℓ∞^{2d+1}}"""
    d: int
    a: Tuple[float, ...]
    b: Tuple[float, ...]
    c: float
    tol: float = field(default=1e-9, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "c", float(self.c))
        if len(self.a) != self.d or len(self.b) != self.d:
            raise BadTuple(f"剖面长度与 d={self.d} 不符: |a|={len(self.a)}, |b|={len(self.b)}")
        values = self.a + self.b + (self.c,)
        peak = max(abs(v) for v in values)
        if abs(peak - 1.0) > self.tol:
            raise NotOnSphere(f"剖面的 ℓ∞ 范数应为 1，实际为 {peak!r}")

    @classmethod
    def staircase(cls, d: int) -> "Profile":
        """a_s = b_s = 1 − (s−1)/d, c = 0，对应阶梯向量 z"""
        steps = tuple(1.0 - s / d for s in range(d))
        return cls(d=d, a=steps, b=steps, c=0.0)

    @classmethod
    def y_profile(cls, d: int) -> "Profile":
        """a_s = 1 − (s−1)/d, b_s = −a_s, c = 0"""
        steps = tuple(1.0 - s / d for s in range(d))
        return cls(d=d, a=steps, b=tuple(-v for v in steps), c=0.0)

    def interlacing_bound(self) -> float:
        """交错对距离上界 max_s max(|a_s − a_{s+1}|, |b_s − b_{s+1}|)，a_{d+1} = b_{d+1} = c"""
        a = self.a + (self.c,)
        b = self.b + (self.c,)
        return max(max(abs(a[s] - a[s + 1]), abs(b[s] - b[s + 1])) for s in range(self.d))

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "a": list(self.a), "b": list(self.b), "c": self.c}


@dataclass(frozen=True)
class InterlacedPair:
    """交错元组对 m₁ < n₁ < … < m_d < n_d < k"""
    d: int
    m: Tuple[int, ...]
    n: Tuple[int, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if len(self.m) != self.d or len(self.n) != self.d:
            raise BadTuple(f"元组长度与 d={self.d} 不符")
        merged = [v for pair in zip(self.m, self.n) for v in pair] + [self.k]
        if merged[0] < 1 or any(x >= y for x, y in zip(merged, merged[1:])):
            raise BadTuple(f"元组不交错: m={self.m}, n={self.n}, k={self.k}")

    def to_dict(self) -> Dict[str, Any]:
        return {"m": list(self.m), "n": list(self.n), "k": self.k}
