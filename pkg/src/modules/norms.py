"""
范数模块 - 1-无条件基的范数预言机、基本函数 ψ 与块估计检查
"""
import logging
import math
import threading
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from ..config.settings import LabConfig
from ..models.entities import InequalityReport, Verdict
from ..models.errors import DimensionTooLarge, NotBlockSequence, SphereLabError
from .vectors import (
    DenseVector, PcpVector, SupportSet, Vector, materialize, parity_counts, support,
)

logger = logging.getLogger(__name__)

_DEFAULTS = LabConfig()

# 偶数划分 P = 2ℕ 的标识
EVENS = "evens"


class FundamentalFunction:
    """ψ(k) = ‖1_{[1,k]}‖_X 的备忘表（线程安全）"""

    def __init__(self, oracle: "NormOracle"):
        self.oracle = oracle
        self.values: Dict[int, float] = {0: 0.0}
        self._lock = threading.Lock()

    def __call__(self, k: int) -> float:
        k = int(k)
        if k < 0:
            raise SphereLabError(f"ψ 的参数必须非负，实际为 {k}")
        with self._lock:
            cached = self.values.get(k)
        if cached is not None:
            return cached
        value = self.oracle._fundamental(k)
        with self._lock:
            self.values[k] = value
        return value


class NormOracle(ABC):
    """
    1-无条件、规范化基上的范数

    block_q / block_p 是声明的块序列上 q / 下 p 估计指数，由 check_block_estimates 经验验证。
    symmetric 为 True 表示范数在坐标置换下不变，指示向量的范数只依赖元素个数。
    """

    name: str = "norm"
    r_exponent: Optional[float] = None
    block_q: float = 1.0
    block_p: float = math.inf
    admissible: bool = True  # 是否可用于分离/集中检查（c₀ 等价基不可用）
    symmetric: bool = False

    def __init__(self):
        self.fundamental = FundamentalFunction(self)

    def eval(self, v: Vector) -> float:
        if isinstance(v, PcpVector):
            return self._eval_pcp(v)
        return self._eval_dense(v.coords)

    def __call__(self, v: Vector) -> float:
        return self.eval(v)

    @abstractmethod
    def _eval_dense(self, arr: np.ndarray) -> float:
        pass

    def _eval_pcp(self, v: PcpVector) -> float:
        return self._eval_dense(materialize(v).coords)

    def _fundamental(self, k: int) -> float:
        if k == 0:
            return 0.0
        return self.eval(PcpVector.constant(k, 1.0))

    def psi(self, k: int) -> float:
        return self.fundamental(k)

    def indicator_norm(self, members: np.ndarray, dim: int) -> float:
        """‖1_A‖_X，A 为 1 起的下标数组"""
        if self.symmetric:
            return self.fundamental(len(members))
        arr = np.zeros(dim)
        arr[np.asarray(members, dtype=np.int64) - 1] = 1.0
        return self._eval_dense(arr)

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "r": self.r_exponent,
            "block_q": self.block_q,
            "block_p": self.block_p,
            "admissible": self.admissible,
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class LrNorm(NormOracle):
    """ℓ_r 范数，1 ≤ r < ∞"""

    symmetric = True

    def __init__(self, r: float):
        if not 1.0 <= r < math.inf:
            raise SphereLabError(f"ℓ_r 指数必须在 [1, ∞) 中，实际为 {r}")
        self.r_exponent = float(r)
        self.block_q = self.block_p = float(r)
        self.name = f"l{r:g}"
        super().__init__()

    def _eval_dense(self, arr: np.ndarray) -> float:
        r = self.r_exponent
        if r == 1.0:
            return math.fsum(np.abs(arr))
        return math.fsum(np.abs(arr) ** r) ** (1.0 / r)

    def _eval_pcp(self, v: PcpVector) -> float:
        # 每段按奇偶下标个数闭式累加
        r = self.r_exponent
        terms = []
        for lo, hi, ve, vo in v.segments:
            n_even, n_odd = parity_counts(lo, hi)
            terms.append(n_even * abs(ve) ** r)
            terms.append(n_odd * abs(vo) ** r)
        total = math.fsum(terms)
        return total if r == 1.0 else total ** (1.0 / r)

    def _fundamental(self, k: int) -> float:
        r = self.r_exponent
        if r == 1.0 or k == 0:
            return float(k)
        value = k ** (1.0 / r)
        if r.is_integer():
            root = round(value)
            if root ** int(r) == k:
                return float(root)
        return value


class LinfNorm(NormOracle):
    """ℓ∞ 范数（c₀ 基），只用于等双 Lipschitz 的正方向演示"""

    name = "linf"
    block_q = 1.0
    block_p = math.inf
    admissible = False
    symmetric = True

    def _eval_dense(self, arr: np.ndarray) -> float:
        return float(np.max(np.abs(arr)))

    def _eval_pcp(self, v: PcpVector) -> float:
        best = 0.0
        for lo, hi, ve, vo in v.segments:
            n_even, n_odd = parity_counts(lo, hi)
            if n_even:
                best = max(best, abs(ve))
            if n_odd:
                best = max(best, abs(vo))
        return best

    def _fundamental(self, k: int) -> float:
        return 1.0 if k else 0.0


class CallableNorm(NormOracle):
    """
    扩展点：用任意 1-无条件范数函数（接受 numpy 数组）构造预言机

    (q, p) 是声明值，需要用 check_block_estimates 验证。
    """

    def __init__(self, name: str, func: Callable[[np.ndarray], float],
                 block_q: float, block_p: float, symmetric: bool = False):
        if not 1.0 <= block_q <= block_p:
            raise SphereLabError(f"块估计指数需满足 1 ≤ q ≤ p，实际 q={block_q}, p={block_p}")
        self.name = name
        self._func = func
        self.block_q = float(block_q)
        self.block_p = float(block_p)
        self.symmetric = symmetric
        super().__init__()

    def _eval_dense(self, arr: np.ndarray) -> float:
        return float(self._func(np.asarray(arr, dtype=np.float64)))


def psi(oracle: NormOracle, k: int) -> float:
    """ψ(k) = ‖1_{[1,k]}‖_X"""
    if k < 1:
        raise SphereLabError(f"k 必须为正整数，实际为 {k}")
    return oracle.fundamental(k)


def partition_norms(oracle: NormOracle, partition: Union[SupportSet, str], k: int,
                    dense_limit: Optional[int] = None) -> tuple:
    """(‖1_{[1,k]∩P}‖_X, ‖1_{[1,k]∩Pᶜ}‖_X)"""
    if isinstance(partition, str):
        if partition != EVENS:
            raise SphereLabError(f"未知的划分标识: {partition}")
        n_even, n_odd = parity_counts(1, k)
        if oracle.symmetric:
            return oracle.fundamental(n_even), oracle.fundamental(n_odd)
        evens = PcpVector(k, ((1, k, 1.0, 0.0),))
        odds = PcpVector(k, ((1, k, 0.0, 1.0),))
        return oracle.eval(evens), oracle.eval(odds)

    limit = _DEFAULTS.dense_limit if dense_limit is None else dense_limit
    if k > limit:
        raise DimensionTooLarge(f"稠密划分的 k={k} 超过上限 {limit}")
    members = partition.members[partition.members <= k]
    mask = np.zeros(k, dtype=bool)
    mask[members - 1] = True
    complement = np.flatnonzero(~mask) + 1
    return oracle.indicator_norm(members, k), oracle.indicator_norm(complement, k)


def psi_partition(oracle: NormOracle, partition: Union[SupportSet, str], k: int,
                  dense_limit: Optional[int] = None) -> float:
    """ψ_P(k) = min(‖1_{[1,k]∩P}‖_X, ‖1_{[1,k]∩Pᶜ}‖_X)"""
    if k < 1:
        raise SphereLabError(f"k 必须为正整数，实际为 {k}")
    return min(partition_norms(oracle, partition, k, dense_limit))


def _power_mean(values: List[float], exponent: float) -> float:
    if math.isinf(exponent):
        return max(values)
    return math.fsum(v ** exponent for v in values) ** (1.0 / exponent)


def check_block_estimates(oracle: NormOracle, blocks: Sequence[DenseVector],
                          rel_tol: float = 1e-10) -> InequalityReport:
    """
    验证块序列的下 p、上 q 估计：
        (∑‖x_i‖^p)^{1/p} ≤ ‖∑x_i‖ ≤ (∑‖x_i‖^q)^{1/q}
    """
    if not blocks:
        raise NotBlockSequence("块序列为空")
    dim = blocks[0].dim
    last = 0
    for i, block in enumerate(blocks):
        if block.dim != dim:
            raise NotBlockSequence(f"第 {i} 个块维数 {block.dim} 与 {dim} 不一致")
        members = support(block).members
        if members.size == 0:
            continue
        if members[0] <= last:
            raise NotBlockSequence(f"第 {i} 个块的支撑与前面的块重叠或顺序错误")
        last = int(members[-1])

    norms = [oracle.eval(b) for b in blocks]
    total = oracle.eval(DenseVector(np.sum([b.coords for b in blocks], axis=0)))
    lower = _power_mean(norms, oracle.block_p)
    upper = _power_mean(norms, oracle.block_q)

    slack = rel_tol * max(1.0, upper)
    margin = min(total - lower, upper - total)
    report = InequalityReport(
        checker="block_estimates",
        inputs={"oracle": oracle.name, "blocks": len(blocks), "dim": dim},
        hypothesis_values={"lower_p": lower, "upper_q": upper},
        conclusion_value=total,
        threshold=upper,
        direction="between",
        margin=margin,
        verdict=Verdict.PASS if margin >= -slack else Verdict.FAIL,
    )
    if not report.passed:
        logger.warning(f"块估计失败: {oracle.name} 下界 {lower:.6g}，范数 {total:.6g}，上界 {upper:.6g}")
    return report
