"""
见证构造模块 - 贪心划分、增长集、阶梯向量、见证向量、交错对、路径与尾坐标求根
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import LabConfig
from ..models.entities import InterlacedPair, Profile
from ..models.errors import (
    BadTuple, BisectionDidNotConverge, DimensionTooLarge, NoSignChange,
    NotEnoughElements, OracleIsC0Like, SphereLabError,
)
from .norms import EVENS, NormOracle, partition_norms
from .vectors import DenseVector, PcpVector, SupportSet, Vector, parity_counts

logger = logging.getLogger(__name__)

_DEFAULTS = LabConfig()

SEPARATION = "separation"
CONCENTRATION = "concentration"


# ========== 划分 ==========

@dataclass(frozen=True, eq=False)
class Partition:
    """
    下标集 ℕ 的划分 P / Pᶜ

    evens: P = 2ℕ，闭式奇偶规则，可用于任意大的 k；
    greedy: 贪心算法得到的有限前缀，mask[i-1] 为 True 表示 i ∈ P。
    """
    kind: str
    mask: Optional[np.ndarray] = None
    oracle_name: Optional[str] = None

    @classmethod
    def evens(cls) -> "Partition":
        return cls(kind=EVENS)

    @property
    def k_max(self) -> Optional[int]:
        return None if self.mask is None else int(self.mask.size)

    def _require(self, k: int):
        if self.mask is not None and k > self.mask.size:
            raise DimensionTooLarge(f"贪心划分只计算到 {self.mask.size}，需要 {k}")

    def contains(self, index: int) -> bool:
        if self.kind == EVENS:
            return index % 2 == 0
        self._require(index)
        return bool(self.mask[index - 1])

    def members(self, k: int) -> SupportSet:
        """P ∩ [1, k]"""
        if self.kind == EVENS:
            return SupportSet(k, np.arange(2, k + 1, 2))
        self._require(k)
        return SupportSet(k, np.flatnonzero(self.mask[:k]) + 1)

    def indicator(self, k: int) -> np.ndarray:
        """长度为 k 的布尔数组，第 i−1 位表示 i ∈ P"""
        if self.kind == EVENS:
            return np.arange(1, k + 1) % 2 == 0
        self._require(k)
        return self.mask[:k]

    def counts(self, lo: int, hi: int) -> Tuple[int, int]:
        """(|P ∩ [lo,hi]|, |Pᶜ ∩ [lo,hi]|)"""
        if hi < lo:
            return 0, 0
        if self.kind == EVENS:
            return parity_counts(lo, hi)
        self._require(hi)
        in_p = int(np.count_nonzero(self.mask[lo - 1:hi]))
        return in_p, (hi - lo + 1) - in_p

    def first_in(self, lo: int, hi: int, in_p: bool) -> Optional[int]:
        """[lo, hi] 中第一个属于 P（in_p=True）或 Pᶜ 的下标"""
        if hi < lo:
            return None
        if self.kind == EVENS:
            first = lo if (lo % 2 == 0) == in_p else lo + 1
            return first if first <= hi else None
        self._require(hi)
        hits = np.flatnonzero(self.mask[lo - 1:hi] == in_p)
        return int(hits[0]) + lo if hits.size else None

    def as_norm_argument(self, k: int) -> Union[SupportSet, str]:
        return EVENS if self.kind == EVENS else self.members(k)

    def balance(self, oracle: NormOracle, k: int) -> float:
        """| ‖1_{[1,k]∩P}‖ − ‖1_{[1,k]∩Pᶜ}‖ |"""
        in_p, in_c = partition_norms(oracle, self.as_norm_argument(k), k)
        return abs(in_p - in_c)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "k_max": self.k_max, "oracle": self.oracle_name}


def greedy_partition(oracle: NormOracle, k_max: int, dense_limit: Optional[int] = None) -> Partition:
    """
    贪心划分：1 ∈ P，2 ∈ Pᶜ；之后 k 进入 P 当且仅当
        ‖1_{(P∩[1,k−1])∪{k}}‖ ≤ ‖1_{(Pᶜ∩[1,k−1])∪{k}}‖
    （相等时进入 P）
    """
    limit = _DEFAULTS.dense_limit if dense_limit is None else dense_limit
    if k_max > limit:
        raise DimensionTooLarge(f"贪心划分长度 {k_max} 超过稠密上限 {limit}")
    if k_max < 1:
        raise SphereLabError(f"k_max 必须为正整数，实际为 {k_max}")

    mask = np.zeros(k_max, dtype=bool)
    mask[0] = True
    if oracle.symmetric:
        # 对称范数下指示向量的范数只依赖元素个数
        n_p, n_c = 1, 1
        for k in range(3, k_max + 1):
            if oracle.fundamental(n_p + 1) <= oracle.fundamental(n_c + 1):
                mask[k - 1] = True
                n_p += 1
            else:
                n_c += 1
    else:
        for k in range(3, k_max + 1):
            with_p = mask[:k].astype(np.float64)
            with_p[k - 1] = 1.0
            with_c = (~mask[:k]).astype(np.float64)
            if oracle.eval(DenseVector(with_p)) <= oracle.eval(DenseVector(with_c)):
                mask[k - 1] = True

    logger.debug(f"贪心划分完成: {oracle.name}, k_max={k_max}, |P|={int(mask.sum())}")
    mask.setflags(write=False)
    return Partition(kind="greedy", mask=mask, oracle_name=oracle.name)


# ========== 增长集 ==========

def growth_factor(oracle: NormOracle, d: int, eps: float, variant: str = SEPARATION) -> Tuple[float, float]:
    """
    增长条件 ψ(k_{j+1}) ≥ factor·ψ(k_j) + additive 的 (factor, additive)

    separation:    factor = 8·d^{1/q−1/p}/ε + 2，additive = 1
    concentration: factor = 32·d^{1/q−1/p}/ε，additive = 0
    """
    spread = d ** (1.0 / oracle.block_q - 1.0 / oracle.block_p)
    if variant == SEPARATION:
        return 8.0 * spread / eps + 2.0, 1.0
    if variant == CONCENTRATION:
        return 32.0 * spread / eps, 0.0
    raise SphereLabError(f"未知的增长集变体: {variant}")


def closed_form_base(r: float, eps: float, variant: str = SEPARATION) -> int:
    """
    ℓ_r 与 P = 2ℕ 时的闭式底数
        separation:    a = ⌈(8/ε + 3)^r⌉
        concentration: a = ⌈(32/ε + 2)^r⌉
    整数 r 用有理数精确取整
    """
    numerator, offset = (8, 3) if variant == SEPARATION else (32, 2)
    if float(r).is_integer():
        base = Fraction(numerator) / Fraction(eps) + offset
        return math.ceil(base ** int(r))
    return math.ceil((numerator / eps + offset) ** r)


@dataclass(frozen=True, eq=False)
class GrowthSet:
    """满足增长条件的整数序列 M = {k_j}"""
    oracle: NormOracle
    partition: Partition
    d: int
    eps: float
    elements: Tuple[int, ...]
    a: Optional[int] = None
    variant: str = SEPARATION

    def below(self, budget: int) -> Tuple[int, ...]:
        return tuple(e for e in self.elements if e < budget)

    def factor(self) -> Tuple[float, float]:
        return growth_factor(self.oracle, self.d, self.eps, self.variant)

    def satisfies_assumption(self, partition_horizon: int = 10_000) -> List[str]:
        """逐条核验增长、间隔与划分三条件，返回违反项（空列表表示全部满足）"""
        violations = []
        psi = self.oracle.fundamental
        factor, additive = self.factor()

        exact_l1 = self.oracle.r_exponent == 1.0
        for kj, kn in zip(self.elements, self.elements[1:]):
            if exact_l1:
                # ψ(k) = k，整数精确比较
                ok = Fraction(kn) >= Fraction(factor) * kj + Fraction(additive)
            else:
                ok = psi(kn) >= factor * psi(kj) + additive - 1e-9
            if not ok:
                violations.append(f"growth: ψ({kn}) < {factor:.6g}·ψ({kj}) + {additive:g}")

            in_p, in_c = self.partition.counts(kj + 1, kn)
            if not (in_p and in_c):
                violations.append(f"gap: ({kj}, {kn}] 未同时包含 P 与 Pᶜ 的元素")

        horizon = partition_horizon if self.partition.k_max is None else min(partition_horizon, self.partition.k_max)
        checkpoints = set(range(1, horizon + 1))
        checkpoints.update(e for e in self.elements if self.partition.k_max is None or e <= self.partition.k_max)
        for k in sorted(checkpoints):
            in_p, in_c = partition_norms(self.oracle, self.partition.as_norm_argument(k), k)
            if min(in_p, in_c) < 0.5 * (psi(k) - 1.0) - 1e-9:
                violations.append(f"partition: ψ_P({k}) < (ψ({k}) − 1)/2")
                break
        return violations

    def to_dict(self) -> Dict[str, Any]:
        factor, additive = self.factor()
        return {
            "a": self.a,
            "elements": list(self.elements),
            "variant": self.variant,
            "d": self.d,
            "eps": self.eps,
            "factor": factor,
            "additive": additive,
            "partition": self.partition.kind,
            "oracle": self.oracle.name,
        }


def _gap_minimum(partition: Partition, kj: int) -> int:
    """最小的 k' 使 (kj, k'] 同时含 P 与 Pᶜ 的元素"""
    if partition.kind == EVENS:
        return kj + 2
    mask = partition.mask
    tail = mask[kj:]
    hits_p, hits_c = np.flatnonzero(tail), np.flatnonzero(~tail)
    if not hits_p.size or not hits_c.size:
        raise DimensionTooLarge(f"贪心划分长度 {mask.size} 不足以覆盖 {kj} 之后的间隔")
    return kj + 1 + int(max(hits_p[0], hits_c[0]))


def build_growth_set(oracle: NormOracle, partition: Partition, d: int, eps: float,
                     count: Optional[int] = None, variant: str = SEPARATION,
                     scan_limit: Optional[int] = None) -> GrowthSet:
    """
    构造满足增长、间隔与划分条件的增长集

    ℓ_r 与偶数划分使用闭式 k_j = a^{j−1}；一般预言机从 1 开始，
    以倍增加二分找到满足增长条件与间隔条件的最小 k。
    """
    if not 0.0 < eps <= 1.0:
        raise SphereLabError(f"eps 必须在 (0, 1] 中，实际为 {eps}")
    if d < 1:
        raise SphereLabError(f"d 必须为正整数，实际为 {d}")
    if not oracle.admissible:
        raise OracleIsC0Like(f"{oracle.name} 的基本函数有界，不存在增长集")
    count = 2 * d + 2 if count is None else count

    if oracle.r_exponent is not None and partition.kind == EVENS:
        a = closed_form_base(oracle.r_exponent, eps, variant)
        elements = tuple(a ** j for j in range(count))
        logger.debug(f"闭式增长集: {oracle.name}, eps={eps}, a={a}")
        return GrowthSet(oracle, partition, d, eps, elements, a=a, variant=variant)

    limit = _DEFAULTS.scan_limit if scan_limit is None else scan_limit
    if oracle.r_exponent is None:
        limit = min(limit, _DEFAULTS.dense_limit)
    factor, additive = growth_factor(oracle, d, eps, variant)
    psi = oracle.fundamental
    elements = [1]
    while len(elements) < count:
        kj = elements[-1]
        target = factor * psi(kj) + additive
        hi = kj + 1
        while psi(hi) < target:
            if hi >= limit:
                raise OracleIsC0Like(
                    f"{oracle.name}: ψ 在扫描上限 {limit} 内未达到 {target:.6g}（ψ({hi})={psi(hi):.6g}）"
                )
            hi = min(2 * hi, limit)
        lo = kj
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if psi(mid) >= target:
                hi = mid
            else:
                lo = mid
        elements.append(max(hi, _gap_minimum(partition, kj)))

    logger.debug(f"扫描增长集: {oracle.name}, elements={elements}")
    return GrowthSet(oracle, partition, d, eps, tuple(elements), a=None, variant=variant)


def build_growth_set_covering(oracle: NormOracle, partition: Partition, d: int, eps: float,
                              budget: int, variant: str = SEPARATION, max_count: int = 64) -> GrowthSet:
    """元素个数逐次加倍，直到最后一个元素不小于 budget（至少 2d+2 个元素）"""
    count = 2 * d + 2
    growth = build_growth_set(oracle, partition, d, eps, count=count, variant=variant)
    while growth.elements[-1] < budget and count < max_count:
        count = min(2 * count, max_count)
        growth = build_growth_set(oracle, partition, d, eps, count=count, variant=variant)
    return growth


# ========== 见证向量 ==========

def _check_tuple(m: Sequence[int], k: int, strict: bool):
    if not m:
        raise BadTuple("元组不能为空")
    if m[0] < 1 or any(x >= y for x, y in zip(m, m[1:])):
        raise BadTuple(f"元组必须严格递增且从 1 以上开始: {tuple(m)}")
    if m[-1] > k or (strict and m[-1] >= k):
        raise BadTuple(f"元组末项 {m[-1]} 与 k={k} 不符")


def staircase_z(m: Sequence[int], k: int) -> PcpVector:
    """z(m̄) = ∑_s (1 − (s−1)/d)·1_{(m_{s−1}, m_s]}，在 (m_d, k] 上为 0"""
    m = tuple(int(v) for v in m)
    _check_tuple(m, k, strict=False)
    d = len(m)
    bounds = (0,) + m
    segs = [(bounds[s] + 1, bounds[s + 1], 1.0 - s / d, 1.0 - s / d) for s in range(d)]
    if m[-1] < k:
        segs.append((m[-1] + 1, k, 0.0, 0.0))
    return PcpVector(k, tuple(segs))


def witness_x(m: Sequence[int], u: Profile, k: int, partition: Partition) -> Vector:
    """
    x(m̄,u,k) = ∑ a_s·1_{(m_{s−1},m_s]∩P} + ∑ b_s·1_{(m_{s−1},m_s]∩Pᶜ} + c·1_{(m_d,k]}

    偶数划分返回 PcpVector（偶数下标取 a_s），贪心划分返回 DenseVector。
    """
    m = tuple(int(v) for v in m)
    _check_tuple(m, k, strict=True)
    if u.d != len(m):
        raise BadTuple(f"剖面维数 d={u.d} 与元组长度 {len(m)} 不符")
    bounds = (0,) + m

    if partition.kind == EVENS:
        segs = [(bounds[s] + 1, bounds[s + 1], u.a[s], u.b[s]) for s in range(u.d)]
        segs.append((m[-1] + 1, k, u.c, u.c))
        return PcpVector(k, tuple(segs))

    in_p = partition.indicator(k)
    out = np.full(k, u.c)
    for s in range(u.d):
        lo, hi = bounds[s], bounds[s + 1]
        out[lo:hi] = np.where(in_p[lo:hi], u.a[s], u.b[s])
    return DenseVector(out)


def witness_y(m: Sequence[int], k: int, partition: Partition) -> Vector:
    """y(m̄)：P 上从 1 下降到 0 的阶梯，Pᶜ 上从 −1 上升到 0 的阶梯"""
    return witness_x(m, Profile.y_profile(len(m)), k, partition)


def coordinate(v: Vector, index: int) -> float:
    if isinstance(v, PcpVector):
        return v.value_at(index)
    return float(v.coords[index - 1])


# ========== 交错对 ==========

def enumerate_interlaced(growth: GrowthSet, d: int, k_budget: int,
                         mode: str = "consecutive", start: int = 0) -> List[InterlacedPair]:
    """
    从增长集中低于 k_budget 的元素构造交错对，k 取 k_budget

    consecutive: m̄ 取下标 start, start+2, …，n̄ 取其后一位（下标从 0 计）；
    exhaustive: 所有 2d 元组合，交替分配给 m̄ 与 n̄。
    """
    elems = list(growth.below(k_budget))
    if len(elems) - start < 2 * d:
        raise NotEnoughElements(
            f"增长集在 {k_budget} 以下只有 {len(elems)} 个元素，从第 {start} 个起不足 2d={2 * d}"
        )
    if mode == "consecutive":
        return [
            InterlacedPair(d, tuple(elems[t:t + 2 * d:2]), tuple(elems[t + 1:t + 2 * d:2]), k_budget)
            for t in range(start, len(elems) - 2 * d + 1, 2)
        ]
    if mode == "exhaustive":
        return [
            InterlacedPair(d, combo[0::2], combo[1::2], k_budget)
            for combo in itertools.combinations(elems[start:], 2 * d)
        ]
    raise SphereLabError(f"未知的枚举模式: {mode}")


# ========== 路径与尾坐标求根 ==========

@dataclass(frozen=True, eq=False)
class PathPhi:
    """
    两段折线路径：t ∈ [0, ½] 从 (1,…,1) 到 y(m̄)，t ∈ [½, 1] 从 y(m̄) 到 (−1,…,−1)

    φ(t) 在每个块 (m_{s−1},m_s]∩P、(m_{s−1},m_s]∩Pᶜ 与 (m_d,k] 上为常数，尾坐标为 1 − 2t。
    """
    m: Tuple[int, ...]
    k: int
    partition: Partition

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        _check_tuple(self.m, self.k, strict=True)

    @property
    def d(self) -> int:
        return len(self.m)

    def profile_at(self, t: float) -> Profile:
        if not 0.0 <= t <= 1.0:
            raise SphereLabError(f"路径参数 t 必须在 [0, 1] 中，实际为 {t}")
        y = Profile.y_profile(self.d)
        if t == 1.0:
            return Profile(self.d, (-1.0,) * self.d, (-1.0,) * self.d, -1.0)
        if t <= 0.5:
            w = 2.0 * t
            a = tuple(1.0 - w * (1.0 - v) for v in y.a)
            b = tuple(1.0 - w * (1.0 - v) for v in y.b)
            return Profile(self.d, a, b, 1.0 - w)
        w = 2.0 * t - 1.0
        a = tuple(v - w * (1.0 + v) for v in y.a)
        b = tuple(v - w * (1.0 + v) for v in y.b)
        return Profile(self.d, a, b, -w)

    def __call__(self, t: float) -> Vector:
        return witness_x(self.m, self.profile_at(t), self.k, self.partition)


def path_phi(m: Sequence[int], k: int, partition: Partition) -> PathPhi:
    return PathPhi(tuple(m), k, partition)


@dataclass
class TailRoot:
    """尾坐标零点及由此恢复的剖面"""
    t: float
    tail_value: float
    iterations: int
    sign: int  # −1 表示用 −F 代替 F
    profile: Profile
    witness: Vector = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "tail_value": self.tail_value,
            "iterations": self.iterations,
            "sign": self.sign,
            "profile": self.profile.to_dict(),
        }


def recover_profile(path: PathPhi, t: float, x: Vector) -> Profile:
    """每个块读取一个代表坐标恢复 u；块与划分类不相交时取解析值"""
    analytic = path.profile_at(t)
    bounds = (0,) + path.m
    a, b = [], []
    for s in range(path.d):
        lo, hi = bounds[s] + 1, bounds[s + 1]
        idx_p = path.partition.first_in(lo, hi, True)
        idx_c = path.partition.first_in(lo, hi, False)
        a.append(coordinate(x, idx_p) if idx_p is not None else analytic.a[s])
        b.append(coordinate(x, idx_c) if idx_c is not None else analytic.b[s])
    return Profile(path.d, tuple(a), tuple(b), coordinate(x, path.k))


def find_tail_zero(F, path: PathPhi, tol: Optional[float] = None,
                   max_iter: Optional[int] = None) -> TailRoot:
    """
    在路径上二分求 t，使 F 在尾块 (m_d, k] 上的公共坐标为 0

    端点符号约定：t=0 处为正、t=1 处为负，必要时以 −F 代替 F。
    """
    tol = _DEFAULTS.bisection_tol if tol is None else tol
    max_iter = _DEFAULTS.bisection_max_iter if max_iter is None else max_iter
    k = path.k

    def tail(t: float) -> float:
        return coordinate(F(path(t)), k)

    def found(t: float, value: float, iterations: int, sign: int) -> TailRoot:
        x = path(t)
        profile = recover_profile(path, t, x)
        return TailRoot(t, value, iterations, sign, profile, witness_x(path.m, profile, k, path.partition))

    g0, g1 = tail(0.0), tail(1.0)
    if abs(g0) <= tol:
        return found(0.0, g0, 0, 1)
    if abs(g1) <= tol:
        return found(1.0, g1, 0, 1)
    if g0 * g1 > 0:
        raise NoSignChange(f"尾坐标在路径两端同号: F(φ(0))={g0:.6g}, F(φ(1))={g1:.6g}")
    sign = 1 if g0 > 0 else -1

    lo, hi = 0.0, 1.0
    for iteration in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        value = tail(mid)
        if abs(value) <= tol:
            logger.debug(f"尾坐标零点: t={mid!r}, 迭代 {iteration} 次")
            return found(mid, value, iteration, sign)
        if sign * value > 0:
            lo = mid
        else:
            hi = mid

    raise BisectionDidNotConverge(
        "continuous",
        f"{max_iter} 次迭代后尾坐标仍为 {value:.3g}，区间 [{lo!r}, {hi!r}]",
    )
