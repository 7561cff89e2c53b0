"""
映射模块 - 球面映射目录、绝对值/对称化包装器与结构性质检查器

所有映射 F: S_{ℓ∞ᵏ} → S_{X_k} 都是不可变对象，求值是纯函数。
pcp_capable 的映射可以在 PcpVector 上精确求值，不物化。
"""
import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import LabConfig
from ..models.entities import InequalityReport, Verdict
from ..models.errors import (
    DegenerateDenominator, DimMismatch, KTooLargeForExact, NotInPositivePart,
    NotOnSphere, SphereLabError, TargetNotPositiveFacet,
)
from .norms import LinfNorm, LrNorm, NormOracle
from .vectors import (
    DenseVector, PcpVector, Vector, from_dense, map_values, materialize, parity_counts,
    same_support, subtract, sup_distance, support_size, value_counts, value_pairs,
)

logger = logging.getLogger(__name__)

_DEFAULTS = LabConfig()


@dataclass(frozen=True)
class MapProperties:
    """声明的结构性质（由检查器验证，下游分析不直接信任）"""
    step_preserving: bool = False
    support_preserving: bool = False
    non_increasing_support: bool = False
    permutation_equivariant: bool = False
    continuous: bool = True

    def to_dict(self) -> Dict[str, bool]:
        return asdict(self)


class SphereMap(ABC):
    """球面映射基类"""

    pcp_capable: bool = False
    positive_domain: bool = False

    def __init__(self, dim: int, target_oracle: NormOracle, name: str,
                 props: MapProperties, domain_oracle: Optional[NormOracle] = None):
        if dim < 1:
            raise SphereLabError(f"映射维数必须为正整数，实际为 {dim}")
        self.dim = dim
        self.target_oracle = target_oracle
        self.domain_oracle = domain_oracle or LinfNorm()
        self.name = name
        self.props = props

    def __call__(self, x: Vector) -> Vector:
        self._check_input(x)
        if isinstance(x, PcpVector):
            if self.pcp_capable:
                return self._eval_pcp(x)
            return from_dense(self._eval_dense(materialize(x).coords))
        return DenseVector(self._eval_dense(x.coords))

    def _check_input(self, x: Vector):
        if x.dim != self.dim:
            raise DimMismatch(f"{self.name} 的维数为 {self.dim}，输入维数为 {x.dim}")
        if self.positive_domain:
            values, _ = value_counts(x)
            if values[0] < -_DEFAULTS.coord_tol:
                raise NotInPositivePart(f"{self.name} 只定义在正部 S⁺ 上，输入含坐标 {values[0]:.3g}")

    @abstractmethod
    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        pass

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        raise NotImplementedError

    def reference(self, x: Vector) -> Vector:
        """独立的参考求值（默认走稠密路径），用于交叉校验"""
        self._check_input(x)
        out = DenseVector(self._eval_dense(materialize(x).coords))
        return from_dense(out) if isinstance(x, PcpVector) else out

    def image_distance(self, x: Vector, y: Vector) -> float:
        """‖F(x) − F(y)‖_X"""
        return self.target_oracle.eval(subtract(self(x), self(y)))

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "dim": self.dim,
            "target": self.target_oracle.name,
            "pcp_capable": self.pcp_capable,
            "positive_domain": self.positive_domain,
            "props": self.props.to_dict(),
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, k={self.dim})"


# ========== 目录映射 ==========

class NormalizeMap(SphereMap):
    """x ↦ x / ‖x‖_X"""

    pcp_capable = True

    def __init__(self, dim: int, oracle: NormOracle):
        super().__init__(dim, oracle, "normalize", MapProperties(
            step_preserving=True,
            support_preserving=True,
            non_increasing_support=True,
            permutation_equivariant=oracle.symmetric,
        ))

    def _norm(self, value: float) -> float:
        if value == 0.0:
            raise DegenerateDenominator("零向量无法归一化")
        return value

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return arr / self._norm(self.target_oracle._eval_dense(arr))

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        n = self._norm(self.target_oracle.eval(x))
        return map_values(x, lambda a: a / n)


class PhiMap(SphereMap):
    """x ↦ (φ_i(x_i) / ∑_j |φ_j(x_j)|)_i，像在 S_{ℓ₁ᵏ} 中"""

    def __init__(self, dim: int, phis: Union[Callable, Sequence[Callable]], name: str = "phi",
                 degenerate_tol: float = 1e-12):
        single = callable(phis)
        if not single and len(phis) != dim:
            raise DimMismatch(f"φ 函数个数 {len(phis)} 与维数 {dim} 不符")
        self.phis = phis
        self.single = single
        self.pcp_capable = single
        self.degenerate_tol = degenerate_tol
        funcs = [phis] if single else list(phis)
        zero_fixed = all(float(np.asarray(f(np.zeros(1)))[0]) == 0.0 for f in funcs)
        super().__init__(dim, LrNorm(1.0), name, MapProperties(
            step_preserving=single,
            non_increasing_support=zero_fixed,
            permutation_equivariant=single,
        ))

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        if self.single:
            return np.asarray(self.phis(arr), dtype=np.float64) * np.ones_like(arr)
        return np.array([float(np.asarray(f(np.asarray([v])))[0]) for f, v in zip(self.phis, arr)])

    def _denominator(self, value: float) -> float:
        if value < self.degenerate_tol:
            raise DegenerateDenominator(f"∑|φ_j(x_j)| = {value:.3g} 退化")
        return value

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        vals = self._apply(arr)
        return vals / self._denominator(math.fsum(np.abs(vals)))

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        seg = np.asarray(x.segments, dtype=np.float64)
        evens, odds = self._apply(seg[:, 2]), self._apply(seg[:, 3])
        terms = []
        for (lo, hi, _, _), fe, fo in zip(x.segments, evens, odds):
            n_even, n_odd = parity_counts(lo, hi)
            terms.extend((n_even * abs(fe), n_odd * abs(fo)))
        den = self._denominator(math.fsum(terms))
        return PcpVector(x.dim, tuple(
            (lo, hi, float(fe) / den, float(fo) / den) for (lo, hi, _, _), fe, fo in zip(x.segments, evens, odds)
        ))


def _integral_levels(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """
    升序的不同取值 v_l 及个数 c_l 上的积分值：
        F(v_l) = ∑_{l' ≤ l} (v_{l'} − v_{l'−1}) / #{j : x_j ≥ v_{l'}}，v_{−1} = 0
    """
    at_least = np.cumsum(counts[::-1])[::-1]
    lower = np.concatenate(([0.0], values[:-1]))
    return np.cumsum((values - lower) / at_least)


class IntegralHomeomorphism(SphereMap):
    """
    F_i(x) = ∫₀¹ 1_{[r,1]}(x_i) / ∑_j 1_{[r,1]}(x_j) dr，定义在正部 S⁺ 上

    被积函数关于 r 分段常数，按排序后的不同坐标值精确求和。
    """

    pcp_capable = True
    positive_domain = True

    def __init__(self, dim: int, sphere_tol: float = 1e-9):
        self.sphere_tol = sphere_tol
        super().__init__(dim, LrNorm(1.0), "integral", MapProperties(
            step_preserving=True,
            support_preserving=True,
            non_increasing_support=True,
            permutation_equivariant=True,
        ))

    def _check_input(self, x: Vector):
        super()._check_input(x)
        peak = self.domain_oracle.eval(x)
        if abs(peak - 1.0) > self.sphere_tol:
            raise NotOnSphere(f"{self.name} 要求 max x_i = 1，实际为 {peak!r}")

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        values, inverse, counts = np.unique(np.maximum(arr, 0.0), return_inverse=True, return_counts=True)
        return _integral_levels(values, counts)[inverse]

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        clipped = map_values(x, lambda a: np.maximum(a, 0.0))
        values, counts = value_counts(clipped)
        lookup = dict(zip(values.tolist(), _integral_levels(values, counts).tolist()))
        return PcpVector(x.dim, tuple(
            (lo, hi, lookup.get(ve, 0.0), lookup.get(vo, 0.0)) for lo, hi, ve, vo in clipped.segments
        ))

    def closed_form(self, x: Vector) -> Vector:
        """
        闭式 F(x)_j = ∑_{i≥j} (1/i)(x_i − x_{i+1})（对非增输入），一般输入先排序再还原

        非增 PcpVector 上逐段计算：段内只有段尾 hi 处的差非零。
        """
        self._check_input(x)
        if isinstance(x, PcpVector) and x.is_non_increasing():
            heights = [max(vo if lo % 2 else ve, 0.0) for lo, _, ve, vo in x.segments]
            nxt = heights[1:] + [0.0]
            terms = [(h - n) / hi for (_, hi, _, _), h, n in zip(x.segments, heights, nxt)]
            acc = np.cumsum(terms[::-1])[::-1]
            return PcpVector(x.dim, tuple(
                (lo, hi, float(v), float(v)) for (lo, hi, _, _), v in zip(x.segments, acc)
            ))
        arr = np.maximum(materialize(x).coords, 0.0)
        order = np.argsort(-arr, kind="stable")
        xs = arr[order]
        terms = (xs - np.append(xs[1:], 0.0)) / np.arange(1, xs.size + 1)
        out = np.empty_like(arr)
        out[order] = np.cumsum(terms[::-1])[::-1]
        return from_dense(out) if isinstance(x, PcpVector) else DenseVector(out)

    def reference(self, x: Vector) -> Vector:
        return self.closed_form(x)

    def inverse(self) -> "IntegralInverse":
        return IntegralInverse(self.dim)


class IntegralInverse(SphereMap):
    """F⁻¹(y)_j = j·y_j + ∑_{i>j} y_i（y 非增时），一般输入按置换等变扩展"""

    pcp_capable = True
    positive_domain = True

    def __init__(self, dim: int):
        super().__init__(dim, LinfNorm(), "integral-inverse", MapProperties(
            step_preserving=True,
            support_preserving=True,
            non_increasing_support=True,
            permutation_equivariant=True,
        ), domain_oracle=LrNorm(1.0))

    @staticmethod
    def _levels(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
        # 并列值取并列组中最后一个位置的闭式值
        at_least = np.cumsum(counts[::-1])[::-1]
        smaller = np.concatenate(([0.0], np.cumsum(values * counts)[:-1]))
        return at_least * values + smaller

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        values, inverse, counts = np.unique(np.maximum(arr, 0.0), return_inverse=True, return_counts=True)
        return self._levels(values, counts)[inverse]

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        clipped = map_values(x, lambda a: np.maximum(a, 0.0))
        values, counts = value_counts(clipped)
        lookup = dict(zip(values.tolist(), self._levels(values, counts).tolist()))
        return PcpVector(x.dim, tuple(
            (lo, hi, lookup.get(ve, 0.0), lookup.get(vo, 0.0)) for lo, hi, ve, vo in clipped.segments
        ))

    def reference(self, x: Vector) -> Vector:
        self._check_input(x)
        arr = np.maximum(materialize(x).coords, 0.0)
        order = np.argsort(-arr, kind="stable")
        ys = arr[order]
        tail = np.append(np.cumsum(ys[::-1])[::-1][1:], 0.0)
        out = np.empty_like(arr)
        out[order] = np.arange(1, ys.size + 1) * ys + tail
        return from_dense(out) if isinstance(x, PcpVector) else DenseVector(out)

    def inverse(self) -> IntegralHomeomorphism:
        return IntegralHomeomorphism(self.dim)


class MazurMap(SphereMap):
    """S_{ℓ_p} → S_{ℓ_q}：x ↦ sign(x)|x|^{p/q}"""

    pcp_capable = True

    def __init__(self, dim: int, source_p: float, target_q: float = 2.0, sphere_tol: float = 1e-12):
        self.source_p = float(source_p)
        self.target_q = float(target_q)
        self.sphere_tol = sphere_tol
        name = f"mazur:{source_p:g}" if target_q == 2.0 else f"mazur:{source_p:g}->{target_q:g}"
        super().__init__(dim, LrNorm(target_q), name, MapProperties(
            step_preserving=True,
            support_preserving=True,
            non_increasing_support=True,
            permutation_equivariant=True,
        ), domain_oracle=LrNorm(source_p))

    def _check_input(self, x: Vector):
        super()._check_input(x)
        norm = self.domain_oracle.eval(x)
        if abs(norm - 1.0) > self.sphere_tol:
            raise NotOnSphere(f"{self.name} 要求 ‖x‖_{self.source_p:g} = 1，实际为 {norm!r}")

    def _power(self, a: np.ndarray) -> np.ndarray:
        return np.sign(a) * np.abs(a) ** (self.source_p / self.target_q)

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return self._power(arr)

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        return map_values(x, self._power)

    def inverse(self) -> "MazurMap":
        return MazurMap(self.dim, self.target_q, self.source_p, self.sphere_tol)


class ConstantMap(SphereMap):
    """x ↦ 固定向量；默认是均匀向量 1_{[1,k]} / ψ(k)"""

    pcp_capable = True

    def __init__(self, dim: int, oracle: NormOracle, target: Optional[DenseVector] = None):
        if target is None:
            value = 1.0 / oracle.fundamental(dim)
            self.target = PcpVector.constant(dim, value)
            name = "const-uniform"
        else:
            self.target = from_dense(target)
            name = "const"
        # 常向量在每个取值类上都相同
        uniform = len(self.target.segments) == 1 and self.target.segments[0][2] == self.target.segments[0][3]
        super().__init__(dim, oracle, name, MapProperties(
            step_preserving=uniform,
            permutation_equivariant=uniform,
        ))

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return materialize(self.target).coords.copy()

    def _eval_pcp(self, x: PcpVector) -> PcpVector:
        return self.target


class FunctionMap(SphereMap):
    """用任意稠密函数构造映射（测试夹具与用户扩展）"""

    def __init__(self, dim: int, func: Callable[[np.ndarray], np.ndarray], target_oracle: NormOracle,
                 name: str = "function", props: Optional[MapProperties] = None,
                 positive_domain: bool = False):
        self.func = func
        self.positive_domain = positive_domain
        super().__init__(dim, target_oracle, name, props or MapProperties())

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(arr), dtype=np.float64)


# ========== 包装器 ==========

class AbsWrapper(SphereMap):
    """F̃(x) = (|F_1(x)|, …, |F_k(x)|)"""

    def __init__(self, inner: SphereMap):
        self.inner = inner
        self.pcp_capable = inner.pcp_capable
        self.positive_domain = inner.positive_domain
        props = inner.props
        super().__init__(inner.dim, inner.target_oracle, f"abs+{inner.name}", MapProperties(
            step_preserving=props.step_preserving,
            support_preserving=props.support_preserving,
            non_increasing_support=props.non_increasing_support,
            permutation_equivariant=props.permutation_equivariant,
            continuous=props.continuous,
        ), domain_oracle=inner.domain_oracle)

    def __call__(self, x: Vector) -> Vector:
        return map_values(self.inner(x), np.abs)

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return np.abs(self.inner(DenseVector(arr)).coords)

    def reference(self, x: Vector) -> Vector:
        return map_values(self.inner.reference(x), np.abs)


class Symmetrized(SphereMap):
    """
    G = (1/|Π|) ∑_{π∈Π} P_{π⁻¹} ∘ F ∘ P_π，P_π(x)_j = x_{π(j)}

    exact 模式 Π 为全部 k! 个置换；sampled 模式为构造时由种子生成的固定置换组，
    结果再按 ℓ₁ 重新归一化。
    """

    def __init__(self, inner: SphereMap, mode: str = "exact", samples: int = 100,
                 seed: int = 0, exact_max_k: Optional[int] = None, facet_tol: float = 1e-9):
        k = inner.dim
        limit = _DEFAULTS.exact_symmetrize_max_k if exact_max_k is None else exact_max_k
        if mode == "exact":
            if k > limit:
                raise KTooLargeForExact(f"精确对称化需要 {k}! 项，维数上限为 {limit}")
            perms = np.array(list(itertools.permutations(range(k))), dtype=np.int64)
            name = f"sym(exact)+{inner.name}"
        elif mode == "sampled":
            rng = np.random.default_rng(seed)
            perms = np.array([rng.permutation(k) for _ in range(samples)], dtype=np.int64)
            name = f"sym({samples},{seed})+{inner.name}"
        else:
            raise SphereLabError(f"未知的对称化模式: {mode}")

        self.inner = inner
        self.mode = mode
        self.samples = samples
        self.seed = seed
        self.facet_tol = facet_tol
        self.permutations = perms
        self.positive_domain = inner.positive_domain
        props = inner.props
        exact = mode == "exact"
        super().__init__(k, LrNorm(1.0), name, MapProperties(
            step_preserving=exact or props.step_preserving,
            support_preserving=props.support_preserving,
            non_increasing_support=props.non_increasing_support,
            permutation_equivariant=exact,
            continuous=props.continuous,
        ), domain_oracle=inner.domain_oracle)

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        acc = np.zeros(self.dim)
        for perm in self.permutations:
            y = self.inner(DenseVector(arr[perm])).coords
            if y.min() < -self.facet_tol or abs(math.fsum(y) - 1.0) > self.facet_tol:
                raise TargetNotPositiveFacet(f"{self.inner.name} 的像不在 S⁺_{{ℓ₁}} 中")
            acc[perm] += y
        out = acc / len(self.permutations)
        if self.mode == "sampled":
            out = out / math.fsum(out)
        return out

    def describe(self) -> Dict[str, object]:
        info = super().describe()
        info.update({"mode": self.mode, "permutations": len(self.permutations)})
        if self.mode == "sampled":
            info.update({"samples": self.samples, "seed": self.seed})
        return info


class ComposedMap(SphereMap):
    """outer ∘ inner"""

    def __init__(self, outer: SphereMap, inner: SphereMap):
        if outer.dim != inner.dim:
            raise DimMismatch(f"复合映射维数不一致: {outer.dim} vs {inner.dim}")
        self.outer, self.inner = outer, inner
        self.pcp_capable = outer.pcp_capable and inner.pcp_capable
        self.positive_domain = inner.positive_domain
        po, pi = outer.props, inner.props
        super().__init__(inner.dim, outer.target_oracle, f"{outer.name}∘{inner.name}", MapProperties(
            step_preserving=po.step_preserving and pi.step_preserving,
            support_preserving=po.support_preserving and pi.support_preserving,
            non_increasing_support=po.non_increasing_support and pi.non_increasing_support,
            permutation_equivariant=po.permutation_equivariant and pi.permutation_equivariant,
            continuous=po.continuous and pi.continuous,
        ), domain_oracle=inner.domain_oracle)

    def __call__(self, x: Vector) -> Vector:
        return self.outer(self.inner(x))

    def _eval_dense(self, arr: np.ndarray) -> np.ndarray:
        return materialize(self(DenseVector(arr))).coords


# ========== 工厂函数 ==========

def normalize_map(k: int, oracle: NormOracle) -> NormalizeMap:
    return NormalizeMap(k, oracle)


def phi_map(k: int, phis: Union[Callable, Sequence[Callable]], name: str = "phi") -> PhiMap:
    return PhiMap(k, phis, name)


def integral_homeo(k: int) -> IntegralHomeomorphism:
    return IntegralHomeomorphism(k)


def integral_homeo_inverse(k: int) -> IntegralInverse:
    return IntegralInverse(k)


def mazur_map(p: float, k: int, target_q: float = 2.0) -> MazurMap:
    return MazurMap(k, p, target_q)


def constant_map(k: int, oracle: NormOracle) -> ConstantMap:
    return ConstantMap(k, oracle)


def abs_wrapper(F: SphereMap) -> AbsWrapper:
    return AbsWrapper(F)


def symmetrize(F: SphereMap, mode: str = "exact", samples: int = 100, seed: int = 0) -> Symmetrized:
    return Symmetrized(F, mode=mode, samples=samples, seed=seed)


def compose(outer: SphereMap, inner: SphereMap) -> ComposedMap:
    return ComposedMap(outer, inner)


# ========== 采样 ==========

def sample_sphere_points(k: int, count: int, rng: Union[int, np.random.Generator] = 0,
                         positive: bool = False, levels: int = 4,
                         zero_prob: float = 0.2) -> List[DenseVector]:
    """
    S_{ℓ∞ᵏ}（或正部）上的随机点，坐标取自少数几个水平以制造相等坐标

    每个点除以 max|x_i|，因此最大坐标恰为 ±1。
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    points = []
    for _ in range(count):
        pool = rng.uniform(-1.0, 1.0, size=levels)
        pool[rng.random(levels) < zero_prob] = 0.0
        pool[0] = rng.choice([-1.0, 1.0])
        x = pool[rng.integers(levels, size=k)]
        if not np.any(x):
            x[rng.integers(k)] = pool[0]
        if positive:
            x = np.abs(x)
        points.append(DenseVector(x / np.max(np.abs(x))))
    return points


# ========== 性质检查器 ==========

def step_spread(x: Vector, y: Vector, coord_tol: Optional[float] = None) -> Tuple[float, float]:
    """按输入坐标值聚类（相邻差 ≤ coord_tol），返回输出在同一类内的最大极差及该类的输入值"""
    coord_tol = _DEFAULTS.coord_tol if coord_tol is None else coord_tol
    xs, ys = value_pairs(x, y)
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(xs) > coord_tol) + 1))
    spreads = np.maximum.reduceat(ys, starts) - np.minimum.reduceat(ys, starts)
    worst = int(np.argmax(spreads))
    return float(spreads[worst]), float(xs[starts[worst]])


def check_step_preserving(F: SphereMap, samples: Sequence[Vector], tol: Optional[float] = None,
                          coord_tol: Optional[float] = None) -> InequalityReport:
    """x_i = x_j（容差 coord_tol）时要求 |F_i(x) − F_j(x)| ≤ tol"""
    tol = _DEFAULTS.output_tol if tol is None else tol
    coord_tol = _DEFAULTS.coord_tol if coord_tol is None else coord_tol
    worst = 0.0
    first = None
    for i, x in enumerate(samples):
        spread, level = step_spread(x, F(x), coord_tol)
        worst = max(worst, spread)
        if first is None and spread > tol:
            first = {"sample": i, "input_value": level, "spread": spread}
            logger.warning(f"保步性质违反: {F.name} 第 {i} 个样本在输入值 {level:.6g} 处输出极差 {spread:.3g}")

    return InequalityReport.from_comparison(
        "step_preserving", worst, tol, "le",
        inputs={"map": F.name, "k": F.dim, "samples": len(samples), "coord_tol": coord_tol},
        notes={"first_violation": first},
    )


def check_support_preserving(F: SphereMap, samples: Sequence[Vector], tol: Optional[float] = None,
                             support_tol: Optional[float] = None) -> InequalityReport:
    """supp(F(x)) = supp(x)"""
    tol = _DEFAULTS.output_tol if tol is None else tol
    support_tol = _DEFAULTS.support_tol if support_tol is None else support_tol
    violations = 0
    first = None
    for i, x in enumerate(samples):
        y = F(x)
        if not same_support(x, y, support_tol, tol):
            violations += 1
            if first is None:
                first = {"sample": i, "input_support": support_size(x, support_tol),
                         "output_support": support_size(y, tol)}
                logger.warning(f"保支撑性质违反: {F.name} 第 {i} 个样本 {first}")

    return InequalityReport.from_comparison(
        "support_preserving", violations, 0, "le",
        inputs={"map": F.name, "k": F.dim, "samples": len(samples)},
        notes={"first_violation": first},
    )


def check_non_increasing_support(F: SphereMap, samples: Sequence[Vector], tol: Optional[float] = None,
                                 support_tol: Optional[float] = None) -> InequalityReport:
    """|supp(F(x))| ≤ |supp(x)|"""
    tol = _DEFAULTS.output_tol if tol is None else tol
    support_tol = _DEFAULTS.support_tol if support_tol is None else support_tol
    worst = -math.inf
    first = None
    for i, x in enumerate(samples):
        excess = support_size(F(x), tol) - support_size(x, support_tol)
        worst = max(worst, excess)
        if first is None and excess > 0:
            first = {"sample": i, "excess": excess}
            logger.warning(f"支撑增大: {F.name} 第 {i} 个样本支撑多出 {excess} 个坐标")

    return InequalityReport.from_comparison(
        "non_increasing_support", worst if samples else 0, 0, "le",
        inputs={"map": F.name, "k": F.dim, "samples": len(samples)},
        notes={"first_violation": first},
    )


def check_sphere_image(F: SphereMap, samples: Sequence[Vector], tol: float = 1e-9) -> InequalityReport:
    """|‖F(x)‖_X − 1| ≤ tol"""
    worst = max(abs(F.target_oracle.eval(F(x)) - 1.0) for x in samples)
    return InequalityReport.from_comparison(
        "sphere_image", worst, tol, "le",
        inputs={"map": F.name, "k": F.dim, "samples": len(samples), "target": F.target_oracle.name},
    )


def check_equivariance_implies_step(F: SphereMap, trials: int = 100, seed: int = 0,
                                    tol: Optional[float] = None) -> InequalityReport:
    """
    在随机对换上检验等变性 F(P x) = P F(x)，并在同一批样本上检验保步性。
    等变通过而保步失败说明实现有误，记为矛盾。
    """
    tol = _DEFAULTS.output_tol if tol is None else tol
    if F.dim < 2:
        raise SphereLabError("等变性检验需要 k ≥ 2")
    rng = np.random.default_rng(seed)
    samples = sample_sphere_points(F.dim, trials, rng, positive=F.positive_domain)

    eq_failures = step_failures = 0
    worst_eq = worst_step = 0.0
    first_eq = None
    for i, x in enumerate(samples):
        a, b = rng.choice(F.dim, size=2, replace=False)
        perm = np.arange(F.dim)
        perm[[a, b]] = perm[[b, a]]
        fx = F(x)
        error = sup_distance(F(DenseVector(x.coords[perm])), DenseVector(materialize(fx).coords[perm]))
        spread = step_spread(x, fx, _DEFAULTS.coord_tol)[0]
        worst_eq, worst_step = max(worst_eq, error), max(worst_step, spread)
        if error > tol:
            eq_failures += 1
            if first_eq is None:
                first_eq = {"sample": i, "transposition": [int(a) + 1, int(b) + 1], "error": error}
        if spread > tol:
            step_failures += 1

    contradiction = eq_failures == 0 and step_failures > 0
    if contradiction:
        logger.error(f"{F.name}: 等变性通过但保步性失败，与等变蕴含保步矛盾")
    elif eq_failures:
        logger.warning(f"{F.name}: {eq_failures}/{trials} 个对换上等变性失败")

    verdict = Verdict.PASS if eq_failures == 0 and step_failures == 0 else Verdict.FAIL
    return InequalityReport(
        checker="equivariance_implies_step",
        inputs={"map": F.name, "k": F.dim, "trials": trials, "seed": seed},
        hypothesis_values={
            "equivariance_failures": eq_failures,
            "step_failures": step_failures,
            "max_step_spread": worst_step,
        },
        conclusion_value=worst_eq,
        threshold=tol,
        direction="le",
        margin=tol - worst_eq,
        verdict=verdict,
        notes={"contradiction": contradiction, "first_equivariance_violation": first_eq},
    )


def check_roundtrip(F: SphereMap, G: SphereMap, samples: Sequence[Vector], tol: float = 1e-10,
                    checker: str = "roundtrip") -> InequalityReport:
    """max ‖G(F(x)) − x‖，距离取 F 的定义域范数"""
    worst = 0.0
    first = None
    for i, x in enumerate(samples):
        error = F.domain_oracle.eval(subtract(G(F(x)), x))
        if error > worst:
            worst = error
        if first is None and error > tol:
            first = {"sample": i, "error": error}
            logger.warning(f"往返误差过大: {G.name}∘{F.name} 第 {i} 个样本误差 {error:.3g}")

    return InequalityReport.from_comparison(
        checker, worst, tol, "le",
        inputs={"map": f"{G.name}∘{F.name}", "oracle": F.domain_oracle.name, "k": F.dim,
                "samples": len(samples)},
        notes={"first_violation": first},
    )


def check_reference_agreement(F: SphereMap, samples: Sequence[Vector], tol: float = 1e-12) -> InequalityReport:
    """主求值路径与独立参考路径的最大坐标差"""
    worst = max((sup_distance(F(x), F.reference(x)) for x in samples), default=0.0)
    return InequalityReport.from_comparison(
        "reference_agreement", worst, tol, "le",
        inputs={"map": F.name, "oracle": F.target_oracle.name, "k": F.dim, "samples": len(samples)},
    )
