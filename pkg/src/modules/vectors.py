"""
向量模块 - 稠密向量与分段常数奇偶向量（PcpVector）的精确运算

PcpVector 把 {1..k} 切成若干段 [lo, hi]，段内偶数下标取 val_even、奇数下标取 val_odd。
所有见证向量（阶梯 z、x(m̄,u,k)、y(m̄)）在划分 P = 偶数集 下都能用少量段精确表示，
因此 k 可以达到 10⁸ 量级而无需物化。
"""
import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import LabConfig
from ..models.errors import DimensionTooLarge, DimMismatch, SphereLabError

logger = logging.getLogger(__name__)

_DEFAULTS = LabConfig()

Segment = Tuple[int, int, float, float]  # (lo, hi, val_even, val_odd)


def parity_counts(lo: int, hi: int) -> Tuple[int, int]:
    """[lo, hi] 中偶数下标与奇数下标的个数"""
    if hi < lo:
        return 0, 0
    n_even = hi // 2 - (lo - 1) // 2
    return n_even, (hi - lo + 1) - n_even


# ========== 向量类型 ==========

@dataclass(frozen=True, eq=False)
class DenseVector:
    """稠密向量，坐标为 float64 只读数组"""
    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise SphereLabError(f"稠密向量必须是非空一维数组，实际形状 {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise SphereLabError("稠密向量包含 NaN 或 inf")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def to_json(self) -> List[float]:
        return self.coords.tolist()

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "DenseVector":
        return cls(np.asarray(data, dtype=np.float64))


@dataclass(frozen=True)
class PcpVector:
    """
    分段常数奇偶向量

    构造时总是规范化：规范形式只依赖坐标语义，
    因此物化后重新编码得到完全相同的段列表。
    """
    dim: int
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise SphereLabError(f"维数必须为正整数，实际为 {self.dim}")
        segs = tuple((int(lo), int(hi), float(ve), float(vo)) for lo, hi, ve, vo in self.segments)
        _validate_cover(dim, segs)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "segments", _canonical_segments(dim, segs))

    @classmethod
    def constant(cls, dim: int, value: float) -> "PcpVector":
        return cls(dim, ((1, dim, value, value),))

    @classmethod
    def basis(cls, dim: int, index: int) -> "PcpVector":
        """标准基向量 e_index"""
        if not 1 <= index <= dim:
            raise SphereLabError(f"下标 {index} 超出 [1, {dim}]")
        segs = []
        if index > 1:
            segs.append((1, index - 1, 0.0, 0.0))
        segs.append((index, index, 1.0, 1.0))
        if index < dim:
            segs.append((index + 1, dim, 0.0, 0.0))
        return cls(dim, tuple(segs))

    def value_at(self, index: int) -> float:
        """第 index 个坐标（1 起）"""
        if not 1 <= index <= self.dim:
            raise SphereLabError(f"下标 {index} 超出 [1, {self.dim}]")
        return _value_at(self.segments, [s[0] for s in self.segments], index)

    def is_non_increasing(self) -> bool:
        values = []
        for lo, hi, ve, vo in self.segments:
            if lo < hi and ve != vo:
                return False
            values.append(vo if lo % 2 else ve)
        return all(x >= y for x, y in zip(values, values[1:]))

    def to_json(self) -> Dict:
        return {"dim": self.dim, "segments": [list(s) for s in self.segments]}

    @classmethod
    def from_json(cls, data: Dict) -> "PcpVector":
        return cls(int(data["dim"]), tuple(tuple(s) for s in data["segments"]))


Vector = Union[DenseVector, PcpVector]


@dataclass(frozen=True, eq=False)
class SupportSet:
    """支撑集，members 为 1 起的升序下标"""
    dim: int
    members: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.members, dtype=np.int64)
        if arr.size and (arr[0] < 1 or arr[-1] > self.dim or np.any(np.diff(arr) <= 0)):
            raise SphereLabError(f"支撑集必须是 [1, {self.dim}] 中严格递增的下标")
        arr.setflags(write=False)
        object.__setattr__(self, "members", arr)

    @classmethod
    def from_indices(cls, dim: int, indices: Sequence[int]) -> "SupportSet":
        return cls(dim, np.unique(np.asarray(list(indices), dtype=np.int64)))

    @property
    def size(self) -> int:
        return int(self.members.size)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, index: int) -> bool:
        pos = np.searchsorted(self.members, index)
        return bool(pos < self.members.size and self.members[pos] == index)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportSet):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.members, other.members)

    __hash__ = None

    def to_list(self) -> List[int]:
        return self.members.tolist()


# ========== 规范化 ==========

def _validate_cover(dim: int, segs: Sequence[Segment]):
    expected = 1
    for lo, hi, ve, vo in segs:
        if lo != expected or hi < lo:
            raise SphereLabError(f"段必须有序、不相交并恰好覆盖 [1, {dim}]，在 {expected} 处出错")
        if not (np.isfinite(ve) and np.isfinite(vo)):
            raise SphereLabError(f"段 [{lo}, {hi}] 含非有限值")
        expected = hi + 1
    if expected != dim + 1:
        raise SphereLabError(f"段没有覆盖到 {dim}，止于 {expected - 1}")


def _value_at(segs: Sequence[Segment], los: List[int], index: int) -> float:
    lo, hi, ve, vo = segs[bisect_right(los, index) - 1]
    return ve if index % 2 == 0 else vo


def _first_mismatch(segs: Sequence[Segment], los: List[int], start: int,
                    ve: float, vo: float, dim: int) -> int:
    """从 start 起第一个与奇偶模式 (ve, vo) 不符的下标；全部相符返回 dim + 1"""
    idx = bisect_right(los, start) - 1
    while idx < len(segs):
        lo, hi, se, so = segs[idx]
        pos = max(lo, start)
        bad_even, bad_odd = se != ve, so != vo
        if bad_even or bad_odd:
            if (pos % 2 == 0 and bad_even) or (pos % 2 == 1 and bad_odd):
                return pos
            if pos + 1 <= hi:
                return pos + 1
        idx += 1
    return dim + 1


def _canonical_segments(dim: int, segs: Sequence[Segment]) -> Tuple[Segment, ...]:
    """
    贪心规范编码：在位置 i 取 (x_i, x_{i+1}) 作为奇偶模式并尽量延伸。
    模式为常数或能覆盖至少 3 个下标时输出整段，否则输出单点段。
    """
    los = [s[0] for s in segs]
    out: List[Segment] = []
    i = 1
    while i <= dim:
        xi = _value_at(segs, los, i) + 0.0
        if i == dim:
            out.append((i, i, xi, xi))
            break
        xn = _value_at(segs, los, i + 1) + 0.0
        ve, vo = (xi, xn) if i % 2 == 0 else (xn, xi)
        j = _first_mismatch(segs, los, i, ve, vo, dim)
        if xi == xn or j - i >= 3:
            out.append((i, j - 1, ve, vo))
            i = j
        else:
            out.append((i, i, xi, xi))
            i += 1
    return tuple(out)


# ========== 表示转换 ==========

def materialize(v: Vector, dense_limit: Optional[int] = None) -> DenseVector:
    """PcpVector → DenseVector（维数不超过稠密上限）"""
    if isinstance(v, DenseVector):
        return v
    limit = _DEFAULTS.dense_limit if dense_limit is None else dense_limit
    if v.dim > limit:
        raise DimensionTooLarge(f"维数 {v.dim} 超过稠密上限 {limit}")
    out = np.empty(v.dim, dtype=np.float64)
    for lo, hi, ve, vo in v.segments:
        out[lo - 1:hi] = vo
        first_even = lo if lo % 2 == 0 else lo + 1
        out[first_even - 1:hi:2] = ve
    return DenseVector(out)


def from_dense(x: Union[DenseVector, np.ndarray, Sequence[float]]) -> PcpVector:
    """DenseVector → 规范 PcpVector（先压缩常数游程再规范化）"""
    arr = x.coords if isinstance(x, DenseVector) else np.asarray(x, dtype=np.float64)
    n = arr.size
    change = np.flatnonzero(arr[1:] != arr[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [n])) - 1
    segs = tuple((int(s) + 1, int(e) + 1, float(arr[s]), float(arr[s])) for s, e in zip(starts, ends))
    return PcpVector(n, segs)


def vector_from_json(data) -> Vector:
    """JSON 对象为 PcpVector，JSON 数组为 DenseVector"""
    if isinstance(data, dict):
        return PcpVector.from_json(data)
    return DenseVector.from_json(data)


def check_same_dim(u: Vector, v: Vector):
    if u.dim != v.dim:
        raise DimMismatch(f"维数不一致: {u.dim} vs {v.dim}")


# ========== 逐段运算 ==========

def joint_pieces(u: PcpVector, v: PcpVector) -> Iterator[Tuple[int, int, float, float, float, float]]:
    """两个 PcpVector 的公共加细：依次给出 (lo, hi, u_even, u_odd, v_even, v_odd)"""
    check_same_dim(u, v)
    su, sv = u.segments, v.segments
    i = j = 0
    pos = 1
    while pos <= u.dim:
        _, hi_u, ue, uo = su[i]
        _, hi_v, ve, vo = sv[j]
        hi = min(hi_u, hi_v)
        yield pos, hi, ue, uo, ve, vo
        pos = hi + 1
        if hi == hi_u:
            i += 1
        if hi == hi_v:
            j += 1


def map_values(v: Vector, fn: Callable[[np.ndarray], np.ndarray]) -> Vector:
    """逐坐标作用 fn（fn 接受 numpy 数组）"""
    if isinstance(v, DenseVector):
        return DenseVector(np.asarray(fn(v.coords), dtype=np.float64))
    seg = np.asarray(v.segments, dtype=np.float64)
    evens = np.asarray(fn(seg[:, 2]), dtype=np.float64)
    odds = np.asarray(fn(seg[:, 3]), dtype=np.float64)
    return PcpVector(v.dim, tuple(
        (lo, hi, float(e), float(o)) for (lo, hi, _, _), e, o in zip(v.segments, evens, odds)
    ))


def combine(u: Vector, v: Vector, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Vector:
    """逐坐标二元运算；任一方为稠密时在稠密表示上计算"""
    check_same_dim(u, v)
    if isinstance(u, DenseVector) or isinstance(v, DenseVector):
        return DenseVector(fn(materialize(u).coords, materialize(v).coords))
    pieces = list(joint_pieces(u, v))
    arr = np.asarray(pieces, dtype=np.float64)
    evens = np.asarray(fn(arr[:, 2], arr[:, 4]), dtype=np.float64)
    odds = np.asarray(fn(arr[:, 3], arr[:, 5]), dtype=np.float64)
    return PcpVector(u.dim, tuple(
        (p[0], p[1], float(e), float(o)) for p, e, o in zip(pieces, evens, odds)
    ))


def subtract(u: Vector, v: Vector) -> Vector:
    return combine(u, v, np.subtract)


def scale(v: Vector, factor: float) -> Vector:
    return map_values(v, lambda a: a * factor)


def restrict(v: Vector, lo: int, hi: int) -> Vector:
    """保留 [lo, hi] 上的坐标，其余置零"""
    if isinstance(v, DenseVector):
        out = np.zeros(v.dim)
        out[lo - 1:hi] = v.coords[lo - 1:hi]
        return DenseVector(out)
    window = [(1, v.dim, 0.0, 0.0)] if lo > hi else [
        s for s in ((1, lo - 1, 0.0, 0.0), (lo, hi, 1.0, 1.0), (hi + 1, v.dim, 0.0, 0.0)) if s[0] <= s[1]
    ]
    return combine(v, PcpVector(v.dim, tuple(window)), np.multiply)


def value_counts(v: Vector) -> Tuple[np.ndarray, np.ndarray]:
    """不同坐标值（升序）及其出现次数"""
    if isinstance(v, DenseVector):
        values, counts = np.unique(v.coords, return_counts=True)
        return values, counts.astype(np.int64)
    tally: Dict[float, int] = {}
    for lo, hi, ve, vo in v.segments:
        n_even, n_odd = parity_counts(lo, hi)
        if n_even:
            tally[ve] = tally.get(ve, 0) + n_even
        if n_odd:
            tally[vo] = tally.get(vo, 0) + n_odd
    values = np.array(sorted(tally), dtype=np.float64)
    counts = np.array([tally[val] for val in sorted(tally)], dtype=np.int64)
    return values, counts


def value_pairs(x: Vector, y: Vector) -> Tuple[np.ndarray, np.ndarray]:
    """
    (x_i, y_i) 的取值对集合：稠密时逐坐标，分段时每个公共段的每种奇偶各一对。
    供保步检查使用，不丢失任何取值组合。
    """
    check_same_dim(x, y)
    if isinstance(x, DenseVector) or isinstance(y, DenseVector):
        return materialize(x).coords, materialize(y).coords
    xs, ys = [], []
    for lo, hi, xe, xo, ye, yo in joint_pieces(x, y):
        n_even, n_odd = parity_counts(lo, hi)
        if n_even:
            xs.append(xe)
            ys.append(ye)
        if n_odd:
            xs.append(xo)
            ys.append(yo)
    return np.asarray(xs), np.asarray(ys)


def sup_norm(v: Vector) -> float:
    if isinstance(v, DenseVector):
        return float(np.max(np.abs(v.coords)))
    values, _ = value_counts(v)
    return float(np.max(np.abs(values)))


def sup_distance(u: Vector, v: Vector) -> float:
    """max_i |u_i − v_i|，两者均为 PcpVector 时逐段计算、不物化"""
    check_same_dim(u, v)
    if isinstance(u, DenseVector) or isinstance(v, DenseVector):
        return float(np.max(np.abs(materialize(u).coords - materialize(v).coords)))
    best = 0.0
    for lo, hi, ue, uo, ve, vo in joint_pieces(u, v):
        n_even, n_odd = parity_counts(lo, hi)
        if n_even:
            best = max(best, abs(ue - ve))
        if n_odd:
            best = max(best, abs(uo - vo))
    return best


def is_nonnegative(v: Vector, tol: float = 0.0) -> bool:
    if isinstance(v, DenseVector):
        return bool(np.all(v.coords >= -tol))
    values, _ = value_counts(v)
    return bool(values[0] >= -tol)


# ========== 支撑 ==========

def support(v: Vector, tol: float = 0.0, dense_limit: Optional[int] = None) -> SupportSet:
    """{i : |v_i| > tol}"""
    if tol < 0:
        raise SphereLabError("支撑阈值必须非负")
    if isinstance(v, DenseVector):
        return SupportSet(v.dim, np.flatnonzero(np.abs(v.coords) > tol) + 1)
    limit = _DEFAULTS.dense_limit if dense_limit is None else dense_limit
    if v.dim > limit:
        raise DimensionTooLarge(f"维数 {v.dim} 超过稠密上限 {limit}，请使用 support_size")
    parts = []
    for lo, hi, ve, vo in v.segments:
        keep_even, keep_odd = abs(ve) > tol, abs(vo) > tol
        if keep_even and keep_odd:
            parts.append(np.arange(lo, hi + 1))
        elif keep_even:
            parts.append(np.arange(lo + lo % 2, hi + 1, 2))
        elif keep_odd:
            parts.append(np.arange(lo + (1 - lo % 2), hi + 1, 2))
    members = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return SupportSet(v.dim, members)


def support_size(v: Vector, tol: float = 0.0) -> int:
    """|supp(v)|，分段时按奇偶计数闭式求得"""
    if isinstance(v, DenseVector):
        return int(np.count_nonzero(np.abs(v.coords) > tol))
    total = 0
    for lo, hi, ve, vo in v.segments:
        n_even, n_odd = parity_counts(lo, hi)
        total += n_even * (abs(ve) > tol) + n_odd * (abs(vo) > tol)
    return total


def same_support(x: Vector, y: Vector, tol_x: float = 0.0, tol_y: float = 0.0) -> bool:
    """supp(x) 与 supp(y) 是否相同（各自使用自己的阈值）"""
    check_same_dim(x, y)
    mask_x = map_values(x, lambda a: (np.abs(a) > tol_x).astype(np.float64))
    mask_y = map_values(y, lambda a: (np.abs(a) > tol_y).astype(np.float64))
    if isinstance(mask_x, PcpVector) and isinstance(mask_y, PcpVector):
        return mask_x.segments == mask_y.segments
    return bool(np.array_equal(materialize(mask_x).coords, materialize(mask_y).coords))
