"""
分析模块 - 不等式检查器与定理流水线

包括：
- 模连续性 ω_F(t) 的下界估计（见证族 + 带种子的随机点对）
- 块范数蕴含检查与随机扫描
- 交错见证对的分离检查（附 α_s、β_s、γ 读数）
- 支撑保持映射与保步连续映射的 ω_F(1/d) ≥ 1/2 流水线
- 正部上的集中检查及局部 Q 证书
- ℓ₁ 归一化映射族的发散表
"""
import logging
import math
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import LabConfig
from ..models.entities import InequalityReport, InterlacedPair, ModulusEstimate, Profile, Verdict
from ..models.errors import (
    BadTuple, DegenerateDenominator, DimMismatch, HypothesisViolated, NotEnoughElements,
    NotInPositivePart, NotOnSphere, SphereLabError,
)
from .maps import SphereMap, abs_wrapper, sample_sphere_points, step_spread, symmetrize
from .norms import EVENS, LrNorm, NormOracle, partition_norms
from .vectors import (
    DenseVector, PcpVector, Vector, is_nonnegative, restrict, same_support, subtract,
    sup_distance, sup_norm,
)
from .witnesses import (
    CONCENTRATION, SEPARATION, GrowthSet, Partition, build_growth_set,
    build_growth_set_covering, coordinate, enumerate_interlaced, find_tail_zero, greedy_partition, path_phi,
    staircase_z, witness_x, witness_y,
)

logger = logging.getLogger(__name__)

_DEFAULTS = LabConfig()

# 点对来源：(k, t) → 若干 (x, y, 标签)
PairSource = Callable[[int, float], Iterable[Tuple[Vector, Vector, str]]]
MapFactory = Callable[[int], SphereMap]

# 交叉校验允许的距离差
CROSS_CHECK_TOL = 1e-9


# ========== 点对来源 ==========

def divergence_point(k: int, delta: float) -> PcpVector:
    """x(k,δ) = e₁ + δ·∑_{i≥2} e_i"""
    if k < 2:
        raise SphereLabError(f"发散点需要 k ≥ 2，实际为 {k}")
    return PcpVector(k, ((1, 1, 1.0, 1.0), (2, k, delta, delta)))


def divergence_pairs(deltas: Sequence[float]) -> PairSource:
    """(e₁, x(k,δ))，定义域距离为 δ"""
    def source(k: int, t: float) -> Iterator[Tuple[Vector, Vector, str]]:
        for delta in deltas:
            yield PcpVector.basis(k, 1), divergence_point(k, delta), f"divergence(δ={delta:g})"
    return source


def staircase_pairs(oracle: NormOracle, d: int, eps: float = 0.5, family: str = "z",
                    partition: Optional[Partition] = None, variant: str = SEPARATION,
                    mode: str = "exhaustive") -> PairSource:
    """增长集上的交错阶梯对 (z(m̄), z(n̄)) 或 (y(m̄), y(n̄))，定义域距离为 1/d"""
    partition = partition or Partition.evens()

    def source(k: int, t: float) -> Iterator[Tuple[Vector, Vector, str]]:
        growth = build_growth_set_covering(oracle, partition, d, eps, k, variant=variant)
        try:
            pairs = enumerate_interlaced(growth, d, k, mode=mode)
        except NotEnoughElements as e:
            logger.debug(f"阶梯点对跳过: {e}")
            return
        for pair in pairs:
            if family == "z":
                yield staircase_z(pair.m, k), staircase_z(pair.n, k), f"staircase{pair.m}|{pair.n}"
            else:
                yield witness_y(pair.m, k, partition), witness_y(pair.n, k, partition), f"y{pair.m}|{pair.n}"
    return source


def random_staircase_pairs(d: int, count: int, seed: int) -> PairSource:
    """随机交错元组上的阶梯对（不要求来自增长集）"""
    def source(k: int, t: float) -> Iterator[Tuple[Vector, Vector, str]]:
        if k - 1 < 2 * d:
            return
        rng = np.random.default_rng(seed)
        for _ in range(count):
            cuts = np.sort(rng.choice(k - 1, size=2 * d, replace=False)) + 1
            m, n = tuple(int(v) for v in cuts[0::2]), tuple(int(v) for v in cuts[1::2])
            yield staircase_z(m, k), staircase_z(n, k), f"random-staircase{m}|{n}"
    return source


def random_pairs(count: int, seed: int, positive: bool = False) -> PairSource:
    """
    随机点 x 及其扰动 y = clip(x + U(−t, t))，并恢复 x 的峰值坐标，
    因此 y 仍在球面上且 ‖x − y‖_∞ ≤ t
    """
    def source(k: int, t: float) -> Iterator[Tuple[Vector, Vector, str]]:
        if k > _DEFAULTS.dense_limit:
            logger.debug(f"随机点对跳过: k={k} 超过稠密上限")
            return
        rng = np.random.default_rng(seed)
        lower = 0.0 if positive else -1.0
        for i, x in enumerate(sample_sphere_points(k, count, rng, positive=positive)):
            y = np.clip(x.coords + rng.uniform(-t, t, size=k), lower, 1.0)
            peak = int(np.argmax(np.abs(x.coords)))
            y[peak] = x.coords[peak]
            yield x, DenseVector(y), f"random#{i}"
    return source


# ========== 模连续性 ==========

def modulus_lower_bound(F: SphereMap, t: float, pair_sources: Sequence[PairSource],
                        slack: float = 1e-12) -> ModulusEstimate:
    """
    ω_F(t) 的下界：所有定义域距离 ≤ t 的候选点对上像距离的最大值。
    只是下界，永远不作为 ω_F(t) 本身报告。
    """
    if t <= 0:
        raise SphereLabError(f"t 必须为正数，实际为 {t}")
    estimate = ModulusEstimate(map_name=F.name, t=t)
    for source in pair_sources:
        for x, y, label in source(F.dim, t):
            estimate.pairs_tried += 1
            distance = sup_distance(x, y)
            if distance > t + slack:
                estimate.pairs_skipped += 1
                continue
            try:
                value = F.image_distance(x, y)
            except (NotInPositivePart, NotOnSphere, DegenerateDenominator) as e:
                logger.debug(f"{F.name} 在点对 {label} 上无定义: {e}")
                estimate.pairs_skipped += 1
                continue
            if estimate.witness_pair is None or value > estimate.lower_bound:
                estimate.lower_bound = value
                estimate.witness_pair = (x, y)
                estimate.witness_distance = distance
                estimate.witness_source = label

    logger.debug(f"ω_{F.name}({t:g}) ≥ {estimate.lower_bound:.6g}（{estimate.pairs_tried} 个点对）")
    return estimate


def modulus_sweep(factory: MapFactory, ks: Sequence[int], t: float,
                  pair_sources: Sequence[PairSource]) -> List[ModulusEstimate]:
    """对一族 k 估计 ω_{F_k}(t) 的下界（探索性，不作断言）"""
    return [modulus_lower_bound(factory(k), t, pair_sources) for k in ks]


def divergence_sweep(factory: MapFactory, ks: Sequence[int], deltas: Sequence[float]) -> List[InequalityReport]:
    """‖F_k(e₁) − F_k(x(k,δ))‖ ≥ 1 − 1/(1+(k−1)δ) 在网格上逐点检查"""
    reports = []
    for k in ks:
        F = factory(k)
        e1 = PcpVector.basis(k, 1)
        for delta in deltas:
            value = F.image_distance(e1, divergence_point(k, delta))
            bound = 1.0 - 1.0 / (1.0 + (k - 1) * delta)
            reports.append(InequalityReport.from_comparison(
                "divergence", value, bound, "ge",
                inputs={"map": F.name, "oracle": F.target_oracle.name, "k": k, "delta": delta, "t": delta},
            ))
    return reports


# ========== 划分平衡 ==========

def check_partition_balance(oracle: NormOracle, k_max: int, tol: float = 1e-9) -> List[InequalityReport]:
    """
    贪心划分在每个 k ≤ k_max 上的两条估计：
        | ‖1_{[1,k]∩P}‖ − ‖1_{[1,k]∩Pᶜ}‖ | ≤ 1
        ψ_P(k) ≥ (ψ(k) − 1)/2
    """
    partition = greedy_partition(oracle, k_max)
    in_p = np.empty(k_max)
    in_c = np.empty(k_max)
    if oracle.symmetric:
        n_p = np.cumsum(partition.mask)
        for k in range(1, k_max + 1):
            a, b = int(n_p[k - 1]), k - int(n_p[k - 1])
            in_p[k - 1] = oracle.fundamental(a) if a else 0.0
            in_c[k - 1] = oracle.fundamental(b) if b else 0.0
    else:
        for k in range(1, k_max + 1):
            in_p[k - 1], in_c[k - 1] = partition_norms(oracle, partition.as_norm_argument(k), k)

    full = np.array([oracle.fundamental(k) for k in range(1, k_max + 1)])
    balance = np.abs(in_p - in_c)
    slack = np.minimum(in_p, in_c) - (full - 1.0) / 2.0
    inputs = {"oracle": oracle.name, "k": k_max, "partition": partition.kind}
    worst_balance = int(np.argmax(balance))
    worst_slack = int(np.argmin(slack))
    return [
        InequalityReport.from_comparison(
            "partition_balance", float(balance[worst_balance]), 1.0, "le", tol=tol,
            inputs=dict(inputs), notes={"worst_k": worst_balance + 1, "size_p": int(partition.mask.sum())},
        ),
        InequalityReport.from_comparison(
            "partition_lower_bound", float(slack[worst_slack]), 0.0, "ge", tol=tol,
            inputs=dict(inputs), notes={"worst_k": worst_slack + 1},
        ),
    ]


# ========== 块向量 ==========

def _block_vector(k: int, partition: Partition, blocks: Sequence[Tuple[int, int, float]],
                  part: str) -> Vector:
    """
    ∑ v·1_{(lo, hi] ∩ part}，part 为 "P"、"Pc" 或 "all"

    blocks 需按顺序且互不相交；空区间跳过。偶数划分返回 PcpVector。
    """
    blocks = [(lo, hi, 0.0 if math.isnan(v) else v) for lo, hi, v in blocks if hi > lo]
    if partition.kind == EVENS:
        segs = []
        pos = 1
        for lo, hi, v in blocks:
            if lo + 1 > pos:
                segs.append((pos, lo, 0.0, 0.0))
            ve, vo = {"P": (v, 0.0), "Pc": (0.0, v), "all": (v, v)}[part]
            segs.append((lo + 1, hi, ve, vo))
            pos = hi + 1
        if pos <= k:
            segs.append((pos, k, 0.0, 0.0))
        return PcpVector(k, tuple(segs))

    in_p = partition.indicator(k)
    out = np.zeros(k)
    for lo, hi, v in blocks:
        if part == "P":
            out[lo:hi] = np.where(in_p[lo:hi], v, 0.0)
        elif part == "Pc":
            out[lo:hi] = np.where(in_p[lo:hi], 0.0, v)
        else:
            out[lo:hi] = v
    return DenseVector(out)


def _block_values(vec: Vector, bounds: Sequence[int], partition: Partition, in_p: bool) -> List[float]:
    """每个块 (bounds[s], bounds[s+1]] ∩ P（或 Pᶜ）上的代表坐标；块与该类不相交时为 nan"""
    values = []
    for lo, hi in zip(bounds, bounds[1:]):
        idx = partition.first_in(lo + 1, hi, in_p)
        values.append(coordinate(vec, idx) if idx is not None else math.nan)
    return values


# ========== 块范数蕴含 ==========

def _lemma32_values(oracle: NormOracle, partition: Partition, m: Tuple[int, ...], n: Tuple[int, ...],
                    lambdas: Sequence[float], q_choice: str) -> Dict[str, float]:
    k = n[-1]
    part = "P" if q_choice == "P" else "Pc"
    bm, bn = (0,) + m, (0,) + n
    d = len(m)
    premise_1 = _block_vector(k, partition, [(bn[s], bn[s + 1], lambdas[s]) for s in range(d)], part)
    conclusion_1 = _block_vector(k, partition, [(bn[s], m[s], lambdas[s]) for s in range(d)], "all")
    premise_2 = _block_vector(k, partition, [(bm[s], bm[s + 1], lambdas[s]) for s in range(d)], part)
    conclusion_2 = _block_vector(k, partition, [(bm[s], bn[s], lambdas[s]) for s in range(d)], "all")
    return {
        "premise_1": oracle.eval(premise_1),
        "conclusion_1": oracle.eval(conclusion_1),
        "premise_2": oracle.eval(premise_2),
        "conclusion_2": oracle.eval(conclusion_2),
    }


def check_lemma32(oracle: NormOracle, partition: Partition, growth: GrowthSet,
                  m: Sequence[int], n: Sequence[int], lambdas: Sequence[float],
                  q_choice: str = "P", eps: Optional[float] = None,
                  premise_tol: float = 1e-12, tol: float = 1e-9) -> InequalityReport:
    """
    对 Q ∈ {P, Pᶜ}（m₀ = n₀ = 0）：
        ‖∑λ_s 1_{(n_{s−1},n_s]∩Q}‖ ≤ 1 ⇒ ‖∑λ_s 1_{(n_{s−1},m_s]}‖ ≤ ε/4
        ‖∑λ_s 1_{(m_{s−1},m_s]∩Q}‖ ≤ 1 ⇒ ‖∑λ_s 1_{(m_{s−1},n_{s−1}]}‖ ≤ ε/4
    两个前提都不成立时返回 hypothesis_not_met。
    """
    m, n = tuple(int(v) for v in m), tuple(int(v) for v in n)
    if len(m) != len(n) or len(lambdas) != len(m):
        raise BadTuple(f"元组与系数长度不一致: |m|={len(m)}, |n|={len(n)}, |λ|={len(lambdas)}")
    if q_choice not in ("P", "Pc"):
        raise SphereLabError(f"Q 只能取 P 或 Pc，实际为 {q_choice}")
    pair = InterlacedPair(len(m), m, n, n[-1] + 1)
    outside = [v for v in pair.m + pair.n if v not in growth.elements]
    if outside:
        raise BadTuple(f"元组元素 {outside} 不在增长集中")
    eps = growth.eps if eps is None else eps

    values = _lemma32_values(oracle, partition, pair.m, pair.n, lambdas, q_choice)
    inputs = {"oracle": oracle.name, "d": pair.d, "m": list(pair.m), "n": list(pair.n),
              "lambdas": [float(v) for v in lambdas], "Q": q_choice, "eps": eps, "k": pair.n[-1]}
    active = [i for i in (1, 2) if values[f"premise_{i}"] <= 1.0 + premise_tol]
    if not active:
        return InequalityReport.hypothesis_not_met(
            "lemma32", "premise", inputs=inputs, hypothesis_values=values, threshold=eps / 4,
        )
    conclusion = max(values[f"conclusion_{i}"] for i in active)
    report = InequalityReport.from_comparison(
        "lemma32", conclusion, eps / 4, "le", tol=tol,
        inputs=inputs, hypothesis_values=values, notes={"implications_checked": active},
    )
    if not report.passed:
        logger.warning(f"块范数蕴含失败: {inputs}，结论 {conclusion:.6g} > ε/4")
    return report


def lemma32_sweep(oracle: NormOracle, d: int, eps: float, trials: int = 1000, seed: int = 0,
                  partition: Optional[Partition] = None, tol: float = 1e-9) -> InequalityReport:
    """随机可容许 λ（缩放使两个前提都 ≤ 1）上的聚合检查"""
    partition = partition or Partition.evens()
    growth = build_growth_set(oracle, partition, d, eps)
    pairs = enumerate_interlaced(growth, d, growth.elements[-1] + 1, mode="exhaustive")
    rng = np.random.default_rng(seed)

    worst = 0.0
    failures = 0
    first = None
    for trial in range(trials):
        pair = pairs[int(rng.integers(len(pairs)))]
        q_choice = "P" if rng.random() < 0.5 else "Pc"
        lambdas = rng.uniform(-1.0, 1.0, size=d)
        raw = _lemma32_values(oracle, partition, pair.m, pair.n, lambdas, q_choice)
        scale = max(raw["premise_1"], raw["premise_2"])
        if scale > 0:
            lambdas = lambdas / scale * rng.uniform(0.5, 1.0)
        report = check_lemma32(oracle, partition, growth, pair.m, pair.n, lambdas, q_choice, eps, tol=tol)
        if report.verdict == Verdict.HYPOTHESIS_NOT_MET:
            continue
        worst = max(worst, report.conclusion_value)
        if not report.passed:
            failures += 1
            first = first or report.inputs

    result = InequalityReport.from_comparison(
        "lemma32_sweep", worst, eps / 4, "le", tol=tol,
        inputs={"oracle": oracle.name, "d": d, "eps": eps, "trials": trials, "seed": seed,
                "a": growth.a, "growth_elements": list(growth.elements), "partition": partition.kind},
        hypothesis_values={"failures": failures},
        notes={"first_failure": first},
    )
    if failures:
        result.verdict = Verdict.FAIL
    return result


# ========== 分离检查 ==========

def check_separation(F: SphereMap, pair: InterlacedPair, u: Profile, partition: Partition, eps: float,
                     growth: Optional[GrowthSet] = None, verify_assumption: bool = True,
                     tol: Optional[float] = None, strict_margin: Optional[float] = None) -> InequalityReport:
    """
    ‖F(x(m̄,u,k)) − F(x(n̄,u,k))‖_X > 1 − ε

    先在实际使用的两个见证向量上重新验证保步性与尾坐标为零，
    再核验增长集与划分满足增长假设。
    """
    tol = _DEFAULTS.output_tol if tol is None else tol
    strict_margin = _DEFAULTS.strict_margin if strict_margin is None else strict_margin
    if u.d != pair.d:
        raise BadTuple(f"剖面维数 {u.d} 与交错对维数 {pair.d} 不符")
    k = pair.k
    if F.dim != k:
        raise DimMismatch(f"映射维数 {F.dim} 与 k={k} 不符")

    inputs = {"map": F.name, "oracle": F.target_oracle.name, "d": pair.d, "k": k, "eps": eps,
              **pair.to_dict(), "profile": u.to_dict(), "partition": partition.kind}
    x_m, x_n = witness_x(pair.m, u, k, partition), witness_x(pair.n, u, k, partition)
    f_m, f_n = F(x_m), F(x_n)

    hypothesis_values = {
        "step_spread_m": step_spread(x_m, f_m)[0],
        "step_spread_n": step_spread(x_n, f_n)[0],
    }
    partial = InequalityReport(checker="separation", inputs=inputs, hypothesis_values=hypothesis_values,
                               threshold=1.0 - eps, direction="gt", verdict=Verdict.HYPOTHESIS_NOT_MET)
    if max(hypothesis_values.values()) > tol:
        raise HypothesisViolated("step_preserving", f"见证向量上输出极差 {max(hypothesis_values.values()):.3g}",
                                 report=partial)

    hypothesis_values["tail_max"] = sup_norm(restrict(f_m, pair.m[-1] + 1, k))
    if hypothesis_values["tail_max"] > tol:
        raise HypothesisViolated("tail_zero", f"(m_d, k] 上 |F_i| 最大为 {hypothesis_values['tail_max']:.3g}",
                                 report=partial)

    if verify_assumption:
        growth = growth or build_growth_set_covering(F.target_oracle, partition, pair.d, eps, pair.n[-1])
        violations = growth.satisfies_assumption()
        outside = [v for v in pair.m + pair.n if v not in growth.elements]
        if outside:
            violations.append(f"elements: {outside} 不在增长集中")
        if violations:
            raise HypothesisViolated("growth_assumption", "; ".join(violations[:3]), report=partial)

    bm, bn = (0,) + pair.m, (0,) + pair.n
    readouts = {
        "alpha_m": _block_values(f_m, bm, partition, True),
        "beta_m": _block_values(f_m, bm, partition, False),
        "alpha_n": _block_values(f_n, bn, partition, True),
        "beta_n": _block_values(f_n, bn, partition, False),
        "gamma_n": [coordinate(f_n, k)],
    }
    oracle = F.target_oracle
    d = pair.d
    hypothesis_values.update({
        "item_i": oracle.eval(_block_vector(k, partition, [(bm[s], bn[s], readouts["alpha_m"][s]) for s in range(d)], "P")),
        "item_ii": oracle.eval(_block_vector(k, partition, [(bm[s], bn[s], readouts["beta_m"][s]) for s in range(d)], "Pc")),
        "item_iii": oracle.eval(_block_vector(k, partition, [(bn[s], pair.m[s], readouts["alpha_n"][s]) for s in range(d)], "P")),
        "item_iv": oracle.eval(_block_vector(k, partition, [(bn[s], pair.m[s], readouts["beta_n"][s]) for s in range(d)], "Pc")),
        "eps_over_4": eps / 4,
    })

    distance = oracle.eval(subtract(f_m, f_n))
    report = InequalityReport.from_comparison(
        "separation", distance, 1.0 - eps, "gt", tol=strict_margin,
        inputs=inputs,
        hypothesis_values=hypothesis_values,
        block_readouts=readouts,
        notes={"domain_distance": sup_distance(x_m, x_n), "distance_bound": u.interlacing_bound()},
    )
    if not report.passed:
        logger.warning(f"分离不等式失败: {F.name}, m={pair.m}, n={pair.n}, 距离 {distance:.6g} ≤ {1.0 - eps:g}")
    return report


# ========== 定理流水线 ==========

def _cross_check(F: SphereMap, x: Vector, y: Vector) -> float:
    return F.target_oracle.eval(subtract(F.reference(x), F.reference(y)))


def run_theorem_1_1(factory: MapFactory, d: int, eps: float = 0.5, k: Optional[int] = None,
                    oracle: Optional[NormOracle] = None, pipeline: str = "direct",
                    mode: str = "consecutive", seed: int = 0, cross_check: bool = True,
                    tol: Optional[float] = None) -> InequalityReport:
    """
    支撑保持映射：交错阶梯对的定义域距离恰为 1/d，像距离 ≥ 1/2

    pipeline 为 "abs" 或 "abs+sym" 时先经过绝对值包装（及对称化）再检查。
    """
    tol = _DEFAULTS.output_tol if tol is None else tol
    oracle = oracle or LrNorm(1.0)
    partition = Partition.evens()
    growth = build_growth_set(oracle, partition, d, eps)
    k = growth.elements[2 * d - 1] + 1 if k is None else k
    pairs = enumerate_interlaced(growth, d, k, mode=mode)

    F = factory(k)
    if pipeline in ("abs", "abs+sym"):
        F = abs_wrapper(F)
    if pipeline == "abs+sym":
        exact = k <= _DEFAULTS.exact_symmetrize_max_k
        F = symmetrize(F, mode="exact" if exact else "sampled", seed=seed)
    elif pipeline not in ("direct", "abs"):
        raise SphereLabError(f"未知的流水线: {pipeline}")

    distances = []
    worst_pair = None
    max_diff = 0.0
    for pair in pairs:
        z_m, z_n = staircase_z(pair.m, k), staircase_z(pair.n, k)
        f_m, f_n = F(z_m), F(z_n)
        for z, f in ((z_m, f_m), (z_n, f_n)):
            if not same_support(z, f, _DEFAULTS.support_tol, tol):
                raise HypothesisViolated("support_preserving", f"{F.name} 在阶梯 {pair.to_dict()} 上改变了支撑")
        domain = sup_distance(z_m, z_n)
        if abs(domain - 1.0 / d) > 1e-12:
            raise BadTuple(f"阶梯对的定义域距离 {domain!r} 不等于 1/d")
        distance = F.target_oracle.eval(subtract(f_m, f_n))
        if cross_check:
            max_diff = max(max_diff, abs(distance - _cross_check(F, z_m, z_n)))
        if not distances or distance < min(distances):
            worst_pair = pair
        distances.append(distance)

    worst = min(distances)
    report = InequalityReport.from_comparison(
        "theorem_1_1", worst, 0.5, "ge",
        inputs={"map": F.name, "oracle": oracle.name, "d": d, "k": k, "eps": eps, "t": 1.0 / d,
                "pipeline": pipeline, "mode": mode, "a": growth.a,
                "growth_elements": list(growth.below(k)), "partition": partition.kind},
        hypothesis_values={
            "domain_distance": 1.0 / d,
            "pairs": len(pairs),
            "strong_threshold": 1.0 - eps,
            "strong_margin": worst - (1.0 - eps),
        },
        notes={"worst_pair": worst_pair.to_dict(), "cross_check_max_diff": max_diff if cross_check else None},
    )
    if cross_check and max_diff > CROSS_CHECK_TOL:
        report.verdict = Verdict.FAIL
        report.notes["cross_check_failed"] = True
        logger.warning(f"{F.name}: 两条求值路径的距离相差 {max_diff:.3g}")
    logger.info(f"ω_{F.name}(1/{d}) ≥ {worst:.6g}（k={k}, {len(pairs)} 个交错对）")
    return report


def run_theorem_1_2(F: Union[SphereMap, MapFactory], d: int, eps: float = 0.5, k: Optional[int] = None,
                    oracle: Optional[NormOracle] = None, cross_check: bool = True,
                    tol: Optional[float] = None) -> InequalityReport:
    """
    保步连续映射：沿 m̄ 的路径求尾坐标零点恢复剖面 u，
    用同一个 u 构造 x(n̄,u,k)，检查分离并给出 ω_F(1/d) ≥ 1/2 的见证
    """
    tol = _DEFAULTS.output_tol if tol is None else tol
    if isinstance(F, SphereMap):
        k = F.dim if k is None else k
        oracle = oracle or F.target_oracle
    else:
        oracle = oracle or LrNorm(1.0)
    partition = Partition.evens()
    growth = build_growth_set(oracle, partition, d, eps)
    k = growth.elements[2 * d - 1] + 1 if k is None else k
    if not isinstance(F, SphereMap):
        F = F(k)
    if F.dim != k:
        raise DimMismatch(f"映射维数 {F.dim} 与 k={k} 不符")

    ones, minus = PcpVector.constant(k, 1.0), PcpVector.constant(k, -1.0)
    gap = sup_distance(F(ones), F(minus))
    if gap <= tol:
        raise HypothesisViolated("distinct_endpoints", f"F(1,…,1) 与 F(−1,…,−1) 相同（差 {gap:.3g}）")

    pair = enumerate_interlaced(growth, d, k)[0]
    root = find_tail_zero(F, path_phi(pair.m, k, partition))
    u = root.profile
    x_m = root.witness
    x_n = witness_x(pair.n, u, k, partition)
    domain = sup_distance(x_m, x_n)
    if domain > 1.0 / d + 1e-12:
        raise HypothesisViolated("interlacing_distance", f"‖x(m̄,u,k) − x(n̄,u,k)‖_∞ = {domain!r} > 1/d")

    separation = check_separation(F, pair, u, partition, eps, growth=growth)
    distance = separation.conclusion_value
    notes = {
        "root": root.to_dict(),
        "pair": pair.to_dict(),
        "separation_verdict": separation.verdict.value,
    }
    if cross_check:
        notes["cross_check_diff"] = abs(distance - _cross_check(F, x_m, x_n))

    report = InequalityReport.from_comparison(
        "theorem_1_2", distance, 0.5, "ge",
        inputs={"map": F.name, "oracle": oracle.name, "d": d, "k": k, "eps": eps, "t": 1.0 / d,
                "a": growth.a, "growth_elements": list(growth.below(k)), "partition": partition.kind},
        hypothesis_values={
            "t_root": root.t,
            "tail_value": root.tail_value,
            "sign": root.sign,
            "domain_distance": domain,
            "separation_margin": separation.margin,
        },
        block_readouts=separation.block_readouts,
        notes=notes,
    )
    if cross_check and notes["cross_check_diff"] > CROSS_CHECK_TOL:
        report.verdict = Verdict.FAIL
        report.notes["cross_check_failed"] = True
    return report


# ========== 集中检查 ==========

def concentration_instance(oracle: NormOracle, d: int, eps: float) -> Tuple[GrowthSet, Tuple[int, ...], int]:
    """
    集中检查的默认实例：Q = {k_{2j}}（1 起下标），m̄ 取 Q 的前 d 个元素，
    k 取 n_d 之后的下一个 Q 元素
    """
    growth = build_growth_set(oracle, Partition.evens(), d, eps, variant=CONCENTRATION)
    pair = enumerate_interlaced(growth, d, growth.elements[-1], start=1)[0]
    return growth, pair.m, growth.elements[2 * d + 1]


def check_concentration(F: SphereMap, m: Optional[Sequence[int]] = None, k: Optional[int] = None,
                        d: int = 1, eps: float = 0.5, growth: Optional[GrowthSet] = None,
                        modulus_threshold: Optional[float] = None, random_count: Optional[int] = None,
                        seed: Optional[int] = None, checker: str = "concentration",
                        tol: Optional[float] = None, strict_margin: Optional[float] = None) -> InequalityReport:
    """
    两分支判定：
    (A) 在见证族与随机点对中找到定义域距离 ≤ 1/d、像距离 > 阈值（默认 ε/8）的点对，
        模连续性假设被否定，结论对该 F 是空的；
    (B) 未找到这样的点对，并验证 ‖F(z(m̄)) − 1_{[1,k]}/ψ(k)‖_X ≤ ε。
    分支 B 只说明“在 N 个点对中未发现违例”，不声称假设成立。
    """
    tol = _DEFAULTS.output_tol if tol is None else tol
    strict_margin = _DEFAULTS.strict_margin if strict_margin is None else strict_margin
    random_count = _DEFAULTS.random_pairs if random_count is None else random_count
    seed = _DEFAULTS.random_seed if seed is None else seed
    modulus_threshold = eps / 8 if modulus_threshold is None else modulus_threshold
    oracle = F.target_oracle
    k = F.dim if k is None else k
    if F.dim != k:
        raise DimMismatch(f"映射维数 {F.dim} 与 k={k} 不符")
    growth = growth or build_growth_set_covering(oracle, Partition.evens(), d, eps, k, variant=CONCENTRATION)
    if m is None:
        q = [e for e in growth.elements[1::2] if e < k]
        if len(q) < d:
            raise NotEnoughElements(f"Q 中低于 k={k} 的元素不足 d={d} 个")
        m = q[:d]
    m = tuple(int(v) for v in m)
    if len(m) != d or m[-1] >= k:
        raise BadTuple(f"m̄={m} 与 d={d}, k={k} 不符")

    inputs = {"map": F.name, "oracle": oracle.name, "d": d, "k": k, "eps": eps, "t": 1.0 / d,
              "m": list(m), "a": growth.a, "growth_elements": list(growth.below(k + 1)),
              "partition": growth.partition.kind, "seed": seed}
    z = staircase_z(m, k)
    fz = F(z)
    if not is_nonnegative(fz, tol):
        raise HypothesisViolated("positive_image", f"{F.name}(z(m̄)) 含负坐标")
    spread = step_spread(z, fz)[0]
    if spread > tol:
        raise HypothesisViolated("step_preserving", f"{F.name}(z(m̄)) 在阶梯块内极差 {spread:.3g}")

    sources = [
        staircase_pairs(oracle, d, eps, partition=growth.partition, variant=growth.variant),
        random_staircase_pairs(d, random_count, seed),
        random_pairs(random_count, seed, positive=True),
    ]
    estimate = modulus_lower_bound(F, 1.0 / d, sources)
    hypothesis_values = {
        "modulus_lower_bound": estimate.lower_bound,
        "modulus_threshold": modulus_threshold,
        "pairs_tried": estimate.pairs_tried,
        "step_spread": spread,
    }

    if estimate.lower_bound > modulus_threshold + strict_margin:
        logger.info(f"{F.name}: ω_F(1/{d}) ≥ {estimate.lower_bound:.6g} > {modulus_threshold:g}，分支 A")
        return InequalityReport.hypothesis_not_met(
            checker, "modulus",
            inputs=inputs,
            hypothesis_values=hypothesis_values,
            conclusion_value=estimate.lower_bound,
            threshold=modulus_threshold,
            direction="gt",
            margin=estimate.lower_bound - modulus_threshold,
            notes={"branch": "A", "witness": estimate.to_dict()},
        )

    uniform = PcpVector.constant(k, 1.0 / oracle.fundamental(k))
    value = oracle.eval(subtract(fz, uniform))
    report = InequalityReport.from_comparison(
        checker, value, eps, "le",
        inputs=inputs,
        hypothesis_values=hypothesis_values,
        notes={"branch": "B", "search": f"在 {estimate.pairs_tried} 个点对中未发现违例"},
    )
    if not report.passed:
        logger.warning(f"{F.name}: 集中不等式失败 {value:.6g} > {eps:g}")
    return report


def check_local_property_q(F: SphereMap, gamma: float, m: Optional[Sequence[int]] = None,
                           k: Optional[int] = None, d: int = 1, eps: float = 0.5,
                           growth: Optional[GrowthSet] = None, **kwargs) -> InequalityReport:
    """局部 Q 性质的单实例证书：与集中检查同一路径，模连续性阈值为 γ·ε"""
    if gamma <= 0:
        raise SphereLabError(f"γ 必须为正数，实际为 {gamma}")
    report = check_concentration(F, m, k, d, eps, growth, modulus_threshold=gamma * eps,
                                 checker="local_property_q", **kwargs)
    report.inputs["gamma"] = gamma
    return report
