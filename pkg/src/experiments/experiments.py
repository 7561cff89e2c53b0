"""
具体实验 - 每个实验标识对应一个 BaseExperiment 子类
"""
import logging
from typing import Dict, List, Type

import numpy as np

from ..config.settings import LabConfig
from ..models.entities import InequalityReport, InterlacedPair, Profile
from ..models.errors import ManifestError
from ..modules.analysis import (
    check_concentration, check_local_property_q, check_partition_balance, check_separation,
    concentration_instance, divergence_pairs, divergence_sweep, lemma32_sweep, modulus_lower_bound,
    random_pairs, run_theorem_1_1, run_theorem_1_2, staircase_pairs,
)
from ..modules.catalog import split_wrappers
from ..modules.maps import (
    check_reference_agreement, check_roundtrip, check_sphere_image, integral_homeo, mazur_map,
    sample_sphere_points,
)
from ..modules.norms import LrNorm
from ..modules.vectors import DenseVector, from_dense
from ..modules.witnesses import Partition, build_growth_set, enumerate_interlaced
from .base import BaseExperiment, Task
from .manifest import ExperimentManifest

logger = logging.getLogger(__name__)

DEFAULT_PARTITION_BUDGET = 10_000
DEFAULT_ROUNDTRIP_KS = [2, 8, 64, 128]
DEFAULT_DIVERGENCE_KS = [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
DEFAULT_DELTAS = [0.1, 0.01]


class PartitionExperiment(BaseExperiment):
    """贪心划分的平衡估计与 ψ_P 下界"""

    name = "partition"
    partition_kind = "greedy"

    def _build_tasks(self) -> List[Task]:
        return [{"k": self.manifest.k_budget or DEFAULT_PARTITION_BUDGET}]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        return check_partition_balance(self.oracle, task["k"])


class ModulusExperiment(BaseExperiment):
    """ω_F(t) 的下界扫描（探索性：报告的是下界，阈值为 0）"""

    name = "modulus"
    partition_kind = "evens"

    def _build_tasks(self) -> List[Task]:
        ks = self.manifest.ks or [self.manifest.k_budget or 64]
        t = self.manifest.t or 1.0 / self.manifest.d
        return [{"k": k, "t": t} for k in ks]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        F = self.factory()(task["k"])
        sources = [
            divergence_pairs([min(task["t"], 1.0)]),
            staircase_pairs(self.oracle, m.d, m.eps),
            random_pairs(self.config.random_pairs, self.seed, positive=F.positive_domain),
        ]
        estimate = modulus_lower_bound(F, task["t"], sources)
        return [InequalityReport.from_comparison(
            "modulus_lower_bound", estimate.lower_bound, 0.0, "ge",
            inputs={"map": F.name, "oracle": F.target_oracle.name, "d": m.d, "k": task["k"],
                    "t": task["t"], "seed": self.seed},
            hypothesis_values={"pairs_tried": estimate.pairs_tried, "pairs_skipped": estimate.pairs_skipped},
            notes={"estimate": estimate.to_dict()},
        )]


class SeparationExperiment(BaseExperiment):
    """增长集上每个相邻交错对的分离检查"""

    name = "separation"

    def _growth(self):
        return build_growth_set(self.oracle, Partition.evens(), self.manifest.d, self.manifest.eps)

    def _build_tasks(self) -> List[Task]:
        d = self.manifest.d
        growth = self._growth()
        k = self.manifest.k_budget or growth.elements[2 * d - 1] + 1
        return [pair.to_dict() for pair in enumerate_interlaced(growth, d, k, mode="consecutive")]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        pair = InterlacedPair(m.d, task["m"], task["n"], task["k"])
        u = Profile.staircase(m.d) if m.profile == "staircase" else Profile.y_profile(m.d)
        F = self.factory()(pair.k)
        growth = self._growth()
        report = check_separation(F, pair, u, Partition.evens(), m.eps, growth=growth,
                                  tol=self.config.output_tol, strict_margin=self.config.strict_margin)
        report.inputs.update({"t": 1.0 / m.d, "a": growth.a, "growth_elements": list(growth.below(pair.k))})
        return [report]


class Theorem11Experiment(BaseExperiment):
    """支撑保持映射流水线"""

    name = "theorem11"

    def _build_tasks(self) -> List[Task]:
        return [{"k": self.manifest.k_budget}]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        return [run_theorem_1_1(self.factory(), m.d, m.eps, k=task["k"], oracle=self.oracle,
                                pipeline=m.pipeline, seed=self.seed, tol=self.config.output_tol)]


class Theorem12Experiment(BaseExperiment):
    """保步连续映射流水线"""

    name = "theorem12"

    def _build_tasks(self) -> List[Task]:
        return [{"k": self.manifest.k_budget}]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        return [run_theorem_1_2(self.factory(), m.d, m.eps, k=task["k"], oracle=self.oracle,
                                tol=self.config.output_tol)]


class ConcentrationExperiment(BaseExperiment):
    """正部上的集中检查；给定 γ 时改为局部 Q 证书"""

    name = "concentration"

    def _build_tasks(self) -> List[Task]:
        return [{"k": self.manifest.k_budget}]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        growth, m_tuple, k = concentration_instance(self.oracle, m.d, m.eps)
        if task["k"] is not None:
            k, m_tuple = task["k"], None
        F = self.factory()(k)
        kwargs = {"random_count": self.config.random_pairs, "seed": self.seed,
                  "tol": self.config.output_tol, "strict_margin": self.config.strict_margin}
        if m.gamma is not None:
            return [check_local_property_q(F, m.gamma, m_tuple, k, m.d, m.eps, growth, **kwargs)]
        return [check_concentration(F, m_tuple, k, m.d, m.eps, growth, **kwargs)]


class RoundtripExperiment(BaseExperiment):
    """积分同胚或 Mazur 映射的往返误差"""

    name = "roundtrip"

    def _before_run(self):
        wrappers, base = split_wrappers(self.manifest.map)
        if wrappers or (base != "integral" and not base.startswith("mazur:")):
            raise ManifestError(f"往返实验只支持 integral 与 mazur:<p>，实际为 {self.manifest.map}")

    def _build_tasks(self) -> List[Task]:
        ks = self.manifest.ks or ([self.manifest.k_budget] if self.manifest.k_budget else DEFAULT_ROUNDTRIP_KS)
        return [{"k": k} for k in ks]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        k = task["k"]
        trials = self.manifest.trials or self.config.trials
        rng = np.random.default_rng([self.seed, k])
        if self.manifest.map.startswith("mazur:"):
            return self._mazur(k, trials, rng)
        return self._integral(k, trials, rng)

    def _integral(self, k: int, trials: int, rng) -> List[InequalityReport]:
        F = integral_homeo(k)
        G = F.inverse()
        xs = sample_sphere_points(k, trials, rng, positive=True)
        ys = [DenseVector(x.coords / x.coords.sum()) for x in sample_sphere_points(k, trials, rng, positive=True)]
        sorted_xs = [from_dense(np.sort(x.coords)[::-1]) for x in xs]
        reports = [
            check_roundtrip(F, G, xs, tol=1e-10, checker="roundtrip_backward"),
            check_roundtrip(G, F, ys, tol=1e-10, checker="roundtrip_forward"),
            check_reference_agreement(F, sorted_xs, tol=1e-12),
        ]
        for report in reports:
            report.inputs["seed"] = self.seed
        return reports

    def _mazur(self, k: int, trials: int, rng) -> List[InequalityReport]:
        F = mazur_map(float(self.manifest.map.split(":", 1)[1]), k)
        source = LrNorm(F.source_p)
        xs = [DenseVector(x.coords / source.eval(x)) for x in sample_sphere_points(k, trials, rng)]
        reports = [
            check_sphere_image(F, xs, tol=1e-12),
            check_roundtrip(F, F.inverse(), xs, tol=1e-10, checker="mazur_roundtrip"),
        ]
        for report in reports:
            report.inputs["seed"] = self.seed
        return reports


class Lemma32Experiment(BaseExperiment):
    """块范数蕴含的随机 λ 扫描"""

    name = "lemma32"

    def _build_tasks(self) -> List[Task]:
        return [{"trials": self.manifest.trials or self.config.trials}]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        m = self.manifest
        return [lemma32_sweep(self.oracle, m.d, m.eps, trials=task["trials"], seed=self.seed,
                              tol=self.config.output_tol)]


class DivergenceExperiment(BaseExperiment):
    """归一化映射族在 (e₁, x(k,δ)) 上的发散表"""

    name = "divergence"

    def _build_tasks(self) -> List[Task]:
        ks = self.manifest.ks or ([self.manifest.k_budget] if self.manifest.k_budget else DEFAULT_DIVERGENCE_KS)
        return [{"k": k} for k in ks]

    def _run_task(self, task: Task) -> List[InequalityReport]:
        return divergence_sweep(self.factory(), [task["k"]], self.manifest.deltas or DEFAULT_DELTAS)


EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    cls.name: cls
    for cls in (
        PartitionExperiment, ModulusExperiment, SeparationExperiment, Theorem11Experiment,
        Theorem12Experiment, ConcentrationExperiment, RoundtripExperiment, Lemma32Experiment,
        DivergenceExperiment,
    )
}


def create_experiment(manifest: ExperimentManifest, config: LabConfig, **kwargs) -> BaseExperiment:
    try:
        cls = EXPERIMENTS[manifest.experiment]
    except KeyError:
        raise ManifestError(f"未知的实验: {manifest.experiment}")
    return cls(manifest, config, **kwargs)
