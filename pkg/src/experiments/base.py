"""
实验引擎基类 - 使用模板方法模式

run() 固定流程：构建任务 → 串行或进程池执行 → 汇总报告与元数据 → 打印汇总。
子类只需实现 _build_tasks 与 _run_task。
"""
import logging
import time
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from typing import Any, Dict, Iterator, List, Optional

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from ..config.settings import LabConfig
from ..models.entities import InequalityReport, Verdict
from ..models.errors import HypothesisViolated
from ..modules.catalog import parse_map, parse_oracle
from ..modules.norms import NormOracle
from ..modules.report_generator import ExperimentResult, library_versions
from .manifest import ExperimentManifest

logger = logging.getLogger(__name__)

Task = Dict[str, Any]


def _execute_task(payload) -> List[InequalityReport]:
    """进程池入口：在子进程中重建实验对象并执行单个任务"""
    experiment_cls, manifest_data, config_data, task = payload
    manifest = ExperimentManifest.model_validate(manifest_data)
    experiment = experiment_cls(manifest, LabConfig(**config_data))
    return experiment.run_task(task)


class BaseExperiment(ABC):
    """实验抽象基类 - 定义模板方法"""

    name: str = "experiment"
    partition_kind: Optional[str] = None  # 无增长集的实验不涉及划分

    def __init__(self, manifest: ExperimentManifest, config: LabConfig,
                 console: Optional[Console] = None):
        self.manifest = manifest
        self.config = config
        self.console = console or Console()
        self.seed = manifest.seed if manifest.seed is not None else config.random_seed

    @property
    def oracle(self) -> NormOracle:
        return parse_oracle(self.manifest.oracle)

    def factory(self):
        return parse_map(self.manifest.map, self.oracle)

    def run(self, verbose: bool = True) -> ExperimentResult:
        """
        模板方法: 运行实验的主流程
        子类不应覆盖此方法，而是通过钩子方法扩展
        """
        self._before_run()
        if verbose:
            self._print_start_message()

        tasks = self._build_tasks()
        start = time.perf_counter()
        reports: List[InequalityReport] = []
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
            console=self.console,
            disable=not verbose,
        ) as progress:
            progress_task = progress.add_task(f"[cyan]{self.name} 进行中...", total=len(tasks))
            for batch in self._execute(tasks):
                reports.extend(batch)
                progress.update(progress_task, advance=1)

        wall_time = time.perf_counter() - start
        result = ExperimentResult(self.name, reports, self._build_meta(reports, wall_time))
        self._after_run(result)

        if verbose:
            self.console.print("\n[bold green]✓ 实验完成！[/bold green]\n")
            self._print_summary(result)
        return result

    def _execute(self, tasks: List[Task]) -> Iterator[List[InequalityReport]]:
        """workers > 1 时用进程池；map 按提交顺序返回，汇总顺序与串行一致"""
        if self.config.workers > 1 and len(tasks) > 1:
            logger.info(f"{self.name}: {len(tasks)} 个任务，{self.config.workers} 个进程")
            payloads = [
                (type(self), self.manifest.model_dump(), asdict(self.config), task)
                for task in tasks
            ]
            with ProcessPoolExecutor(max_workers=self.config.workers) as executor:
                yield from executor.map(_execute_task, payloads)
        else:
            for task in tasks:
                yield self.run_task(task)

    def run_task(self, task: Task) -> List[InequalityReport]:
        """执行单个任务；假设不成立时转为 hypothesis_not_met 报告"""
        try:
            return self._run_task(task)
        except HypothesisViolated as e:
            logger.info(f"{self.name}: {e}")
            return [self._not_met_report(e, task)]

    def _not_met_report(self, error: HypothesisViolated, task: Task) -> InequalityReport:
        if error.report is not None:
            report = error.report
            report.verdict = Verdict.HYPOTHESIS_NOT_MET
            report.notes = {**report.notes, "failed_hypothesis": error.hypothesis, "detail": error.detail}
            return report
        inputs = {
            "map": self.manifest.map,
            "oracle": self.manifest.oracle,
            "d": self.manifest.d,
            "eps": self.manifest.eps,
            "k": task.get("k"),
        }
        return InequalityReport.hypothesis_not_met(
            self.name, error.hypothesis, inputs=inputs, notes={"detail": error.detail},
        )

    @abstractmethod
    def _build_tasks(self) -> List[Task]:
        """构建任务列表 - 任务必须可 pickle（进程池）"""
        pass

    @abstractmethod
    def _run_task(self, task: Task) -> List[InequalityReport]:
        """执行单个任务，返回若干报告"""
        pass

    def _before_run(self):
        """钩子: 实验开始前"""
        pass

    def _after_run(self, result: ExperimentResult):
        """钩子: 实验结束后"""
        pass

    def _build_meta(self, reports: List[InequalityReport], wall_time: float) -> Dict[str, Any]:
        growth = next((r.inputs for r in reports if "growth_elements" in r.inputs), {})
        partition = next((r.inputs["partition"] for r in reports if "partition" in r.inputs),
                         self.partition_kind)
        sampling = self.manifest.uses_sampling
        return {
            "experiment": self.name,
            "manifest": self.manifest.model_dump(),
            # 只记录实际参与采样的种子
            "seed": self.seed if sampling else None,
            "sampling": sampling,
            "wall_time_s": wall_time,
            "workers": self.config.workers,
            "versions": library_versions(),
            "tolerances": self.config.tolerances(),
            "a": growth.get("a"),
            "growth_elements": growth.get("growth_elements"),
            "partition": partition,
        }

    def _print_start_message(self):
        m = self.manifest
        self.console.print(
            f"\n[bold cyan]开始实验 {self.name} - 范数 {m.oracle}，映射 {m.map}，d={m.d}，ε={m.eps:g}[/bold cyan]\n"
        )

    def _print_summary(self, result: ExperimentResult):
        """打印汇总信息 - 子类可覆盖"""
        self.console.print("[bold]━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━[/bold]")
        self.console.print(f"[bold cyan]📊 {self.name} 结果汇总[/bold cyan]")
        self.console.print("[bold]━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━[/bold]\n")
        colors = {"pass": "green", "fail": "red", "hypothesis_not_met": "yellow"}
        for verdict, count in sorted(result.verdict_counts().items()):
            self.console.print(f"  [{colors[verdict]}]{verdict}[/{colors[verdict]}]: {count}")
        for report in result.reports[:20]:
            self.console.print(
                f"  {report.checker:<24} k={report.inputs.get('k')!s:<10} "
                f"值={report.conclusion_value:.10g} 阈值={report.threshold:.6g} ({report.verdict.value})"
            )
        if len(result.reports) > 20:
            self.console.print(f"  ……其余 {len(result.reports) - 20} 条见 report.json")
        self.console.print(f"\n  耗时: {result.meta.get('wall_time_s', 0.0):.2f} 秒\n")
