"""
报告生成器 - 检查报告的完整 JSON、扁平 CSV 汇总表与运行元数据
"""
import json
import logging
import math
import platform
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from ..models.entities import InequalityReport

logger = logging.getLogger(__name__)

# 汇总表列顺序固定，下游绘图脚本依赖此顺序
CSV_COLUMNS = [
    "checker", "d", "k", "map", "oracle", "t",
    "conclusion_value", "threshold", "margin", "verdict",
]


def _json_default(value: Any):
    """numpy 标量/数组、枚举与路径的 JSON 序列化"""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"无法序列化的类型: {type(value).__name__}")


def library_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
    }


@dataclass
class ExperimentResult:
    """一次实验运行的全部报告与元数据"""
    experiment: str
    reports: List[InequalityReport] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.reports if r.verdict.value == "fail")

    @property
    def passed(self) -> bool:
        """没有 fail；hypothesis_not_met 表示检查器拒绝给出结论，不算失败"""
        return self.failures == 0

    def verdict_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for r in self.reports:
            counts[r.verdict.value] = counts.get(r.verdict.value, 0) + 1
        return counts


class ReportGenerator:
    """把实验结果写成 <prefix>.report.json、<prefix>.summary.csv、<prefix>.meta.json"""

    def __init__(self, result: ExperimentResult):
        self.result = result

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for r in self.result.reports:
            rows.append({
                "checker": r.checker,
                "d": r.inputs.get("d"),
                "k": r.inputs.get("k"),
                "map": r.inputs.get("map"),
                "oracle": r.inputs.get("oracle"),
                "t": r.inputs.get("t"),
                "conclusion_value": r.conclusion_value,
                "threshold": r.threshold,
                "margin": r.margin,
                "verdict": r.verdict.value,
            })
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_json(self) -> str:
        payload = {
            "experiment": self.result.experiment,
            "reports": [r.to_dict() for r in self.result.reports],
        }
        return json.dumps(payload, indent=2, ensure_ascii=False, default=_json_default)

    def write(self, prefix: str) -> Dict[str, Path]:
        base = Path(prefix)
        base.parent.mkdir(parents=True, exist_ok=True)
        paths = {
            "report": base.with_name(base.name + ".report.json"),
            "summary": base.with_name(base.name + ".summary.csv"),
            "meta": base.with_name(base.name + ".meta.json"),
        }
        paths["report"].write_text(self.to_json(), encoding="utf-8")
        # %.17g 保证浮点往返精确，两次相同运行得到字节相同的表
        self.to_dataframe().to_csv(paths["summary"], index=False, float_format="%.17g", lineterminator="\n")
        paths["meta"].write_text(
            json.dumps(self.result.meta, indent=2, ensure_ascii=False, sort_keys=True, default=_json_default),
            encoding="utf-8",
        )
        logger.info(f"报告已写入: {', '.join(str(p) for p in paths.values())}")
        return paths

    def format_summary(self) -> str:
        """控制台用的文字汇总"""
        counts = self.result.verdict_counts()
        lines = [f"实验 {self.result.experiment}: {len(self.result.reports)} 条报告"]
        for verdict, count in sorted(counts.items()):
            lines.append(f"  {verdict}: {count}")
        worst = min(self.result.reports, key=lambda r: r.margin, default=None)
        if worst is not None and not math.isnan(worst.margin):
            lines.append(f"  最小余量: {worst.margin:.6g}（{worst.checker}）")
        return "\n".join(lines)
