"""
实验清单 - 一次调用运行一个实验
"""
import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..models.errors import ManifestError
from ..modules.catalog import map_uses_sampling, parse_map, parse_oracle

ExperimentName = Literal[
    "partition", "modulus", "separation", "theorem11", "theorem12",
    "concentration", "roundtrip", "lemma32", "divergence",
]

# 这些实验本身就要采样，必须给定种子
SAMPLING_EXPERIMENTS = ("modulus", "concentration", "roundtrip", "lemma32")


class ExperimentManifest(BaseModel):
    """实验清单"""

    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentName
    oracle: str = "l1"
    map: str = "normalize"
    d: int = Field(1, ge=1, le=6)
    eps: float = Field(0.5, gt=0.0, le=1.0)
    k_budget: Optional[int] = Field(None, ge=2)
    seed: Optional[int] = Field(None, ge=0)
    output: str = "results/run"

    # 实验专用参数
    ks: Optional[List[int]] = None
    deltas: Optional[List[float]] = None
    t: Optional[float] = Field(None, gt=0.0, le=2.0)
    gamma: Optional[float] = Field(None, gt=0.0)
    pipeline: Literal["direct", "abs", "abs+sym"] = "direct"
    profile: Literal["staircase", "y"] = "staircase"
    trials: Optional[int] = Field(None, ge=1)

    @field_validator("oracle")
    @classmethod
    def _oracle_resolves(cls, value: str) -> str:
        parse_oracle(value)
        return value

    @field_validator("ks")
    @classmethod
    def _ks_valid(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and (not value or min(value) < 2):
            raise ValueError("ks 不能为空且每个 k 至少为 2")
        return value

    @field_validator("deltas")
    @classmethod
    def _deltas_valid(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and (not value or any(not 0 < v <= 1 for v in value)):
            raise ValueError("deltas 不能为空且每个 δ 必须在 (0, 1] 中")
        return value

    @model_validator(mode="after")
    def _references_resolve(self) -> "ExperimentManifest":
        if self.experiment not in ("partition", "lemma32"):
            parse_map(self.map, parse_oracle(self.oracle))
        if self.seed is None and self.uses_sampling:
            raise ValueError(f"实验 {self.experiment}（映射 {self.map}）需要采样，必须给定 seed")
        return self

    @property
    def uses_sampling(self) -> bool:
        return (self.experiment in SAMPLING_EXPERIMENTS
                or map_uses_sampling(self.map)
                or self.pipeline == "abs+sym")


def load_manifest(path: Path) -> ExperimentManifest:
    """读取 JSON 清单；文件、格式与校验错误统一转为 ManifestError"""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ManifestError(f"无法读取清单 {path}: {e}")
    except json.JSONDecodeError as e:
        raise ManifestError(f"清单 {path} 不是合法 JSON: {e}")
    if not isinstance(data, dict):
        raise ManifestError(f"清单 {path} 顶层必须是对象")
    try:
        return ExperimentManifest.model_validate(data)
    except ValidationError as e:
        raise ManifestError(f"清单 {path} 校验失败:\n{e}")
