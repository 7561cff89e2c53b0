"""
配置模块 - 定义所有实验容差与规模参数
"""
import os
from dataclasses import dataclass, asdict, replace
from typing import Dict, Any
import yaml


# 覆盖 worker 数的环境变量（唯一允许的环境变量覆盖）
WORKERS_ENV_VAR = "SPHERELAB_WORKERS"


@dataclass
class LabConfig:
    """数值实验配置参数"""

    # ========== 容差参数 ==========
    coord_tol: float = 1e-12  # 判定两个输入坐标相等的容差
    output_tol: float = 1e-9  # 输出坐标比较容差（保步/保支撑检查）
    strict_margin: float = 1e-9  # 严格不等式 ">" 的最小余量
    support_tol: float = 0.0  # 支撑集提取阈值 |x_i| > tol
    bisection_tol: float = 1e-12  # 尾坐标二分求根容差
    bisection_max_iter: int = 200  # 二分最大迭代次数

    # ========== 规模参数 ==========
    dense_limit: int = 10_000_000  # 稠密向量物化上限
    exact_symmetrize_max_k: int = 8  # 精确对称化允许的最大维数（k! 项）
    scan_limit: int = 100_000_000  # 一般范数增长集扫描上限

    # ========== 采样参数 ==========
    random_seed: int = 42  # 随机种子
    random_pairs: int = 200  # 模连续性下界中随机点对数量
    trials: int = 1000  # 扫描类实验默认试验次数

    # ========== 并行参数 ==========
    workers: int = 1  # 进程池大小（1 表示串行）

    @classmethod
    def from_yaml(cls, file_path: str) -> "LabConfig":
        """从 YAML 文件加载配置"""
        with open(file_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
        return cls(**data)

    def to_yaml(self, file_path: str):
        """保存配置到 YAML 文件"""
        with open(file_path, 'w', encoding='utf-8') as f:
            yaml.dump(asdict(self), f, allow_unicode=True, default_flow_style=False)

    def with_env_overrides(self) -> "LabConfig":
        """应用环境变量覆盖（仅 worker 数）"""
        raw = os.getenv(WORKERS_ENV_VAR)
        if not raw:
            return self
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"环境变量 {WORKERS_ENV_VAR} 必须是整数，实际为 {raw!r}")
        return replace(self, workers=workers)

    def tolerances(self) -> Dict[str, Any]:
        """供 meta.json 记录的容差汇总"""
        return {
            "coord_tol": self.coord_tol,
            "output_tol": self.output_tol,
            "strict_margin": self.strict_margin,
            "support_tol": self.support_tol,
            "bisection_tol": self.bisection_tol,
            "bisection_max_iter": self.bisection_max_iter,
        }

    def validate(self):
        """验证配置参数的合理性"""
        assert self.coord_tol >= 0, "坐标相等容差必须非负"
        assert self.output_tol >= 0, "输出容差必须非负"
        assert self.strict_margin >= 0, "严格不等式余量必须非负"
        assert self.support_tol >= 0, "支撑阈值必须非负"
        assert self.bisection_tol > 0, "二分容差必须大于0"
        assert self.bisection_max_iter > 0, "二分迭代次数必须大于0"
        assert self.dense_limit > 0, "稠密上限必须大于0"
        assert 1 <= self.exact_symmetrize_max_k <= 10, "精确对称化维数必须在[1,10]之间"
        assert self.workers >= 1, "worker 数必须至少为1"
        return True
