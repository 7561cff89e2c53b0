"""
实验引擎模块 - 模板方法模式

- BaseExperiment: 抽象基类，定义任务构建、执行与汇总流程
- EXPERIMENTS: 实验标识到具体实验类的注册表
"""

from .base import BaseExperiment
from .experiments import EXPERIMENTS, create_experiment
from .manifest import ExperimentManifest, load_manifest

__all__ = [
    'BaseExperiment',
    'EXPERIMENTS',
    'ExperimentManifest',
    'create_experiment',
    'load_manifest',
]
