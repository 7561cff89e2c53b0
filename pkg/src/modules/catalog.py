"""
目录模块 - 把 CLI / 清单中的字符串标识解析为范数预言机与映射工厂

范数: "l1"、"l2"、"lr:<r>"、"linf"
映射: "normalize"、"integral"、"integral-inverse"、"phi:id"、"phi:pow:<e>"、
      "phi:affine:<c>"、"mazur:<p>"、"const-uniform"
前缀: "abs+"、"sym(exact)+"、"sym(<n>,<seed>)+"，可叠加
"""
import logging
import re
from typing import Callable, Tuple

import numpy as np

from ..models.errors import CatalogError
from .maps import (
    SphereMap, abs_wrapper, constant_map, integral_homeo, integral_homeo_inverse,
    mazur_map, normalize_map, phi_map, symmetrize,
)
from .norms import LinfNorm, LrNorm, NormOracle

logger = logging.getLogger(__name__)

MapFactory = Callable[[int], SphereMap]

_SAMPLED_SYM = re.compile(r"^sym\((\d+),(\d+)\)\+")


def parse_oracle(name: str) -> NormOracle:
    """解析范数标识"""
    text = name.strip().lower()
    if text == "linf":
        return LinfNorm()
    if text in ("l1", "l2", "l3"):
        return LrNorm(float(text[1:]))
    if text.startswith("lr:"):
        try:
            r = float(text[3:])
        except ValueError:
            raise CatalogError(f"无法解析的 ℓ_r 指数: {name}")
        if not 1.0 <= r < float("inf"):
            raise CatalogError(f"ℓ_r 指数必须在 [1, ∞) 中: {name}")
        return LrNorm(r)
    raise CatalogError(f"未知的范数标识: {name}")


def _float_arg(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CatalogError(f"映射标识 {name} 中的参数 {text!r} 不是数值")


def _phi_function(spec: str, name: str) -> Callable[[np.ndarray], np.ndarray]:
    """phi:id / phi:pow:<e>（sign(t)|t|^e）/ phi:affine:<c>（c + t）"""
    parts = spec.split(":")
    if parts == ["id"]:
        return lambda t: np.asarray(t, dtype=np.float64)
    if len(parts) == 2 and parts[0] == "pow":
        e = _float_arg(parts[1], name)
        if e <= 0:
            raise CatalogError(f"φ 的幂指数必须为正: {name}")
        return lambda t: np.sign(t) * np.abs(t) ** e
    if len(parts) == 2 and parts[0] == "affine":
        c = _float_arg(parts[1], name)
        return lambda t: c + np.asarray(t, dtype=np.float64)
    raise CatalogError(f"未知的 φ 规格: {name}")


def _base_factory(name: str, oracle: NormOracle) -> MapFactory:
    if name == "normalize":
        return lambda k: normalize_map(k, oracle)
    if name == "integral":
        return integral_homeo
    if name == "integral-inverse":
        return integral_homeo_inverse
    if name == "const-uniform":
        return lambda k: constant_map(k, oracle)
    if name.startswith("phi:"):
        phi = _phi_function(name[4:], name)
        return lambda k: phi_map(k, phi, name=name)
    if name.startswith("mazur:"):
        p = _float_arg(name[6:], name)
        if p < 1:
            raise CatalogError(f"Mazur 指数必须 ≥ 1: {name}")
        return lambda k: mazur_map(p, k)
    raise CatalogError(f"未知的映射标识: {name}")


def split_wrappers(name: str) -> Tuple[Tuple[str, ...], str]:
    """把 "abs+sym(exact)+normalize" 拆成 (("abs", "sym(exact)"), "normalize")"""
    wrappers = []
    rest = name.strip()
    while True:
        if rest.startswith("abs+"):
            wrappers.append("abs")
            rest = rest[4:]
        elif rest.startswith("sym(exact)+"):
            wrappers.append("sym(exact)")
            rest = rest[len("sym(exact)+"):]
        elif _SAMPLED_SYM.match(rest):
            match = _SAMPLED_SYM.match(rest)
            wrappers.append(match.group(0)[:-1])
            rest = rest[match.end():]
        else:
            return tuple(wrappers), rest


def parse_map(name: str, oracle: NormOracle) -> MapFactory:
    """
    解析映射标识，返回 k → SphereMap 的工厂

    包装器按书写顺序从外到内：abs+sym(exact)+F 表示 abs(sym(F))。
    """
    wrappers, base = split_wrappers(name)
    factory = _base_factory(base, oracle)
    for wrapper in reversed(wrappers):
        factory = _wrap(factory, wrapper)
    logger.debug(f"映射标识解析: {name} → 包装器 {wrappers}，基础映射 {base}")
    return factory


def _wrap(inner: MapFactory, wrapper: str) -> MapFactory:
    if wrapper == "abs":
        return lambda k: abs_wrapper(inner(k))
    if wrapper == "sym(exact)":
        return lambda k: symmetrize(inner(k), mode="exact")
    match = re.match(r"^sym\((\d+),(\d+)\)$", wrapper)
    samples, seed = int(match.group(1)), int(match.group(2))
    return lambda k: symmetrize(inner(k), mode="sampled", samples=samples, seed=seed)


def map_uses_sampling(name: str) -> bool:
    """标识中是否含有需要种子的采样对称化"""
    return any(w.startswith("sym(") and w != "sym(exact)" for w in split_wrappers(name)[0])
