"""
目录模块测试
"""
import numpy as np
import pytest

from src.models.errors import CatalogError
from src.modules.catalog import map_uses_sampling, parse_map, parse_oracle, split_wrappers
from src.modules.norms import LinfNorm, LrNorm
from src.modules.vectors import DenseVector, PcpVector, materialize


class TestParseOracle:
    @pytest.mark.parametrize("name,expected", [("l1", "l1"), ("L2", "l2"), ("lr:1.5", "l1.5"), ("lr:3", "l3")])
    def test_lr(self, name, expected):
        assert parse_oracle(name).name == expected

    def test_linf(self):
        assert isinstance(parse_oracle("linf"), LinfNorm)

    @pytest.mark.parametrize("name", ["l0", "lr:0.5", "lr:x", "lr:inf", "sobolev"])
    def test_invalid(self, name):
        with pytest.raises(CatalogError):
            parse_oracle(name)


class TestParseMap:
    def test_wrappers_order(self):
        assert split_wrappers("abs+sym(exact)+normalize") == (("abs", "sym(exact)"), "normalize")
        assert split_wrappers("sym(200,7)+integral") == (("sym(200,7)",), "integral")

    def test_normalize(self):
        F = parse_map("normalize", LrNorm(1.0))(19)
        assert F.dim == 19
        assert F.image_distance(PcpVector.basis(19, 1), PcpVector.constant(19, 1.0)) == pytest.approx(36 / 19)

    def test_integral_pair(self):
        F = parse_map("integral", LrNorm(1.0))(2)
        G = parse_map("integral-inverse", LrNorm(1.0))(2)
        y = F(DenseVector(np.array([1.0, 0.5])))
        np.testing.assert_allclose(G(y).coords, [1.0, 0.5])

    def test_phi_pow(self):
        F = parse_map("phi:pow:2", LrNorm(1.0))(3)
        out = F(DenseVector(np.array([1.0, -0.5, 0.0])))
        np.testing.assert_allclose(out.coords, [0.8, -0.2, 0.0])

    def test_mazur(self):
        F = parse_map("mazur:1", LrNorm(2.0))(2)
        assert F.target_oracle.name == "l2"

    def test_wrapped(self):
        F = parse_map("abs+sym(exact)+normalize", LrNorm(1.0))(3)
        assert F.name.startswith("abs+sym")
        out = materialize(F(PcpVector.constant(3, 1.0)))
        np.testing.assert_allclose(out.coords, [1 / 3] * 3)

    @pytest.mark.parametrize("name", ["rotate", "phi:pow:-1", "phi:log", "mazur:0.5", "mazur:x", "abs+"])
    def test_invalid(self, name):
        with pytest.raises(CatalogError):
            parse_map(name, LrNorm(1.0))

    def test_sampling_detection(self):
        assert map_uses_sampling("abs+sym(10,3)+normalize")
        assert not map_uses_sampling("abs+sym(exact)+normalize")
        assert not map_uses_sampling("integral")
