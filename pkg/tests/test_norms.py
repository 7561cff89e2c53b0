"""
范数模块测试
"""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.models.errors import NotBlockSequence, SphereLabError
from src.modules.norms import (
    EVENS, CallableNorm, LinfNorm, LrNorm, check_block_estimates, partition_norms, psi, psi_partition,
)
from src.modules.vectors import DenseVector, PcpVector, SupportSet, materialize

from .test_vectors import pcp_vectors


class TestLrNorm:
    def test_values(self, l1, l2):
        v = DenseVector(np.array([3.0, -4.0]))
        assert l1.eval(v) == 7.0
        assert l2.eval(v) == 5.0
        assert LinfNorm().eval(v) == 4.0

    def test_invalid_exponent(self):
        with pytest.raises(SphereLabError):
            LrNorm(0.5)
        with pytest.raises(SphereLabError):
            LrNorm(math.inf)

    def test_names(self):
        assert LrNorm(1.0).name == "l1"
        assert LrNorm(1.5).name == "l1.5"
        assert LinfNorm().name == "linf"

    @given(pcp_vectors(), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    def test_pcp_matches_dense(self, v, r):
        oracle = LrNorm(r)
        assert oracle.eval(v) == pytest.approx(oracle.eval(materialize(v)), rel=1e-12, abs=1e-15)

    @given(pcp_vectors())
    def test_linf_pcp_matches_dense(self, v):
        assert LinfNorm().eval(v) == LinfNorm().eval(materialize(v))

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.data())
    def test_unconditional(self, coords, data):
        # 缩小任一坐标的绝对值不会增大范数
        x = np.array(coords)
        shrink = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=len(coords), max_size=len(coords))))
        for oracle in (LrNorm(1.0), LrNorm(2.0), LrNorm(3.0), LinfNorm()):
            assert oracle.eval(DenseVector(x * shrink)) <= oracle.eval(DenseVector(x)) + 1e-12

    def test_huge_pcp(self, l1, l2):
        k = 10 ** 8
        v = PcpVector(k, ((1, k, 1.0, 0.0),))
        assert l1.eval(v) == 5e7
        assert l2.eval(v) == pytest.approx(math.sqrt(5e7))


class TestFundamentalFunction:
    def test_exact_roots(self, l1, l2):
        assert psi(l1, 19) == 19.0
        assert psi(l2, 361) == 19.0
        assert psi(LrNorm(3.0), 27) == 3.0
        assert psi(LinfNorm(), 10) == 1.0

    def test_memoized(self, l2):
        psi(l2, 50)
        assert 50 in l2.fundamental.values

    def test_invalid(self, l1):
        with pytest.raises(SphereLabError):
            psi(l1, 0)


class TestPartitionNorms:
    def test_evens(self, l1, l2):
        assert psi_partition(l1, EVENS, 5) == 2.0
        assert psi_partition(l2, EVENS, 4) == pytest.approx(math.sqrt(2.0))
        assert partition_norms(l1, EVENS, 5) == (2.0, 3.0)

    def test_explicit_set(self, l1):
        members = SupportSet(6, np.array([1, 3, 5]))
        assert partition_norms(l1, members, 6) == (3.0, 3.0)

    def test_non_symmetric_evens(self):
        weighted = CallableNorm("weighted", lambda a: float(np.sum(np.abs(a) * np.arange(1, a.size + 1))),
                                block_q=1.0, block_p=1.0)
        # 偶数下标 2+4 = 6，奇数下标 1+3+5 = 9
        assert partition_norms(weighted, EVENS, 5) == (6.0, 9.0)

    def test_unknown_label(self, l1):
        with pytest.raises(SphereLabError):
            partition_norms(l1, "odds", 4)


class TestBlockEstimates:
    def _blocks(self, k=12, size=3):
        blocks = []
        for start in range(0, k, size):
            arr = np.zeros(k)
            arr[start:start + size] = np.linspace(0.2, 1.0, size)
            blocks.append(DenseVector(arr))
        return blocks

    @pytest.mark.parametrize("r", [1.0, 1.5, 2.0, 3.0])
    def test_lr_passes(self, r):
        report = check_block_estimates(LrNorm(r), self._blocks())
        assert report.passed
        assert report.direction == "between"

    def test_wrong_declared_exponents_detected(self):
        fake = CallableNorm("l1-as-l2", lambda a: float(np.sum(np.abs(a))), block_q=2.0, block_p=2.0)
        report = check_block_estimates(fake, self._blocks())
        assert not report.passed

    def test_overlapping_blocks(self, l1):
        a = DenseVector(np.array([1.0, 1.0, 0.0]))
        b = DenseVector(np.array([0.0, 1.0, 1.0]))
        with pytest.raises(NotBlockSequence):
            check_block_estimates(l1, [a, b])

    def test_empty(self, l1):
        with pytest.raises(NotBlockSequence):
            check_block_estimates(l1, [])

    def test_callable_norm_validation(self):
        with pytest.raises(SphereLabError):
            CallableNorm("bad", lambda a: 0.0, block_q=3.0, block_p=2.0)
