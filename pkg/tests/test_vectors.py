"""
向量模块测试
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.errors import DimensionTooLarge, DimMismatch, SphereLabError
from src.modules.vectors import (
    DenseVector, PcpVector, SupportSet, from_dense, is_nonnegative, materialize, parity_counts,
    restrict, same_support, subtract, sup_distance, sup_norm, support, support_size, value_counts,
    vector_from_json,
)

LEVELS = [-1.0, -0.5, 0.0, 0.25, 0.5, 1.0]


@st.composite
def pcp_vectors(draw, max_dim=40):
    dim = draw(st.integers(1, max_dim))
    cuts = sorted(draw(st.sets(st.integers(1, dim - 1), max_size=6))) if dim > 1 else []
    bounds = [0] + cuts + [dim]
    segs = []
    for lo, hi in zip(bounds, bounds[1:]):
        segs.append((lo + 1, hi, draw(st.sampled_from(LEVELS)), draw(st.sampled_from(LEVELS))))
    return PcpVector(dim, tuple(segs))


@st.composite
def pcp_pairs(draw):
    u = draw(pcp_vectors())
    dim = u.dim
    cuts = sorted(draw(st.sets(st.integers(1, dim - 1), max_size=6))) if dim > 1 else []
    bounds = [0] + cuts + [dim]
    segs = tuple((lo + 1, hi, draw(st.sampled_from(LEVELS)), draw(st.sampled_from(LEVELS)))
                 for lo, hi in zip(bounds, bounds[1:]))
    return u, PcpVector(dim, segs)


class TestParityCounts:
    def test_counts(self):
        assert parity_counts(1, 10) == (5, 5)
        assert parity_counts(2, 2) == (1, 0)
        assert parity_counts(3, 7) == (2, 3)
        assert parity_counts(5, 4) == (0, 0)


class TestPcpVector:
    def test_constant_and_basis(self):
        v = PcpVector.constant(5, 2.0)
        assert v.segments == ((1, 5, 2.0, 2.0),)
        e3 = PcpVector.basis(5, 3)
        np.testing.assert_array_equal(materialize(e3).coords, [0, 0, 1, 0, 0])

    def test_basis_out_of_range(self):
        with pytest.raises(SphereLabError):
            PcpVector.basis(4, 5)

    def test_segments_must_cover(self):
        with pytest.raises(SphereLabError):
            PcpVector(5, ((1, 2, 0.0, 0.0), (4, 5, 1.0, 1.0)))
        with pytest.raises(SphereLabError):
            PcpVector(5, ((1, 4, 0.0, 0.0),))

    def test_non_finite_rejected(self):
        with pytest.raises(SphereLabError):
            PcpVector(3, ((1, 3, float("nan"), 0.0),))

    def test_parity_pattern(self):
        # 偶数下标取 val_even
        v = PcpVector(4, ((1, 4, 1.0, -1.0),))
        np.testing.assert_array_equal(materialize(v).coords, [-1.0, 1.0, -1.0, 1.0])
        assert v.value_at(2) == 1.0
        assert v.value_at(3) == -1.0

    def test_canonical_form_merges_equal_runs(self):
        a = PcpVector(6, ((1, 2, 1.0, 1.0), (3, 6, 1.0, 1.0)))
        b = PcpVector.constant(6, 1.0)
        assert a == b

    def test_is_non_increasing(self):
        assert from_dense([1.0, 1.0, 0.5, 0.0]).is_non_increasing()
        assert not from_dense([0.5, 1.0]).is_non_increasing()
        assert not PcpVector(4, ((1, 4, 1.0, 0.0),)).is_non_increasing()

    def test_json(self):
        v = PcpVector(7, ((1, 3, 0.5, 1.0), (4, 7, 0.0, 0.0)))
        assert vector_from_json(v.to_json()) == v
        dense = vector_from_json([1.0, 2.0])
        assert isinstance(dense, DenseVector)

    @given(pcp_vectors())
    def test_materialize_then_encode_is_canonical(self, v):
        assert from_dense(materialize(v)) == v

    def test_materialize_limit(self):
        with pytest.raises(DimensionTooLarge):
            materialize(PcpVector.constant(100, 1.0), dense_limit=10)


class TestDenseVector:
    def test_rejects_empty_and_nan(self):
        with pytest.raises(SphereLabError):
            DenseVector(np.array([]))
        with pytest.raises(SphereLabError):
            DenseVector(np.array([1.0, np.inf]))

    def test_read_only(self):
        v = DenseVector(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            v.coords[0] = 3.0


class TestOperations:
    @given(pcp_pairs())
    def test_subtract_matches_dense(self, pair):
        u, v = pair
        expected = materialize(u).coords - materialize(v).coords
        np.testing.assert_array_equal(materialize(subtract(u, v)).coords, expected)

    @given(pcp_pairs())
    def test_sup_distance_matches_dense(self, pair):
        u, v = pair
        assert sup_distance(u, v) == sup_distance(materialize(u), materialize(v))

    @given(pcp_vectors())
    def test_value_counts_matches_dense(self, v):
        values, counts = value_counts(v)
        d_values, d_counts = value_counts(materialize(v))
        np.testing.assert_array_equal(values, d_values)
        np.testing.assert_array_equal(counts, d_counts)

    @given(pcp_vectors(), st.data())
    @settings(max_examples=50)
    def test_restrict_matches_dense(self, v, data):
        lo = data.draw(st.integers(1, v.dim))
        hi = data.draw(st.integers(lo - 1, v.dim))
        restricted = restrict(v, lo, hi)
        dense = restrict(materialize(v), lo, hi)
        np.testing.assert_array_equal(materialize(restricted).coords, dense.coords)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            subtract(PcpVector.constant(3, 1.0), PcpVector.constant(4, 1.0))

    def test_sup_norm_and_sign(self):
        v = from_dense([0.0, -2.0, 1.0])
        assert sup_norm(v) == 2.0
        assert not is_nonnegative(v)
        assert is_nonnegative(from_dense([0.0, 1e-13]), tol=0.0)


class TestSupport:
    @given(pcp_vectors())
    def test_support_matches_dense(self, v):
        assert support(v) == support(materialize(v))
        assert support_size(v) == support(materialize(v)).size

    def test_same_support(self):
        x = from_dense([1.0, 0.0, 0.5])
        y = DenseVector(np.array([0.3, 0.0, 0.7]))
        assert same_support(x, y)
        assert not same_support(x, from_dense([1.0, 0.1, 0.5]))

    def test_support_set(self):
        s = SupportSet.from_indices(6, [4, 2, 2])
        assert s.to_list() == [2, 4]
        assert 4 in s and 3 not in s
        with pytest.raises(SphereLabError):
            SupportSet(3, np.array([0, 1]))

    def test_large_pcp_support_size(self):
        v = PcpVector(10 ** 8, ((1, 10 ** 8, 1.0, 0.0),))
        assert support_size(v) == 5 * 10 ** 7
        with pytest.raises(DimensionTooLarge):
            support(v)
