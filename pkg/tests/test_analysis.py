"""
分析模块测试：发散表、模连续性下界、块范数蕴含、分离、定理流水线、集中检查
"""
import math

import numpy as np
import pytest

from src.models.entities import InterlacedPair, Profile, Verdict
from src.models.errors import BadTuple, HypothesisViolated, SphereLabError
from src.modules.analysis import (
    check_concentration, check_lemma32, check_local_property_q, check_partition_balance,
    check_separation, concentration_instance, divergence_pairs, divergence_point, divergence_sweep,
    lemma32_sweep, modulus_lower_bound, modulus_sweep, random_pairs, run_theorem_1_1, run_theorem_1_2,
    staircase_pairs,
)
from src.modules.maps import FunctionMap, constant_map, integral_homeo, normalize_map
from src.modules.norms import LrNorm
from src.modules.vectors import sup_distance
from src.modules.witnesses import build_growth_set


def weighted_map(k):
    weights = np.arange(1, k + 1, dtype=np.float64)
    return FunctionMap(k, lambda a: a * weights / np.sum(np.abs(a * weights)), LrNorm(1.0), name="weighted")


class TestDivergence:
    def test_point(self):
        x = divergence_point(5, 0.25)
        assert x.value_at(1) == 1.0
        assert x.value_at(4) == 0.25

    def test_sweep_value(self, l1):
        reports = divergence_sweep(lambda k: normalize_map(k, l1), [101], [0.1])
        assert reports[0].conclusion_value == pytest.approx(20 / 11)
        assert reports[0].threshold == pytest.approx(10 / 11)
        assert reports[0].passed

    def test_sweep_grid(self, l1):
        ks = [10 ** 2, 10 ** 4, 10 ** 6]
        reports = divergence_sweep(lambda k: normalize_map(k, l1), ks, [0.1, 0.01])
        assert len(reports) == 6
        assert all(r.passed for r in reports)
        # 固定 δ 下，k → ∞ 时像距离趋于 2
        big = [r for r in reports if r.inputs["k"] == 10 ** 6]
        assert all(r.conclusion_value > 1.99 for r in big)


class TestModulus:
    def test_staircase_witness_wins(self, l1):
        F = normalize_map(20, l1)
        estimate = modulus_lower_bound(F, 1.0, [divergence_pairs([0.1]), staircase_pairs(l1, 1)])
        assert estimate.lower_bound == pytest.approx(36 / 19)
        assert estimate.witness_source.startswith("staircase")
        assert estimate.witness_distance == pytest.approx(1.0)

    def test_pairs_above_t_skipped(self, l1):
        F = normalize_map(20, l1)
        estimate = modulus_lower_bound(F, 0.05, [divergence_pairs([0.1])])
        assert estimate.pairs_tried == 1
        assert estimate.pairs_skipped == 1
        assert estimate.witness_pair is None

    def test_random_pairs_stay_on_sphere(self):
        source = random_pairs(50, seed=3)
        for x, y, _ in source(12, 0.2):
            assert sup_distance(x, y) <= 0.2 + 1e-15
            assert np.max(np.abs(y.coords)) == pytest.approx(1.0)

    def test_sweep_deterministic(self, l1):
        sources = [random_pairs(20, seed=5)]
        first = modulus_sweep(lambda k: normalize_map(k, l1), [8, 16], 0.5, sources)
        second = modulus_sweep(lambda k: normalize_map(k, l1), [8, 16], 0.5, sources)
        assert [e.lower_bound for e in first] == [e.lower_bound for e in second]

    def test_invalid_t(self, l1):
        with pytest.raises(SphereLabError):
            modulus_lower_bound(normalize_map(4, l1), 0.0, [])

    def test_to_dict_omits_large_dense(self, l1):
        F = normalize_map(64, l1)
        estimate = modulus_lower_bound(F, 0.5, [random_pairs(5, seed=1)])
        data = estimate.to_dict(max_dense=10)
        assert data["witness_pair"][0] == {"dim": 64, "omitted": True}


class TestPartitionBalance:
    @pytest.mark.parametrize("r", [1.0, 1.5, 2.0, 3.0])
    def test_greedy_estimates(self, r):
        balance, lower = check_partition_balance(LrNorm(r), 2000)
        assert balance.checker == "partition_balance"
        assert balance.passed
        assert lower.passed
        assert balance.inputs["partition"] == "greedy"


class TestLemma32:
    def _growth(self, l1, evens):
        return build_growth_set(l1, evens, 1, 0.5)

    def test_q_is_p(self, l1, evens):
        report = check_lemma32(l1, evens, self._growth(l1, evens), (1,), (19,), [1 / 9], "P")
        assert report.passed
        assert report.conclusion_value == pytest.approx(1 / 9)
        assert report.threshold == pytest.approx(1 / 8)

    def test_q_is_complement(self, l1, evens):
        report = check_lemma32(l1, evens, self._growth(l1, evens), (1,), (19,), [1 / 10], "Pc")
        assert report.passed
        assert report.conclusion_value == pytest.approx(1 / 10)

    def test_premises_fail(self, l1, evens):
        report = check_lemma32(l1, evens, self._growth(l1, evens), (1,), (19,), [2.0], "Pc")
        assert report.verdict == Verdict.HYPOTHESIS_NOT_MET
        assert report.notes["failed_hypothesis"] == "premise"

    def test_elements_outside_growth_set(self, l1, evens):
        with pytest.raises(BadTuple):
            check_lemma32(l1, evens, self._growth(l1, evens), (1,), (20,), [0.1], "P")

    @pytest.mark.parametrize("r", [1.0, 2.0])
    @pytest.mark.parametrize("eps", [0.25, 0.5])
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_sweep(self, d, eps, r):
        report = lemma32_sweep(LrNorm(r), d, eps, trials=1000, seed=d)
        assert report.passed
        assert report.hypothesis_values["failures"] == 0
        assert 0 < report.conclusion_value <= eps / 4 + 1e-9
        assert report.inputs["growth_elements"][1] == report.inputs["a"]


class TestSeparation:
    def test_normalize_l1(self, l1, evens):
        k = 362
        pair = InterlacedPair(1, (1,), (19,), k)
        report = check_separation(normalize_map(k, l1), pair, Profile.y_profile(1), evens, 0.5)
        assert report.passed
        assert report.conclusion_value == pytest.approx(36 / 19)
        assert report.hypothesis_values["item_i"] <= 0.125
        assert report.notes["domain_distance"] == pytest.approx(1.0)

    def test_non_step_map_rejected(self, evens):
        pair = InterlacedPair(1, (1,), (19,), 20)
        with pytest.raises(HypothesisViolated) as info:
            check_separation(weighted_map(20), pair, Profile.y_profile(1), evens, 0.5)
        assert info.value.hypothesis == "step_preserving"
        assert info.value.report.verdict == Verdict.HYPOTHESIS_NOT_MET


class TestTheorem11:
    @pytest.mark.parametrize("d,k", [(1, 20), (2, 6860)])
    def test_normalize(self, l1, d, k):
        report = run_theorem_1_1(lambda n: normalize_map(n, l1), d)
        assert report.inputs["k"] == k
        assert report.passed
        assert report.conclusion_value >= 0.5

    def test_normalize_d1_value(self, l1):
        report = run_theorem_1_1(lambda n: normalize_map(n, l1), 1)
        assert report.conclusion_value == pytest.approx(36 / 19)
        assert report.notes["cross_check_max_diff"] < 1e-9

    @pytest.mark.parametrize("d", [1, 2])
    def test_integral(self, d):
        report = run_theorem_1_1(integral_homeo, d)
        assert report.passed
        assert report.inputs["growth_elements"][:2] == [1, 19]

    def test_integral_d3_scale(self):
        report = run_theorem_1_1(integral_homeo, 3)
        assert report.inputs["k"] == 2476100
        assert report.passed
        assert report.notes["cross_check_max_diff"] < 1e-9

    def test_abs_pipeline(self, l1):
        report = run_theorem_1_1(lambda n: normalize_map(n, l1), 1, pipeline="abs")
        assert report.passed
        assert report.inputs["map"] == "abs+normalize"

    def test_unknown_pipeline(self, l1):
        with pytest.raises(SphereLabError):
            run_theorem_1_1(lambda n: normalize_map(n, l1), 1, pipeline="sideways")

    def test_support_change_detected(self, l1):
        with pytest.raises(HypothesisViolated):
            run_theorem_1_1(lambda n: constant_map(n, l1), 1)


class TestTheorem12:
    def test_l1(self, l1):
        report = run_theorem_1_2(normalize_map(362, l1), 1)
        assert report.passed
        assert report.hypothesis_values["t_root"] == pytest.approx(0.5, abs=1e-9)
        assert report.conclusion_value == pytest.approx(36 / 19)
        assert report.notes["pair"] == {"m": [1], "n": [19], "k": 362}

    def test_l2(self, l2):
        report = run_theorem_1_2(normalize_map(362, l2), 1)
        assert report.passed
        assert report.inputs["a"] == 361
        assert report.conclusion_value == pytest.approx(math.sqrt(684 / 361))

    def test_factory_uses_default_k(self, l1):
        report = run_theorem_1_2(lambda k: normalize_map(k, l1), 1)
        assert report.inputs["k"] == 20

    def test_constant_map_rejected(self, l1):
        with pytest.raises(HypothesisViolated) as info:
            run_theorem_1_2(constant_map(20, l1), 1)
        assert info.value.hypothesis == "distinct_endpoints"


class TestConcentration:
    def test_instance(self, l1):
        growth, m, k = concentration_instance(l1, 1, 0.5)
        assert growth.a == 66
        assert m == (66,)
        assert k == 287496

    def test_branch_a_for_normalize(self, l1):
        growth, m, k = concentration_instance(l1, 1, 0.5)
        report = check_concentration(normalize_map(k, l1), m, k, growth=growth, random_count=0, seed=0)
        assert report.verdict == Verdict.HYPOTHESIS_NOT_MET
        assert report.notes["branch"] == "A"
        assert report.conclusion_value == pytest.approx(2 * (1 - 1 / 4356))

    def test_branch_b_for_constant(self, l1):
        growth, m, k = concentration_instance(l1, 1, 0.5)
        report = check_concentration(constant_map(k, l1), m, k, growth=growth, random_count=0, seed=0)
        assert report.notes["branch"] == "B"
        assert report.passed
        assert report.conclusion_value == pytest.approx(0.0, abs=1e-12)

    def test_local_q_records_gamma(self, l1):
        growth, m, k = concentration_instance(l1, 1, 0.5)
        report = check_local_property_q(constant_map(k, l1), 0.25, m, k, growth=growth, random_count=0)
        assert report.checker == "local_property_q"
        assert report.inputs["gamma"] == 0.25
        assert report.hypothesis_values["modulus_threshold"] == pytest.approx(0.125)

    def test_local_q_invalid_gamma(self, l1):
        with pytest.raises(SphereLabError):
            check_local_property_q(constant_map(10, l1), 0.0)

    def test_negative_image_rejected(self, l1):
        F = FunctionMap(20, lambda a: -np.ones_like(a) / a.size, l1, name="negative")
        with pytest.raises(HypothesisViolated) as info:
            check_concentration(F, (1,), 20, random_count=0)
        assert info.value.hypothesis == "positive_image"
