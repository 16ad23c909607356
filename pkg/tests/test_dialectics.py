"""Strength-set ordering and the three dialectical property checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arglens.dialectics import (
    check_additive_monotonicity,
    check_counterfactuality,
    check_dialectical_monotonicity,
    strength_set_eq,
    strength_set_leq,
    strength_set_lt,
)
from arglens.explainers import ToyExplainer
from arglens.gaf import Argument, ArgumentGraph

from oracle import injective_leq_exhaustive

values = st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=0, max_size=7)


class TestStrengthSetOrder:
    def test_empty_set_below_everything(self):
        assert strength_set_leq([], [0.1])
        assert strength_set_leq([], [])

    def test_single_non_dominated(self):
        assert not strength_set_leq([0.3], [0.2])

    def test_pairwise_example(self):
        assert strength_set_leq([0.1, 0.4], [0.2, 0.5])
        assert injective_leq_exhaustive([0.1, 0.4], [0.2, 0.5])

    @given(values, values)
    @settings(max_examples=1000, deadline=None)
    def test_greedy_equals_exhaustive(self, a, b):
        assert strength_set_leq(a, b) == injective_leq_exhaustive(a, b)

    @given(values)
    @settings(max_examples=200, deadline=None)
    def test_reflexive(self, a):
        assert strength_set_leq(a, a)

    @given(values, values, values)
    @settings(max_examples=300, deadline=None)
    def test_transitive(self, a, b, c):
        if strength_set_leq(a, b) and strength_set_leq(b, c):
            assert strength_set_leq(a, c)

    def test_strict_and_equal(self):
        assert strength_set_lt([0.1], [0.2])
        assert not strength_set_lt([0.2], [0.2])
        assert strength_set_eq([0.2, 0.7], [0.7, 0.2])
        assert strength_set_lt([0.5], [0.5, 0.2])  # strict superset dominates


def graph(edges, strata=3):
    """Small tree builder: edges as (child, parent, relation)."""
    args = [Argument(id="output", node="out", label="out", stratum=strata)]
    level = {"output": strata}
    for child, parent, relation in edges:
        stratum = level[parent] - 1
        args.append(Argument(id=child, node=child.split("@")[0], label=child, stratum=stratum,
                             parent=parent, relation=relation))
        level[child] = stratum
    return ArgumentGraph(arguments=tuple(args), strata_sizes=(4, 3, 1))


class TestDialecticalMonotonicity:
    def test_passes_on_toy_tanh_activation_strengths(self, toy_net):
        bundle = ToyExplainer().fit(toy_net).explain([0.9, 0.9, 0.9])
        report = check_dialectical_monotonicity(bundle.gaf, bundle.strengths)
        assert report.verdict == "pass"
        assert report.checked == len(bundle.gaf) * (len(bundle.gaf) - 1)

    def test_first_clause_satisfied_pair(self):
        """Fewer attackers, equal supporters, strictly greater strength."""
        g = graph([
            ("a", "output", "support"), ("b", "output", "support"),
            ("a1@a", "a", "attack"), ("b1@b", "b", "attack"), ("b2@b", "b", "attack"),
        ])
        sigma = {"output": 1.0, "a": 0.8, "b": 0.5, "a1@a": 0.5, "b1@b": 0.5, "b2@b": 0.2}
        report = check_dialectical_monotonicity(g, sigma, restrict=[("a", "b")])
        assert report.verdict == "pass"

    def test_equal_sets_unequal_strengths_fail(self):
        g = graph([
            ("a", "output", "support"), ("b", "output", "support"),
            ("a1@a", "a", "attack"), ("b1@b", "b", "attack"),
        ])
        sigma = {"output": 1.0, "a": 0.8, "b": 0.5, "a1@a": 0.4, "b1@b": 0.4}
        report = check_dialectical_monotonicity(g, sigma, restrict=[("a", "b")])
        assert report.verdict == "fail"
        assert report.counterexamples[0]["pair"] == ["a", "b"]
        assert "equal" in report.counterexamples[0]["violated"]

    def test_rerun_restricted_to_counterexamples_reproduces_them(self, toy_net):
        g = graph([
            ("a", "output", "support"), ("b", "output", "support"),
            ("a1@a", "a", "attack"), ("b1@b", "b", "attack"),
        ])
        sigma = {"output": 1.0, "a": 0.8, "b": 0.5, "a1@a": 0.4, "b1@b": 0.4}
        full = check_dialectical_monotonicity(g, sigma)
        assert full.verdict == "fail"
        pairs = [tuple(c["pair"]) for c in full.counterexamples]
        again = check_dialectical_monotonicity(g, sigma, restrict=pairs)
        assert [tuple(c["pair"]) for c in again.counterexamples] == pairs
        assert again.checked == len(pairs)


class TestAdditiveMonotonicity:
    def test_text_fixture_passes(self, text_net, text_corpus):
        from arglens.explainers import TextCnnExplainer

        _, docs, _ = text_corpus
        bundle = TextCnnExplainer(attach_reports=False).fit(text_net).explain(docs[0])
        report = check_additive_monotonicity(bundle.gaf, bundle.strengths, 1e-6)
        assert report.verdict == "pass"

    def test_toy_activation_strengths_fail(self, toy_net):
        bundle = ToyExplainer().fit(toy_net).explain([0.9, 0.9, 0.9])
        report = check_additive_monotonicity(bundle.gaf, bundle.strengths)
        assert report.verdict == "fail"

    def test_image_root_additivity(self, image_net, image_data):
        from arglens.explainers import ImageCnnExplainer

        images, _ = image_data
        bundle = ImageCnnExplainer(attach_reports=False).fit(image_net).explain(images[0])
        report = check_additive_monotonicity(bundle.gaf, bundle.strengths, 1e-6)
        assert report.verdict == "pass"

    def test_leaves_exempt(self):
        g = graph([("a", "output", "support")])
        sigma = {"output": 0.7, "a": 0.7}
        report = check_additive_monotonicity(g, sigma)
        assert report.verdict == "pass"
        assert report.checked == 1  # only the root has incoming relations
        assert "leaf arguments exempt" in report.notes

    def test_critical_supporters_count_as_supporters(self):
        g = graph([("a", "output", "critical-support"), ("b", "output", "attack")])
        sigma = {"output": 0.5, "a": 0.8, "b": 0.3}
        report = check_additive_monotonicity(g, sigma)
        assert report.verdict == "pass"


class TestCounterFactuality:
    def test_tabular_fixture_passes(self, tabular_net, tabular_data):
        from arglens.explainers import TabularFfnnExplainer

        records, _ = tabular_data
        explainer = TabularFfnnExplainer(attach_reports=False).fit(tabular_net)
        seen_critical = 0
        for record in records[:60]:
            bundle = explainer.explain(record)
            report = check_counterfactuality(bundle.gaf, bundle.strengths)
            assert report.verdict in ("pass", "not-applicable")
            seen_critical += report.checked
        assert seen_critical > 0

    def test_without_critical_support_not_applicable(self, toy_net):
        bundle = ToyExplainer().fit(toy_net).explain([0.9, 0.9, 0.9])
        report = check_counterfactuality(bundle.gaf, bundle.strengths)
        assert report.verdict == "not-applicable"

    def test_zero_supported_strength_fails_with_edge_named(self):
        g = graph([("a", "output", "critical-support")])
        sigma = {"output": 0.0, "a": 0.5}
        report = check_counterfactuality(g, sigma)
        assert report.verdict == "fail"
        assert report.counterexamples[0]["edge"] == ["a", "output"]
        assert "positive" in report.counterexamples[0]["violated"]

    def test_weak_critical_supporter_fails(self):
        g = graph([("a", "output", "critical-support")])
        sigma = {"output": 0.9, "a": 0.5}
        report = check_counterfactuality(g, sigma)
        assert report.verdict == "fail"
