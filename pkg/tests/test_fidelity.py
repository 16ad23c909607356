"""Relative-difference metric, perturbations, and the fidelity protocol."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arglens.datasets import TABLE_FEATURES
from arglens.fidelity import (
    PerturbKind,
    deep_fidelity_eval,
    default_synonym_table,
    measure_costs,
    per_element_relative_difference,
    perturb,
    relative_difference,
)

vectors = st.lists(st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=1, max_size=12)


class TestRelativeDifference:
    def test_identical_vectors_zero(self):
        assert relative_difference([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_disjoint_support_two(self):
        assert relative_difference([1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_arithmetic_example(self):
        assert relative_difference([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(1.0 / 3.0)

    def test_both_zero_defined_as_zero(self):
        assert relative_difference([0.0, 0.0], [0.0, 0.0]) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            relative_difference([1.0], [1.0, 2.0])

    @given(vectors)
    @settings(max_examples=200, deadline=None)
    def test_self_distance_zero(self, v):
        assert relative_difference(v, v) == 0.0

    @given(vectors, vectors)
    @settings(max_examples=300, deadline=None)
    def test_bounds_and_symmetry(self, a, b):
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        d = relative_difference(a, b)
        assert 0.0 <= d <= 2.0
        assert d == relative_difference(b, a)

    def test_per_element_variant(self):
        assert per_element_relative_difference([1.0, 0.0], [1.0, 0.0]) == 0.0
        assert per_element_relative_difference([1.0, 0.0], [0.0, 1.0]) == 2.0


class TestPerturb:
    def test_zero_rate_substitution_is_identity(self):
        kind = PerturbKind(kind="token-substitute", rate=0.0, table=default_synonym_table())
        tokens = [5, 9, 3, 200]
        assert perturb(tokens, kind, seed=0) == tokens

    def test_substitution_uses_table_entries(self):
        table = default_synonym_table()
        kind = PerturbKind(kind="token-substitute", rate=1.0, table=table)
        tokens = [5, 9, 3, 200]
        out = perturb(tokens, kind, seed=1)
        assert len(out) == len(tokens)
        for before, after in zip(tokens, out):
            if after != before:
                assert after in table[before]

    def test_categorical_flip_hamming_distance_one(self):
        record = {f["name"]: f["values"][0] for f in TABLE_FEATURES}
        kind = PerturbKind(kind="categorical-flip", features=tuple(TABLE_FEATURES))
        for seed in range(20):
            flipped = perturb(record, kind, seed=seed)
            diffs = [k for k in record if flipped[k] != record[k]]
            assert len(diffs) == 1

    def test_gaussian_clamped_to_pixel_range(self):
        img = np.full((4, 4, 3), 250.0)
        kind = PerturbKind(kind="gaussian-pixel", std=10.0)
        out = perturb(img, kind, seed=0)
        assert out.shape == img.shape
        assert out.max() <= 255.0 and out.min() >= 0.0
        assert not np.array_equal(out, img)

    def test_same_seed_identical(self):
        kind = PerturbKind(kind="token-substitute", rate=0.7, table=default_synonym_table())
        tokens = list(range(1, 40))
        assert perturb(tokens, kind, seed=[3, 7]) == perturb(tokens, kind, seed=[3, 7])

    def test_incompatible_modality_rejected(self):
        kind = PerturbKind(kind="categorical-flip", features=tuple(TABLE_FEATURES))
        with pytest.raises(ValueError, match="record"):
            perturb([1, 2, 3], kind, seed=0)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            PerturbKind(kind="gaussian-pixel", std=0.0)
        with pytest.raises(ValueError):
            PerturbKind(kind="telepathy")


class TestProtocol:
    def test_identity_perturbation_reports_zero_reduction(self, text_net, text_corpus):
        _, docs, _ = text_corpus
        identity = PerturbKind(kind="token-substitute", rate=0.0, table={})
        report = deep_fidelity_eval(text_net, "text-cnn", docs[:10], n_pairs=10, seed=0, perturbation=identity)
        assert all(d == 0.0 for d in report.activation_drel)
        assert all(d == 0.0 for d in report.strength_drel)
        assert report.reduction == 0.0

    def test_conditioned_subset_and_bounds(self, text_net, text_corpus):
        _, docs, _ = text_corpus
        report = deep_fidelity_eval(text_net, "text-cnn", docs, n_pairs=40, seed=0)
        assert len(report.strength_drel_conditioned) <= len(report.strength_drel)
        for d in report.activation_drel + report.strength_drel:
            assert 0.0 <= d <= 2.0
        if report.strength_drel_conditioned:
            assert report.mean_strength_drel_conditioned <= report.mean_strength_drel

    def test_deterministic_given_seed(self, text_net, text_corpus):
        _, docs, _ = text_corpus
        r1 = deep_fidelity_eval(text_net, "text-cnn", docs, n_pairs=15, seed=4)
        r2 = deep_fidelity_eval(text_net, "text-cnn", docs, n_pairs=15, seed=4)
        assert r1.to_json() == r2.to_json()

    def test_tabular_protocol_runs(self, tabular_net, tabular_data):
        records, _ = tabular_data
        report = deep_fidelity_eval(tabular_net, "tabular-ffnn", records, n_pairs=30, seed=0)
        assert len(report.pairs) == 30
        if report.strength_drel_conditioned:
            assert report.mean_strength_drel_conditioned <= report.mean_strength_drel + 1e-12

    def test_image_protocol_runs(self, image_net, image_data):
        images, _ = image_data
        report = deep_fidelity_eval(image_net, "image-cnn", images[:20], n_pairs=12, seed=0)
        assert len(report.pairs) == 12
        for d in report.activation_drel:
            assert 0.0 <= d <= 2.0

    def test_no_qualifying_pairs_marks_empty(self, text_net, text_corpus):
        _, docs, _ = text_corpus
        report = deep_fidelity_eval(
            text_net, "text-cnn", docs[:5], n_pairs=5, seed=0,
            thresholds={"output": 0.0},  # nothing can qualify
        )
        assert report.empty
        assert report.reduction == 0.0

    def test_csv_and_histograms(self, text_net, text_corpus, tmp_path):
        _, docs, _ = text_corpus
        report = deep_fidelity_eval(text_net, "text-cnn", docs, n_pairs=10, seed=0)
        hist = report.histograms()
        assert len(hist["activation"]) == 40
        assert sum(hist["strength"]) == len(report.strength_drel)
        path = tmp_path / "pairs.csv"
        report.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 11  # header + one row per pair


class TestCosts:
    def test_linear_fit_on_small_family(self):
        from arglens import datasets, fixtures
        from arglens.training import init_network

        vocab, docs, _ = datasets.make_text_corpus(n_docs=1, seed=0)

        def make_net(size):
            return init_network(
                fixtures.text_arch(n_filters=size, vocab_size=len(vocab)),
                seed=0,
                metadata={"labels": list(datasets.TOPIC_LABELS), "vocab": vocab},
            )

        def make_input(size):
            return datasets.pad_tokens(docs[0], 150)

        report = measure_costs(make_net, make_input, sizes=(4, 8, 16), reps=5)
        assert report.prediction_ms > 0
        assert report.backward_ms > 0
        assert len(report.generation_ms) == 3
        assert report.generation_ms[0] < report.generation_ms[-1]
