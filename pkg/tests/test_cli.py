"""Command-line interface: artifacts, exit codes, idempotence."""

import json

import pytest

from arglens.cli import main
from conftest import FIXTURE_DIR


@pytest.fixture()
def toy_model(tmp_path):
    path = tmp_path / "toy.json"
    assert main(["train", "--instance", "toy", "--out", str(path)]) == 0
    return path


@pytest.fixture()
def toy_input(tmp_path):
    path = tmp_path / "input.json"
    path.write_text(json.dumps({"vector": [0.9, 0.9, 0.9]}))
    return path


class TestExplain:
    def test_writes_document_and_bundle(self, tmp_path, toy_model, toy_input):
        out = tmp_path / "doc.json"
        bundle_out = tmp_path / "bundle.json"
        code = main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "toy", "--top-k", "3", "--out", str(out),
            "--bundle-out", str(bundle_out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["format"] == "graphical-interactive"
        intermediates = [a for a in doc["arguments"] if a["stratum"] == 2]
        assert len(intermediates) <= 6
        assert bundle_out.exists()

    def test_text_document_respects_top_k(self, tmp_path, text_corpus):
        _, docs, _ = text_corpus
        inp = tmp_path / "in.json"
        inp.write_text(json.dumps({"token_ids": docs[0]}))
        out = tmp_path / "explanation.json"
        code = main([
            "explain", "--model", str(FIXTURE_DIR / "text_model.json"), "--input", str(inp),
            "--instance", "text-cnn", "--top-k", "3", "--out", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert len([a for a in doc["arguments"] if a["stratum"] == 2]) <= 6

    def test_conversational_format(self, tmp_path, toy_model, toy_input):
        out = tmp_path / "conv.txt"
        code = main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "toy", "--format", "conversational", "--out", str(out),
        ])
        assert code == 0
        assert out.read_text().startswith("User:")

    def test_idempotent_byte_identical(self, tmp_path, toy_model, toy_input):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            main([
                "explain", "--model", str(toy_model), "--input", str(toy_input),
                "--instance", "toy", "--out", str(out),
            ])
        assert out1.read_bytes() == out2.read_bytes()

    def test_unknown_instance_is_validation_error(self, tmp_path, toy_model, toy_input):
        code = main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "rnn", "--out", str(tmp_path / "x.json"),
        ])
        assert code == 2

    def test_missing_model_is_validation_error(self, tmp_path, toy_input):
        code = main([
            "explain", "--model", str(tmp_path / "nope.json"), "--input", str(toy_input),
            "--instance", "toy", "--out", str(tmp_path / "x.json"),
        ])
        assert code == 2

    def test_wrong_architecture_is_validation_error(self, tmp_path, toy_model, toy_input):
        code = main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "text-cnn", "--out", str(tmp_path / "x.json"),
        ])
        assert code == 2


class TestCheck:
    def test_pass_verdict_on_toy_dialectical(self, tmp_path, toy_model, toy_input, capsys):
        bundle_out = tmp_path / "bundle.json"
        main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "toy", "--out", str(tmp_path / "d.json"),
            "--bundle-out", str(bundle_out),
        ])
        report_out = tmp_path / "report.json"
        code = main([
            "check", "--property", "dialectical-monotonicity",
            "--bundle", str(bundle_out), "--out", str(report_out),
        ])
        assert code == 0
        report = json.loads(report_out.read_text())
        assert report["verdict"] == "pass"
        assert "pass" in capsys.readouterr().out

    def test_additive_pass_on_text_bundle(self, tmp_path, text_corpus):
        _, docs, _ = text_corpus
        inp = tmp_path / "in.json"
        inp.write_text(json.dumps({"token_ids": docs[5]}))
        bundle_out = tmp_path / "b.json"
        main([
            "explain", "--model", str(FIXTURE_DIR / "text_model.json"), "--input", str(inp),
            "--instance", "text-cnn", "--out", str(tmp_path / "d.json"),
            "--bundle-out", str(bundle_out),
        ])
        report_out = tmp_path / "r.json"
        code = main([
            "check", "--property", "additive-monotonicity",
            "--bundle", str(bundle_out), "--out", str(report_out),
        ])
        assert code == 0
        assert json.loads(report_out.read_text())["verdict"] == "pass"

    def test_unknown_property_validation_error(self, tmp_path, toy_model, toy_input):
        bundle_out = tmp_path / "bundle.json"
        main([
            "explain", "--model", str(toy_model), "--input", str(toy_input),
            "--instance", "toy", "--out", str(tmp_path / "d.json"),
            "--bundle-out", str(bundle_out),
        ])
        assert main(["check", "--property", "nope", "--bundle", str(bundle_out)]) == 2

    def test_malformed_bundle_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"nodes\": []}")
        assert main(["check", "--property", "counter-factuality", "--bundle", str(bad)]) == 2


class TestTrainAndStats:
    def test_train_toy_round_trips(self, tmp_path):
        out = tmp_path / "toy.json"
        assert main(["train", "--instance", "toy", "--out", str(out)]) == 0
        from arglens.model import load_model

        net = load_model(out)
        assert net.neuron_count == 3 + 3 + 1

    def test_stats_subcommand(self, tmp_path):
        stats_out = tmp_path / "stats.json"
        clouds_out = tmp_path / "clouds.json"
        code = main([
            "stats", "--model", str(FIXTURE_DIR / "text_model.json"),
            "--corpus", str(FIXTURE_DIR / "text_corpus.json"),
            "--n-samples", "50", "--seed", "0",
            "--out", str(stats_out), "--clouds", str(clouds_out),
        ])
        assert code == 0
        stats = json.loads(stats_out.read_text())
        assert len(stats["filter_percentiles"]) == 20
        clouds = json.loads(clouds_out.read_text())
        assert set(clouds) == {f"f{j}" for j in range(20)}

    def test_stats_oversampling_validation_error(self, tmp_path):
        code = main([
            "stats", "--model", str(FIXTURE_DIR / "text_model.json"),
            "--corpus", str(FIXTURE_DIR / "text_corpus.json"),
            "--n-samples", "99999", "--out", str(tmp_path / "s.json"),
        ])
        assert code == 2


class TestFidelity:
    def test_fidelity_subcommand_writes_report(self, tmp_path):
        out = tmp_path / "fidelity.json"
        csv_out = tmp_path / "pairs.csv"
        code = main([
            "fidelity", "--model", str(FIXTURE_DIR / "text_model.json"),
            "--dataset", str(FIXTURE_DIR / "text_corpus.json"),
            "--instance", "text-cnn", "--pairs", "8", "--seed", "0",
            "--out", str(out), "--csv", str(csv_out),
        ])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["n_pairs"] == 8
        assert csv_out.exists()
