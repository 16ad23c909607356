"""Command-line interface.

Subcommands: train (fixture generation), explain, check, fidelity,
stats, costs. Exit codes: 0 success, 2 validation error, 1 internal
error. All randomness flows from --seed (default 0) and every run logs
its resolved configuration, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import datasets, fixtures
from .dialectics import PROPERTIES, check_property
from .errors import ArglensError
from .explainers import bundle_from_json, explainer_for
from .fidelity import deep_fidelity_eval, measure_costs, save_report_json
from .model import load_model, save_model
from .render import (
    build_reference_stats,
    build_word_clouds,
    dumps_canonical,
    prune_top_k,
    render_conversational,
    render_graphical,
)
from .training import init_network

log = logging.getLogger("arglens")

INSTANCES = ("text-cnn", "image-cnn", "tabular-ffnn", "toy")


class ValidationFailure(Exception):
    """User input problem: bad flags, unreadable files, schema issues."""


def _read_json(path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationFailure(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"{what} file {path} is not valid JSON: {exc}")


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(doc))


def _load_net(path):
    try:
        return load_model(path)
    except FileNotFoundError:
        raise ValidationFailure(f"model file not found: {path}")
    except (ArglensError, json.JSONDecodeError, ValueError) as exc:
        raise ValidationFailure(f"model bundle {path} rejected: {exc}")


def _parse_input(doc: dict, instance: str):
    keys = {"text-cnn": ("tokens", "token_ids"), "image-cnn": ("pixels",),
            "tabular-ffnn": ("record", "onehot"), "toy": ("vector",)}[instance]
    for key in keys:
        if key in doc:
            return doc[key]
    raise ValidationFailure(f"input for {instance} needs one of {keys}")


# -- subcommands ------------------------------------------------------------


def _epochs(args) -> dict:
    return {} if args.epochs is None else {"epochs": args.epochs}


def _cmd_train(args) -> int:
    seed = args.seed
    if args.instance == "toy":
        net = fixtures.build_toy_fixture()
        save_model(net, args.out)
        log.info("wrote fixed toy fixture to %s", args.out)
        return 0
    if args.instance == "text-cnn":
        result, vocab, docs, labels = fixtures.build_text_fixture(
            seed=seed, n_filters=args.filters or 20, **_epochs(args)
        )
        if args.dataset_out:
            datasets.save_text_dataset(args.dataset_out, vocab, docs, labels)
    elif args.instance == "image-cnn":
        result, images, labels = fixtures.build_image_fixture(
            seed=seed, n_filters=args.filters or 12, **_epochs(args)
        )
        if args.dataset_out:
            datasets.save_image_dataset(args.dataset_out, images, labels)
    else:  # tabular-ffnn
        result, records, labels = fixtures.build_tabular_fixture(seed=seed, **_epochs(args))
        if args.dataset_out:
            datasets.save_table_dataset(args.dataset_out, records, labels)
    save_model(result.net, args.out)
    log.info("training accuracy %.4f; wrote %s", result.train_accuracy, args.out)
    print(f"training accuracy: {result.train_accuracy:.4f}")
    return 0


def _cmd_explain(args) -> int:
    net = _load_net(args.model)
    input_doc = _read_json(args.input, "input")
    x = _parse_input(input_doc, args.instance)
    try:
        explainer = explainer_for(args.instance).fit(net)
        bundle = explainer.explain(x)
    except (ArglensError, ValueError, KeyError) as exc:
        raise ValidationFailure(f"cannot explain this input with this model: {exc}")

    pruned = prune_top_k(bundle, args.top_k, args.top_k_attackers or args.top_k)
    clouds = None
    if args.clouds:
        cloud_doc = _read_json(args.clouds, "word clouds")
        from .render import ChiArtifact

        clouds = {name: ChiArtifact(kind="word-cloud", payload=payload) for name, payload in cloud_doc.items()}
    if args.format == "conversational":
        transcript = render_conversational(bundle, pruned, depth=args.depth, clouds=clouds)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(transcript + "\n")
    else:
        document = render_graphical(bundle, pruned, clouds=clouds, k_top=(args.top_k, args.top_k_attackers or args.top_k))
        _write_json(args.out, document.to_json())
    if args.bundle_out:
        _write_json(args.bundle_out, bundle.to_json())
    log.info("explained %s -> %s (%s)", args.input, args.out, args.format)
    return 0


def _cmd_check(args) -> int:
    doc = _read_json(args.bundle, "bundle")
    try:
        bundle = bundle_from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailure(f"bundle file {args.bundle} violates the schema: {exc}")
    if args.property not in PROPERTIES:
        raise ValidationFailure(f"unknown property {args.property!r}; choose from {PROPERTIES}")
    report = check_property(args.property, bundle.gaf, bundle.strengths, args.tolerance)
    if not bundle.bias_free:
        report = type(report)(
            property=report.property,
            verdict=report.verdict,
            checked=report.checked,
            counterexamples=report.counterexamples,
            notes=report.notes + ("network has bias terms: additivity may not hold exactly",),
        )
    out_doc = report.to_json()
    if args.out:
        _write_json(args.out, out_doc)
    print(f"{report.property}: {report.verdict} ({report.checked} checked, {len(report.counterexamples)} counterexamples)")
    return 0


def _cmd_fidelity(args) -> int:
    net = _load_net(args.model)
    data = _read_json(args.dataset, "dataset")
    if args.instance == "text-cnn":
        samples = [d["tokens"] for d in data.get("docs", [])]
    elif args.instance == "image-cnn":
        samples = [np.asarray(d["pixels"]) for d in data.get("images", [])]
    elif args.instance == "tabular-ffnn":
        samples = [d["values"] for d in data.get("records", [])]
    else:
        raise ValidationFailure("fidelity supports text-cnn, image-cnn and tabular-ffnn")
    if not samples:
        raise ValidationFailure(f"dataset {args.dataset} holds no samples for {args.instance}")
    report = deep_fidelity_eval(net, args.instance, samples, n_pairs=args.pairs, seed=args.seed)
    save_report_json(report, args.out)
    if args.csv:
        report.write_csv(args.csv)
    print(
        f"pairs={len(report.pairs)} similar={len(report.strength_drel)} "
        f"mean_strength_drel={report.mean_strength_drel:.4f} "
        f"conditioned={report.mean_strength_drel_conditioned:.4f} "
        f"reduction={report.reduction * 100:.1f}%"
    )
    return 0


def _cmd_stats(args) -> int:
    net = _load_net(args.model)
    data = _read_json(args.corpus, "corpus")
    docs = [d["tokens"] for d in data.get("docs", [])]
    if not docs:
        raise ValidationFailure("corpus holds no documents")
    try:
        stats = build_reference_stats(net, docs, n_samples=args.n_samples, seed=args.seed)
    except ValueError as exc:
        raise ValidationFailure(str(exc))
    _write_json(args.out, stats.to_json())
    if args.clouds:
        clouds = build_word_clouds(net, docs, stats, vocab=data.get("vocab"))
        _write_json(args.clouds, {name: artifact.payload for name, artifact in clouds.items()})
    log.info("reference stats over %d samples -> %s", args.n_samples, args.out)
    return 0


def _cmd_costs(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    if args.instance != "text-cnn":
        raise ValidationFailure("the cost harness is parameterized over text-cnn filter counts")
    rng = np.random.default_rng(args.seed)
    vocab, docs, labels = datasets.make_text_corpus(n_docs=1, seed=args.seed)

    def make_net(size):
        return init_network(
            fixtures.text_arch(n_filters=size, vocab_size=len(vocab)),
            seed=args.seed,
            metadata={"labels": list(datasets.TOPIC_LABELS), "vocab": vocab},
        )

    def make_input(size):
        return datasets.pad_tokens(docs[0], 150)

    report = measure_costs(make_net, make_input, sizes, reps=args.reps)
    save_report_json(report, args.out)
    print(
        f"prediction={report.prediction_ms:.3f}ms backward={report.backward_ms:.3f}ms "
        f"fit slope={report.slope:.4f} R^2={report.r_squared:.4f}"
    )
    return 0


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arglens", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="generate a fixture model (and dataset)")
    p.add_argument("--instance", required=True, choices=INSTANCES)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int)
    p.add_argument("--filters", type=int)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("explain", help="explain one input")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--instance", required=True, choices=INSTANCES)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--top-k-attackers", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("graphical", "conversational"), default="graphical")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--bundle-out")
    p.add_argument("--clouds")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_explain)

    p = sub.add_parser("check", help="check a dialectical property on a bundle")
    p.add_argument("--property", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("fidelity", help="perturbation-based fidelity evaluation")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--instance", required=True, choices=INSTANCES)
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(fn=_cmd_fidelity)

    p = sub.add_parser("stats", help="reference statistics and word clouds")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--clouds")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("costs", help="explanation-time scaling measurement")
    p.add_argument("--instance", default="text-cnn", choices=INSTANCES)
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_costs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    log.info("resolved config: %s", {k: v for k, v in vars(args).items() if k != "fn"})
    try:
        return args.fn(args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal error
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
