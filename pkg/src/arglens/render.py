"""Turn explanation bundles into human-consumable documents.

The full argument graph is cognitively prohibitive, so documents keep
only the strongest supporters and attackers per argument, decorate the
surviving intermediate arguments with interpretation artifacts (word
clouds, patch galleries, pie charts), and serialize canonically so that
identical explanations are byte-identical on disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .explainers import ExplanationBundle
from .forward import forward
from .gaf import Argument, ArgumentGraph
from .attribution import lrp0_backward
from .influence import StrataSpec, select_strata

CHI_KINDS = ("word-cloud", "patch-gallery", "pie-chart", "raw-label")

RELATION_COLORS = {"support": "green", "attack": "red", "critical-support": "blue"}


@dataclass(frozen=True)
class ChiArtifact:
    """Human-facing interpretation payload for one argument."""

    kind: str
    payload: object

    def __post_init__(self):
        if self.kind not in CHI_KINDS:
            raise ValueError(f"unknown artifact kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "payload": self.payload}

    def caption(self) -> str:
        if self.kind == "word-cloud" and self.payload:
            return f"the pattern “{self.payload[0]['ngram']}”"
        if self.kind == "pie-chart":
            return "its contribution breakdown"
        if self.kind == "patch-gallery" and self.payload:
            return "its most activating image region"
        return str(self.payload)


# -- pruning -------------------------------------------------------------------


def _top_k(gaf: ArgumentGraph, strengths, ids, k: int):
    ranked = sorted(ids, key=lambda i: (-strengths[i], i))
    return ranked[:k]


def _k_at(k, depth: int) -> int:
    """Resolve a per-stratum bound: a scalar applies at every depth."""
    if isinstance(k, int):
        value = k
    else:
        value = k[depth] if depth < len(k) else k[-1]
    if value < 1:
        raise ValueError("k must be >= 1")
    return value


def prune_top_k(bundle: ExplanationBundle, k_sup=3, k_att=3) -> ArgumentGraph:
    """Keep the k strongest supporters and attackers, level by level.

    ``k_sup``/``k_att`` are single bounds or per-stratum sequences
    (index 0 bounds the root's children). Critical supporters compete in
    the supporter bucket. Ties break toward the lower argument id, so
    pruning is deterministic.
    """
    gaf, strengths = bundle.gaf, bundle.strengths
    keep = []
    frontier = [gaf.root.id]
    depth = 0
    while frontier:
        next_frontier = []
        for arg_id in frontier:
            keep.append(arg_id)
            positive = gaf.supporters(arg_id, include_critical=True)
            negative = gaf.attackers(arg_id)
            next_frontier.extend(_top_k(gaf, strengths, positive, _k_at(k_sup, depth)))
            next_frontier.extend(_top_k(gaf, strengths, negative, _k_at(k_att, depth)))
        frontier = next_frontier
        depth += 1
    kept = set(keep)
    pruned_args = tuple(a for a in gaf.arguments if a.id in kept)
    return ArgumentGraph(arguments=pruned_args, strata_sizes=gaf.strata_sizes)


# -- reference statistics -------------------------------------------------------


@dataclass(frozen=True)
class ReferenceStats:
    """Per-filter activation percentiles over a reference sample.

    ``classify`` grades an activation as strong (above the 90th
    percentile), weak (below the 1st) or neutral; supporter strengths
    rank against the per-class 80th percentile (top 20 percent counts as
    strongly supporting).
    """

    n_samples: int
    seed: int
    sample_indices: tuple
    filter_percentiles: dict
    supporter_quantiles: dict

    def classify(self, filter_name: str, activation: float) -> str:
        p = self.filter_percentiles[filter_name]
        if activation > p["p90"]:
            return "strong"
        if activation < p["p1"]:
            return "weak"
        return "neutral"

    def supporter_rank(self, label: str, strength: float) -> str:
        q = self.supporter_quantiles.get(label)
        if q is not None and strength >= q:
            return "strongly-supporting"
        return "supporting"

    def to_json(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "sample_indices": list(self.sample_indices),
            "filter_percentiles": self.filter_percentiles,
            "supporter_quantiles": self.supporter_quantiles,
        }


def stats_from_json(doc: dict) -> ReferenceStats:
    return ReferenceStats(
        n_samples=doc["n_samples"],
        seed=doc["seed"],
        sample_indices=tuple(doc["sample_indices"]),
        filter_percentiles=doc["filter_percentiles"],
        supporter_quantiles=doc["supporter_quantiles"],
    )


def _text_layers(net):
    kinds = tuple(spec.kind for spec in net.layers)
    pool = kinds.index("global-maxpool-1d") + 1
    return pool


def build_reference_stats(net, docs, n_samples: int = 1000, seed: int = 0) -> ReferenceStats:
    """Percentile statistics over a seeded reference sample of the corpus."""
    if not docs:
        raise ValueError("reference corpus is empty")
    if n_samples > len(docs):
        raise ValueError(f"n_samples {n_samples} exceeds corpus size {len(docs)}")
    from .datasets import pad_tokens

    rng = np.random.default_rng(seed)
    indices = tuple(int(i) for i in rng.choice(len(docs), size=n_samples, replace=False))
    pool_layer = _text_layers(net)
    n_filters = net.layers[pool_layer - 1].shape["filters"]
    seq_len = net.layers[0].shape["seq_len"]
    strata = select_strata(net, StrataSpec(kind="text-cnn", class_index=0))
    filters = list(strata.level(2))

    activations = np.zeros((n_samples, n_filters))
    per_class: dict = {}
    labels = net.labels or [f"class{c}" for c in range(net.output_size)]
    for row, idx in enumerate(indices):
        ids = np.array(pad_tokens(docs[idx], seq_len), dtype=float)
        record = forward(net, ids)
        activations[row] = record.layer(pool_layer)
        cls = int(record.output.argmax())
        rel = lrp0_backward(net, record, f"L{net.n_layers}.{cls}", filters)
        strengths = [abs(rel.relevance(f.name)) for f in filters if rel.relevance(f.name) > 0]
        per_class.setdefault(labels[cls], []).extend(strengths)

    filter_percentiles = {
        f"f{j}": {
            "p1": float(np.percentile(activations[:, j], 1)),
            "p90": float(np.percentile(activations[:, j], 90)),
        }
        for j in range(n_filters)
    }
    supporter_quantiles = {
        label: float(np.percentile(np.array(values), 80)) for label, values in sorted(per_class.items()) if values
    }
    return ReferenceStats(
        n_samples=n_samples,
        seed=seed,
        sample_indices=indices,
        filter_percentiles=filter_percentiles,
        supporter_quantiles=supporter_quantiles,
    )


def build_word_clouds(net, docs, stats: ReferenceStats, vocab=None) -> dict:
    """Winning n-grams of strongly activating reference samples, per filter.

    Cloud entries pair an n-gram (window-of-the-filter-width tokens at
    the max-pool winner) with the number of strongly activating samples
    exhibiting it, sorted by count then lexicographically.
    """
    from .datasets import pad_tokens

    pool_layer = _text_layers(net)
    conv = net.layers[pool_layer - 2]
    width, out_len = conv.shape["width"], conv.conv_out_len
    seq_len = net.layers[0].shape["seq_len"]
    n_filters = net.layers[pool_layer - 1].shape["filters"]
    vocab = vocab if vocab is not None else (net.vocab or [])

    counts: list = [dict() for _ in range(n_filters)]
    for idx in stats.sample_indices:
        ids = pad_tokens(docs[idx], seq_len)
        record = forward(net, np.array(ids, dtype=float))
        pooled = record.layer(pool_layer)
        winners = record.winners[pool_layer]
        for j in range(n_filters):
            if stats.classify(f"f{j}", float(pooled[j])) != "strong":
                continue
            t = int(winners[j]) - j * out_len
            tokens = [vocab[ids[p]] if ids[p] < len(vocab) else f"tok{ids[p]}" for p in range(t, t + width)]
            ngram = " ".join(tokens)
            counts[j][ngram] = counts[j].get(ngram, 0) + 1

    clouds = {}
    for j in range(n_filters):
        entries = sorted(counts[j].items(), key=lambda kv: (-kv[1], kv[0]))
        clouds[f"f{j}"] = ChiArtifact(
            kind="word-cloud", payload=[{"ngram": ng, "count": c} for ng, c in entries]
        )
    return clouds


# -- documents ------------------------------------------------------------------


@dataclass(frozen=True)
class ExplanationDocument:
    """Serializable pruned explanation with per-argument artifacts."""

    format: str  # graphical-interactive | conversational
    prediction: dict
    strata: tuple
    arguments: tuple
    relations: tuple
    word_aggregates: tuple
    metadata: dict

    def to_json(self) -> dict:
        return {
            "format": self.format,
            "prediction": dict(self.prediction),
            "strata": list(self.strata),
            "arguments": [dict(a) for a in self.arguments],
            "relations": [dict(r) for r in self.relations],
            "word_aggregates": [dict(w) for w in self.word_aggregates],
            "metadata": dict(self.metadata),
        }

    def dumps(self) -> str:
        return dumps_canonical(self.to_json())


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))


def document_from_json(doc: dict) -> ExplanationDocument:
    return ExplanationDocument(
        format=doc["format"],
        prediction=doc["prediction"],
        strata=tuple(doc["strata"]),
        arguments=tuple(doc["arguments"]),
        relations=tuple(doc["relations"]),
        word_aggregates=tuple(doc["word_aggregates"]),
        metadata=doc.get("metadata", {}),
    )


def _default_artifact(bundle: ExplanationBundle, pruned: ArgumentGraph, arg: Argument, clouds) -> ChiArtifact:
    if clouds is not None and arg.node in clouds:
        return clouds[arg.node]
    if bundle.instance == "image-cnn":
        gallery = bundle.context.get("patch_galleries", {}).get(arg.node)
        if gallery:
            return ChiArtifact(kind="patch-gallery", payload=gallery)
    if bundle.instance in ("tabular-ffnn", "toy"):
        slices = [
            {
                "label": pruned.argument(c).label,
                "relation": pruned.argument(c).relation,
                "strength": float(bundle.strengths[c]),
            }
            for c in pruned.children(arg.id)
        ]
        if slices:
            return ChiArtifact(kind="pie-chart", payload=slices)
    return ChiArtifact(kind="raw-label", payload=arg.label)


def _word_aggregates(bundle: ExplanationBundle, pruned: ArgumentGraph):
    """Signed strength sums per surviving input word, for the static view."""
    if bundle.instance != "text-cnn":
        return ()
    totals: dict = {}
    for arg in pruned.arguments:
        if arg.stratum != 1 or arg.parent is None:
            continue
        sign = 1.0 if arg.relation in ("support", "critical-support") else -1.0
        index = int(arg.node[1:])
        token = arg.label
        key = (index, token)
        totals[key] = totals.get(key, 0.0) + sign * bundle.strengths[arg.id]
    return tuple(
        {"token": token, "index": index, "value": float(value)}
        for (index, token), value in sorted(totals.items())
    )


def render_graphical(
    bundle: ExplanationBundle,
    pruned: ArgumentGraph,
    clouds=None,
    k_top=(3, 3),
) -> ExplanationDocument:
    """Static-plus-expandable document for the interactive viewer.

    Every surviving intermediate argument carries an artifact (raw label
    as fallback); input words carry their aggregate signed strength so
    the static view can tint them by polarity and magnitude.
    """
    k = len(pruned.strata_sizes)
    arguments = []
    for arg in pruned.arguments:
        chi = None
        if arg.stratum not in (1, k):
            chi = _default_artifact(bundle, pruned, arg, clouds)
        elif arg.stratum == k:
            chi = ChiArtifact(kind="raw-label", payload=bundle.prediction_label)
        else:
            chi = ChiArtifact(kind="raw-label", payload=arg.label)
        arguments.append(
            {
                "id": arg.id,
                "stratum": arg.stratum,
                "label": arg.label,
                "strength": float(bundle.strengths[arg.id]),
                "chi": chi.to_json(),
            }
        )
    relations = tuple(
        {"source": a.id, "target": a.parent, "type": a.relation}
        for a in pruned.arguments
        if a.parent is not None
    )
    return ExplanationDocument(
        format="graphical-interactive",
        prediction={
            "label": bundle.prediction_label,
            "probability": float(bundle.prediction_probability),
        },
        strata=pruned.strata_sizes,
        arguments=tuple(arguments),
        relations=relations,
        word_aggregates=_word_aggregates(bundle, pruned),
        metadata={
            "instance": bundle.instance,
            "aggregation": "surviving-arguments",
            "k_top": {"supporters": k_top[0], "attackers": k_top[1]},
            "colors": dict(RELATION_COLORS),
        },
    )


def _strongest(pruned: ArgumentGraph, strengths, ids):
    ranked = sorted(ids, key=lambda i: (-strengths[i], i))
    return ranked[0] if ranked else None


def render_conversational(bundle: ExplanationBundle, pruned: ArgumentGraph, depth: int = 3, clouds=None) -> str:
    """Fixed-template dialogue descending one argument per level."""
    k = len(pruned.strata_sizes)
    if depth > k:
        raise ValueError(f"depth {depth} exceeds the {k} strata")
    strengths = bundle.strengths
    lines = []
    prob = f"{bundle.prediction_probability * 100:.2f}%"
    lines.append("User: Why this prediction?")
    root = pruned.root
    top_sup = _strongest(pruned, strengths, pruned.supporters(root.id, include_critical=True))
    top_att = _strongest(pruned, strengths, pruned.attackers(root.id))
    answer = f"System: The input was classified as “{bundle.prediction_label}” with probability {prob}."
    if top_sup is not None:
        answer += f" The main evidence for it is {_describe(pruned, bundle, top_sup, clouds)}."
    if top_att is not None:
        answer += f" The main evidence against it is {_describe(pruned, bundle, top_att, clouds)}."
    lines.append(answer)

    focus = top_sup if top_sup is not None else top_att
    for _ in range(1, depth):
        if focus is None:
            break
        arg = pruned.argument(focus)
        lines.append(f"User: Why {_short(pruned, bundle, focus, clouds)}?")
        sup = _strongest(pruned, strengths, pruned.supporters(focus, include_critical=True))
        att = _strongest(pruned, strengths, pruned.attackers(focus))
        if sup is None and att is None:
            lines.append(
                f"System: “{arg.label}” is part of the input itself (strength {strengths[focus]:.4f})."
            )
            focus = None
            continue
        answer = "System:"
        if sup is not None:
            answer += f" It is mainly supported by {_describe(pruned, bundle, sup, clouds)}."
        if att is not None:
            answer += f" It is mainly attacked by {_describe(pruned, bundle, att, clouds)}."
        lines.append(answer)
        focus = sup if sup is not None else att
    return "\n".join(lines)


def _short(pruned, bundle, arg_id, clouds):
    arg = pruned.argument(arg_id)
    if clouds is not None and arg.node in clouds:
        return clouds[arg.node].caption()
    return f"“{arg.label}”"


def _describe(pruned, bundle, arg_id, clouds):
    arg = pruned.argument(arg_id)
    name = _short(pruned, bundle, arg_id, clouds)
    return f"{name} (strength {bundle.strengths[arg_id]:.4f})"
