"""Perturbation-based evaluation of explanation fidelity and cost.

The protocol pairs each input with a perturbed variant, keeps pairs
whose predicted probability moved less than an output threshold, and
compares the relative difference of intermediate activations with that
of intermediate argument strengths. Conditioning the strength statistic
on activation-similar pairs should shrink it: explanations must be
similar when the model computes similar outputs in a similar way.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .datasets import text_vocab
from .explainers import BaseExplainer, explainer_for
from .forward import forward
from .model import NeuralGraph


def relative_difference(x, y) -> float:
    """Symmetric relative L1 difference 2*|y-x| / (|y|+|x|), in [0, 2].

    Two zero vectors are maximally similar, so the 0/0 case is 0.
    """
    a = np.asarray(x, dtype=float).reshape(-1)
    b = np.asarray(y, dtype=float).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    denom = np.abs(a).sum() + np.abs(b).sum()
    if denom == 0.0:
        return 0.0
    # |b-a| <= |a| + |b| per coordinate, so the true value never exceeds
    # 2; clamp away float rounding overshoot
    return float(min(2.0 * np.abs(b - a).sum() / denom, 2.0))


def per_element_relative_difference(x, y) -> float:
    """Mean of element-wise relative differences (alternative reading)."""
    a = np.asarray(x, dtype=float).reshape(-1)
    b = np.asarray(y, dtype=float).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    denom = np.abs(a) + np.abs(b)
    out = np.zeros_like(denom)
    mask = denom > 0
    out[mask] = 2.0 * np.abs(b - a)[mask] / denom[mask]
    return float(out.mean()) if out.size else 0.0


# -- perturbations ---------------------------------------------------------------


@dataclass(frozen=True)
class PerturbKind:
    """A perturbation family with its parameters.

    * ``gaussian-pixel``: additive noise on the 0-255 pixel scale, clamped.
    * ``categorical-flip``: exactly one feature flipped to another value.
    * ``token-substitute``: up to ``rate`` of the tokens swapped via a
      fixed substitution table.
    """

    kind: str
    std: float = 10.0
    rate: float = 0.7
    table: dict | None = None
    features: tuple | None = None

    KINDS = ("gaussian-pixel", "categorical-flip", "token-substitute")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown perturbation {self.kind!r}")
        if self.kind == "gaussian-pixel" and self.std <= 0:
            raise ValueError("gaussian std must be positive")


def default_synonym_table(vocab=None, substitutes: int = 3, seed: int = 0) -> dict:
    """Substitution table for the synthetic topic vocabulary.

    Topic words map to other words of the same topic, common words to
    other common words, so substitutions preserve meaning while moving
    the token stream.
    """
    full_vocab, topic_ids, common_ids, _ = text_vocab(len(vocab) if vocab else 500)
    rng = np.random.default_rng(seed)
    table = {}
    for ids in list(topic_ids.values()) + [common_ids]:
        for tid in ids:
            pool = [i for i in ids if i != tid]
            picks = rng.choice(pool, size=min(substitutes, len(pool)), replace=False)
            table[int(tid)] = tuple(int(p) for p in picks)
    return table


def perturb(input_values, kind: PerturbKind, seed) -> object:
    """Deterministic perturbed copy of one input.

    ``seed`` may be an integer or a (seed, pair-index) sequence so per-pair
    streams match between serial and parallel evaluation.
    """
    rng = np.random.default_rng(seed)
    if kind.kind == "gaussian-pixel":
        img = np.asarray(input_values, dtype=float)
        noisy = img + rng.normal(0.0, kind.std, size=img.shape)
        return np.clip(noisy, 0.0, 255.0)
    if kind.kind == "categorical-flip":
        if not isinstance(input_values, dict):
            raise ValueError("categorical-flip perturbs feature->value records")
        if not kind.features:
            raise ValueError("categorical-flip needs the feature declaration")
        record = dict(input_values)
        feature = kind.features[int(rng.integers(len(kind.features)))]
        values = [v for v in feature["values"] if v != record[feature["name"]]]
        record[feature["name"]] = str(values[int(rng.integers(len(values)))])
        return record
    # token-substitute
    tokens = list(np.asarray(input_values).astype(int))
    table = kind.table or {}
    candidates = [i for i, t in enumerate(tokens) if t in table]
    budget = int(round(kind.rate * len(tokens)))
    n_swap = min(budget, len(candidates))
    if n_swap > 0:
        positions = rng.choice(len(candidates), size=n_swap, replace=False)
        for p in positions:
            pos = candidates[int(p)]
            options = table[tokens[pos]]
            tokens[pos] = int(options[int(rng.integers(len(options)))])
    return tokens


# -- deep-fidelity protocol --------------------------------------------------------


@dataclass(frozen=True)
class FidelityReport:
    """Per-pair records plus the three conditional distributions."""

    instance: str
    seed: int
    thresholds: dict
    pairs: tuple           # per-pair dicts
    activation_drel: tuple     # similar-output pairs
    strength_drel: tuple       # similar-output pairs
    strength_drel_conditioned: tuple  # additionally activation-similar
    reduction: float
    empty: bool = False

    @property
    def mean_activation_drel(self) -> float:
        return float(np.mean(self.activation_drel)) if self.activation_drel else 0.0

    @property
    def mean_strength_drel(self) -> float:
        return float(np.mean(self.strength_drel)) if self.strength_drel else 0.0

    @property
    def mean_strength_drel_conditioned(self) -> float:
        return float(np.mean(self.strength_drel_conditioned)) if self.strength_drel_conditioned else 0.0

    def histograms(self, bins: int = 40) -> dict:
        edges = np.linspace(0.0, 2.0, bins + 1)
        def hist(values):
            counts, _ = np.histogram(np.array(values, dtype=float), bins=edges)
            return [int(c) for c in counts]
        return {
            "bin_edges": [float(e) for e in edges],
            "activation": hist(self.activation_drel),
            "strength": hist(self.strength_drel),
            "strength_conditioned": hist(self.strength_drel_conditioned),
        }

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "seed": self.seed,
            "thresholds": dict(self.thresholds),
            "empty": self.empty,
            "n_pairs": len(self.pairs),
            "n_similar": len(self.activation_drel),
            "n_conditioned": len(self.strength_drel_conditioned),
            "mean_activation_drel": self.mean_activation_drel,
            "mean_strength_drel": self.mean_strength_drel,
            "mean_strength_drel_conditioned": self.mean_strength_drel_conditioned,
            "reduction": self.reduction,
            "histograms": self.histograms(),
            "pairs": [dict(p) for p in self.pairs],
        }

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["pair", "output_delta", "similar", "activation_drel", "strength_drel", "conditioned"]
            )
            writer.writeheader()
            for row in self.pairs:
                writer.writerow(row)


def _default_perturbation(instance: str, features=None) -> PerturbKind:
    if instance == "image-cnn":
        return PerturbKind(kind="gaussian-pixel", std=10.0)
    if instance == "tabular-ffnn":
        return PerturbKind(kind="categorical-flip", features=tuple(features or ()))
    return PerturbKind(kind="token-substitute", rate=0.7, table=default_synonym_table())


def _intermediate_activations(explainer: BaseExplainer, record) -> np.ndarray:
    net = explainer.net_
    strata = explainer.base_influence_.strata
    values = []
    for node in strata.level(2):
        for neuron in node.neurons:
            layer, index = net.locate(neuron)
            values.append(record.activations[layer][index])
    return np.array(values)


def _strength_vector(bundle) -> np.ndarray:
    """Intermediate strengths aligned by node; absent arguments are 0."""
    k = len(bundle.strata_sizes)
    by_node = {}
    for arg in bundle.gaf.at_stratum(k - 1):
        by_node[arg.node] = bundle.strengths[arg.id]
    size = bundle.strata_sizes[k - 2]
    out = np.zeros(size)
    for node, value in by_node.items():
        out[int(node[1:])] = value
    return out


def deep_fidelity_eval(
    net: NeuralGraph,
    instance: str,
    dataset,
    n_pairs: int = 500,
    seed: int = 0,
    thresholds=None,
    perturbation: PerturbKind | None = None,
    activation_similarity: str = "vector",
) -> FidelityReport:
    """Run the perturbation protocol and summarize the three conditions.

    ``dataset`` is a list of inputs in the instance's native form. Pairs
    qualify when the predicted class's probability moves less than the
    output threshold; the conditioned statistic further requires the
    intermediate activation difference below the activation threshold.
    The per-pair RNG stream is derived from (seed, pair index).
    """
    thresholds = dict({"output": 0.05, "activation": 0.20}, **(thresholds or {}))
    explainer = explainer_for(instance, attach_reports=False).fit(net)
    if perturbation is None:
        perturbation = _default_perturbation(instance, features=net.metadata.get("features"))
    drel_act = per_element_relative_difference if activation_similarity == "per-neuron" else relative_difference

    pairs = []
    activation_drel, strength_drel, conditioned = [], [], []
    for i in range(n_pairs):
        x = dataset[i % len(dataset)]
        x_pert = perturb(x, perturbation, seed=[seed, i])
        bundle = explainer.explain(x)
        bundle_p = explainer.explain(x_pert)
        rec = forward(net, explainer._encode(x))
        rec_p = forward(net, explainer._encode(x_pert))
        cls = bundle.prediction_class
        p0 = bundle.prediction_probability
        out_p = rec_p.output
        p1 = float(out_p[cls]) if out_p.size > 1 else (float(out_p[0]) if cls == 1 else 1.0 - float(out_p[0]))
        delta = abs(p0 - p1)
        similar = delta < thresholds["output"]
        row = {"pair": i, "output_delta": delta, "similar": similar}
        if similar:
            a = drel_act(_intermediate_activations(explainer, rec), _intermediate_activations(explainer, rec_p))
            s = relative_difference(_strength_vector(bundle), _strength_vector(bundle_p))
            activation_drel.append(a)
            strength_drel.append(s)
            is_cond = a < thresholds["activation"]
            if is_cond:
                conditioned.append(s)
            row.update({"activation_drel": a, "strength_drel": s, "conditioned": is_cond})
        else:
            row.update({"activation_drel": "", "strength_drel": "", "conditioned": ""})
        pairs.append(row)

    if not strength_drel:
        return FidelityReport(
            instance=instance, seed=seed, thresholds=thresholds, pairs=tuple(pairs),
            activation_drel=(), strength_drel=(), strength_drel_conditioned=(),
            reduction=0.0, empty=True,
        )
    mean_all = float(np.mean(strength_drel))
    mean_cond = float(np.mean(conditioned)) if conditioned else 0.0
    reduction = 0.0 if mean_all == 0.0 else 1.0 - mean_cond / mean_all
    return FidelityReport(
        instance=instance,
        seed=seed,
        thresholds=thresholds,
        pairs=tuple(pairs),
        activation_drel=tuple(activation_drel),
        strength_drel=tuple(strength_drel),
        strength_drel_conditioned=tuple(conditioned),
        reduction=reduction,
    )


# -- computational cost -------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    prediction_ms: float          # c_f
    backward_ms: float            # c_b, one relevance pass
    sizes: tuple                  # |N2| values
    generation_ms: tuple          # median explanation time per size
    slope: float
    intercept: float
    r_squared: float

    def to_json(self) -> dict:
        return {
            "prediction_ms": self.prediction_ms,
            "backward_ms": self.backward_ms,
            "sizes": list(self.sizes),
            "generation_ms": list(self.generation_ms),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def _median_time(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(times))


def measure_costs(make_net, make_input, sizes, reps: int = 30, instance: str = "text-cnn") -> CostReport:
    """Median explanation time per intermediate-stratum size, plus a fit.

    ``make_net(size)`` builds a network with ``size`` intermediate nodes
    and ``make_input(size)`` an input for it. Explanation time should be
    one prediction plus one relevance pass per intermediate node, hence
    close to linear in the size.
    """
    from .attribution import lrp0_backward
    from .forward import predict
    from .influence import StrataSpec, select_strata

    generation = []
    c_f = c_b = 0.0
    for size in sizes:
        net = make_net(size)
        x = make_input(size)
        explainer = explainer_for(instance, attach_reports=False).fit(net)
        explainer.explain(x)  # warm-up
        generation.append(_median_time(lambda: explainer.explain(x), reps))
        if size == sizes[-1]:
            c_f = _median_time(lambda: predict(net, explainer._encode(x)), reps)
            record = forward(net, explainer._encode(x))
            strata = select_strata(net, StrataSpec(kind=instance, class_index=0))
            filters = list(strata.level(2))
            out_neuron = f"L{net.n_layers}.0"
            c_b = _median_time(lambda: lrp0_backward(net, record, out_neuron, filters), reps)

    xs = np.array(sizes, dtype=float)
    ys = np.array(generation)
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = slope * xs + intercept
    ss_res = float(np.sum((ys - predicted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return CostReport(
        prediction_ms=c_f,
        backward_ms=c_b,
        sizes=tuple(int(s) for s in sizes),
        generation_ms=tuple(float(g) for g in generation),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
    )


def save_report_json(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, ensure_ascii=False, separators=(",", ":"))
