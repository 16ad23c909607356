"""End-to-end explainers for the supported architectures.

Each explainer follows the scikit-learn estimator idiom: construct with
hyper-parameters, ``fit`` once per model (strata and the input-to-hidden
influence level are input-independent, so they are cached there), then
``explain`` per input. ``transform`` maps a batch of inputs to bundles
and ``predict`` exposes the wrapped network's classes, so explainers
compose with standard tooling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .attribution import gradcam, lrp0_backward
from .dialectics import (
    check_additive_monotonicity,
    check_counterfactuality,
    check_dialectical_monotonicity,
)
from .errors import ArchitectureError
from .forward import forward, predict
from .gaf import Argument, ArgumentGraph, Characterization, StrengthSpec, assign_strengths, extract_gaf
from .influence import InfluenceGraph, Node, Strata, StrataSpec, extract_influence_graph, select_strata
from .datasets import encode_record, pad_tokens
from .validation import as_f64


@dataclass(frozen=True)
class ExplanationBundle:
    """One explained prediction: argument graph, strengths, provenance."""

    instance: str
    input_echo: dict
    prediction_class: int
    prediction_label: str
    prediction_probability: float
    gaf: ArgumentGraph
    strengths: dict
    context: dict
    reports: tuple
    bias_free: bool

    @property
    def strata_sizes(self):
        return self.gaf.strata_sizes

    def to_json(self) -> dict:
        gaf_json = self.gaf.to_json(self.strengths)
        nodes = [
            {**node, "label": self.gaf.argument(node["id"]).label}
            for node in gaf_json["nodes"]
        ]
        return {
            "instance": self.instance,
            "prediction": {
                "label": self.prediction_label,
                "class": self.prediction_class,
                "probability": self.prediction_probability,
            },
            "strata": list(self.strata_sizes),
            "nodes": nodes,
            "edges": gaf_json["edges"],
            "input": self.input_echo,
            "context": self.context,
            "reports": [r.to_json() for r in self.reports],
            "bias_free": self.bias_free,
        }


def bundle_from_json(doc: dict) -> ExplanationBundle:
    """Rebuild a bundle (graph, strengths, reports stay as data)."""
    from .dialectics import PropertyReport

    args = []
    strengths = {}
    edges = {e["source"]: e for e in doc["edges"]}
    for node in doc["nodes"]:
        edge = edges.get(node["id"])
        args.append(
            Argument(
                id=node["id"],
                node=node["node"],
                label=node.get("label", node["node"]),
                stratum=node["stratum"],
                parent=None if edge is None else edge["target"],
                relation=None if edge is None else edge["relation"],
            )
        )
        strengths[node["id"]] = float(node["strength"])
    gaf = ArgumentGraph(arguments=tuple(args), strata_sizes=tuple(doc["strata"]))
    reports = tuple(
        PropertyReport(
            property=r["property"],
            verdict=r["verdict"],
            checked=r["checked"],
            counterexamples=tuple(r["counterexamples"]),
            notes=tuple(r.get("notes", ())),
        )
        for r in doc.get("reports", [])
    )
    return ExplanationBundle(
        instance=doc["instance"],
        input_echo=doc.get("input", {}),
        prediction_class=doc["prediction"].get("class", 0),
        prediction_label=doc["prediction"]["label"],
        prediction_probability=doc["prediction"]["probability"],
        gaf=gaf,
        strengths=strengths,
        context=doc.get("context", {}),
        reports=reports,
        bias_free=doc.get("bias_free", True),
    )


def _out_index(net, cls: int) -> int:
    """Output-neuron index of a predicted class (one shared neuron when
    the output layer is a single sigmoid unit)."""
    return cls if net.output_size > 1 else 0


class BaseExplainer(BaseEstimator):
    """Shared fit bookkeeping and the batch interfaces."""

    instance = "base"

    def _check_fitted(self):
        if not hasattr(self, "net_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit(net) first")

    def fit(self, net, corpus=None):
        raise NotImplementedError

    def explain(self, x) -> ExplanationBundle:
        raise NotImplementedError

    def transform(self, X):
        return [self.explain(x) for x in X]

    def predict(self, X):
        self._check_fitted()
        return np.array([predict(self.net_, self._encode(x))[0] for x in X])

    def _encode(self, x):
        return x

    def _label(self, cls: int) -> str:
        labels = self.net_.labels
        return labels[cls] if cls < len(labels) else f"class{cls}"

    def _bias_note(self):
        return () if self.net_.bias_free else ("network has bias terms: additivity may not hold exactly",)


class TextCnnExplainer(BaseExplainer):
    """Bipolar explanations for embedding/conv/max-pool text classifiers.

    Relations between words and filters (and filters and the predicted
    class) follow the sign of back-propagated relevance; strengths are
    relevance magnitudes, so supporter sums minus attacker sums track
    the output quantity exactly on bias-free networks.
    """

    instance = "text-cnn"

    def __init__(self, output_strength="probability", tolerance=1e-6, attach_reports=True):
        self.output_strength = output_strength
        self.tolerance = tolerance
        self.attach_reports = attach_reports

    def fit(self, net, corpus=None):
        chain = tuple(spec.kind for spec in net.layers)
        if chain[:3] != ("embedding", "conv1d", "global-maxpool-1d") or chain[-1] != "dense":
            raise ArchitectureError(f"text-cnn expects embedding/conv1d/global-maxpool-1d/dense, got {chain}")
        self.net_ = net
        self.seq_len_ = net.layers[0].shape["seq_len"]
        self.filter_width_ = net.layers[1].shape["width"]
        self.conv_out_len_ = net.layers[1].conv_out_len
        self.n_filters_ = net.layers[2].shape["filters"]
        self.pool_layer_ = 3
        self.token_ids_ = {t: i for i, t in enumerate(net.vocab or [])}
        strata = select_strata(net, StrataSpec(kind="text-cnn", class_index=0))
        self.base_influence_ = extract_influence_graph(net, strata)
        return self

    def _encode(self, tokens):
        ids = [self._token_id(t) for t in tokens]
        return np.array(pad_tokens(ids, self.seq_len_), dtype=float)

    def _token_id(self, token):
        if isinstance(token, str):
            if token not in self.token_ids_:
                raise ValueError(f"token {token!r} not in vocabulary")
            return self.token_ids_[token]
        return int(token)

    def explain(self, tokens) -> ExplanationBundle:
        self._check_fitted()
        net = self.net_
        ids = self._encode(tokens)
        record = forward(net, ids)
        cls, prob = predict(net, ids)
        strata = select_strata(net, StrataSpec(kind="text-cnn", class_index=cls), input_values=ids)
        influence = _swap_output(self.base_influence_, strata)
        words = {n.name: n for n in strata.level(1)}
        filters = list(strata.level(2))
        out_neuron = strata.output_node.neurons[0]

        if self.output_strength == "logit":
            out_layer = net.n_layers
            root_value = float(record.pre_activations[out_layer - 1][cls])
        else:
            root_value = float(record.activations[-1][cls])
        rel_from_out = lrp0_backward(net, record, out_neuron, filters, seed_value=root_value)

        per_filter = {}

        def filter_relevance(filter_name):
            if filter_name not in per_filter:
                j = int(filter_name[1:])
                neuron = f"L{self.pool_layer_}.{j}"
                per_filter[filter_name] = lrp0_backward(net, record, neuron, list(words.values()))
            return per_filter[filter_name]

        def measure(src: Node, dst: Node) -> float:
            if dst.name == "out":
                return rel_from_out.relevance(src.name)
            return filter_relevance(dst.name).relevance(src.name)

        chars = (
            Characterization(kind="support", test=lambda s, d: measure(s, d) > 0),
            Characterization(kind="attack", test=lambda s, d: measure(s, d) < 0),
        )
        gaf = extract_gaf(influence, chars)

        filter_activations = {f.name: record.activation(f.neurons[0]) for f in filters}

        def intermediate(name):
            return abs(rel_from_out.relevance(name))

        def input_strength(word_name, filter_name):
            a_j = filter_activations[filter_name]
            assert a_j != 0.0, "a represented filter cannot have zero activation"
            return abs(filter_relevance(filter_name).relevance(word_name) * rel_from_out.relevance(filter_name) / a_j)

        strengths = assign_strengths(gaf, StrengthSpec(root=lambda: root_value, intermediate=intermediate, input=input_strength))

        reports = ()
        if self.attach_reports:
            reports = (
                check_dialectical_monotonicity(gaf, strengths, self.tolerance),
                check_additive_monotonicity(gaf, strengths, self.tolerance, notes=self._bias_note()),
            )

        winners = record.winners[self.pool_layer_]
        windows = {}
        for f in filters:
            j = int(f.name[1:])
            t = int(winners[j]) - j * self.conv_out_len_
            positions = list(range(t, t + self.filter_width_))
            windows[f.name] = {
                "start": t,
                "tokens": [words[f"w{p}"].label for p in positions],
            }
        token_labels = [words[f"w{p}"].label for p in range(self.seq_len_)]
        context = {
            "filter_activations": {k: float(v) for k, v in filter_activations.items()},
            "winner_windows": windows,
            "filter_width": self.filter_width_,
            "output_strength": self.output_strength,
        }
        return ExplanationBundle(
            instance=self.instance,
            input_echo={"tokens": token_labels, "token_ids": [int(i) for i in ids]},
            prediction_class=cls,
            prediction_label=self._label(cls),
            prediction_probability=prob,
            gaf=gaf,
            strengths=strengths,
            context=context,
            reports=reports,
            bias_free=net.bias_free,
        )


class ImageCnnExplainer(BaseExplainer):
    """Support-only explanations for 2-d convolutional image classifiers.

    Filters back positively weighted class evidence; pixels support a
    filter where the filter's weighted activation map is positive. All
    strengths are map sums, hence non-negative, and the root strength is
    exactly the sum of its supporters' strengths.
    """

    instance = "image-cnn"

    def __init__(self, tolerance=1e-6, attach_reports=True, gallery_size=3):
        self.tolerance = tolerance
        self.attach_reports = attach_reports
        self.gallery_size = gallery_size

    def fit(self, net, corpus=None):
        if not any(spec.kind == "conv2d" for spec in net.layers):
            raise ArchitectureError("image-cnn expects at least one conv2d layer")
        self.net_ = net
        first = net.layers[0]
        if first.kind != "conv2d":
            raise ArchitectureError("image-cnn expects the input layer to be conv2d")
        self.in_h_, self.in_w_ = first.shape["in_h"], first.shape["in_w"]
        strata = select_strata(net, StrataSpec(kind="image-cnn", class_index=0))
        self.base_influence_ = extract_influence_graph(net, strata)
        conv_layers = [i for i, s in enumerate(net.layers, start=1) if s.kind == "conv2d"]
        self.last_conv_ = conv_layers[-1]
        return self

    def _encode(self, image):
        return as_f64(image, "image").reshape(-1)

    def explain(self, image) -> ExplanationBundle:
        self._check_fitted()
        net = self.net_
        x = self._encode(image)
        record = forward(net, x)
        cls, prob = predict(net, x)
        strata = select_strata(net, StrataSpec(kind="image-cnn", class_index=cls))
        influence = _swap_output(self.base_influence_, strata)
        out_neuron = strata.output_node.neurons[0]
        cam = gradcam(net, record, out_neuron)

        def coords(pixel_name):
            y, x_ = pixel_name[2:].split(",")
            return int(y), int(x_)

        def filter_index(name):
            return int(name[1:])

        def supports(src: Node, dst: Node) -> bool:
            if dst.name == "out":
                return float(cam.importance[filter_index(src.name)]) > 0
            j = filter_index(dst.name)
            y, x_ = coords(src.name)
            return float(cam.maps[j, y, x_]) > 0

        gaf = extract_gaf(influence, (Characterization(kind="support", test=supports),))

        strengths = assign_strengths(
            gaf,
            StrengthSpec(
                root=lambda: cam.total,
                intermediate=lambda name: cam.filter_sum(filter_index(name)),
                input=lambda pix, filt: float(cam.maps[filter_index(filt)][coords(pix)]),
            ),
        )

        reports = ()
        if self.attach_reports:
            reports = (check_additive_monotonicity(gaf, strengths, self.tolerance, notes=self._bias_note()),)

        gallery = _patch_galleries(net, cam, self.last_conv_, (self.in_h_, self.in_w_), self.gallery_size)
        context = {
            "filter_importance": {f"f{j}": float(g) for j, g in enumerate(cam.importance)},
            "patch_galleries": gallery,
        }
        return ExplanationBundle(
            instance=self.instance,
            input_echo={"pixels": np.asarray(image, dtype=float).round(4).tolist()},
            prediction_class=cls,
            prediction_label=self._label(cls),
            prediction_probability=prob,
            gaf=gaf,
            strengths=strengths,
            context=context,
            reports=reports,
            bias_free=net.bias_free,
        )


def _receptive_field(net, conv_layer: int, y: int, x: int):
    """Input crop influencing position (y, x) of a conv layer's map."""
    y0, y1, x0, x1 = y, y + 1, x, x + 1
    for layer in range(conv_layer, 0, -1):
        spec = net.layers[layer - 1]
        if spec.kind == "conv2d":
            y1, x1 = y1 + spec.shape["kh"] - 1, x1 + spec.shape["kw"] - 1
        elif spec.kind == "maxpool-2d":
            y0, x0 = y0 * spec.shape["pool_h"], x0 * spec.shape["pool_w"]
            y1, x1 = y1 * spec.shape["pool_h"], x1 * spec.shape["pool_w"]
    return y0, x0, y1, x1


def _patch_galleries(net, cam, conv_layer, in_hw, top: int):
    galleries = {}
    n_filters, oh, ow = cam.raw_maps.shape
    for j in range(n_filters):
        flat = cam.raw_maps[j].reshape(-1)
        order = np.argsort(-flat, kind="stable")[:top]
        patches = []
        for pos in order:
            y, x = divmod(int(pos), ow)
            y0, x0, y1, x1 = _receptive_field(net, conv_layer, y, x)
            patches.append(
                {"crop": [y0, x0, min(y1, in_hw[0]), min(x1, in_hw[1])], "activation": float(flat[pos])}
            )
        galleries[f"f{j}"] = patches
    return galleries


class TabularFfnnExplainer(BaseExplainer):
    """Tripolar explanations for dense tabular classifiers.

    Edge polarity follows the sign of the linear contribution; a support
    is critical when, on paper, removing it would push the receiving
    unit's activation to zero or below. Strengths are contribution
    magnitudes toward the predicted class.
    """

    instance = "tabular-ffnn"

    def __init__(self, tolerance=1e-6, attach_reports=True):
        self.tolerance = tolerance
        self.attach_reports = attach_reports

    def fit(self, net, corpus=None):
        if net.layers[0].kind != "dense" or net.layers[-1].kind != "dense":
            raise ArchitectureError("tabular-ffnn expects dense first and last layers")
        for spec in net.layers[1:-1]:
            if spec.kind not in ("flatten", "dense"):
                raise ArchitectureError("tabular-ffnn allows only dense and activation stages")
        self.net_ = net
        self.features_ = net.metadata.get("features")
        strata = select_strata(net, StrataSpec(kind="tabular-ffnn", class_index=0))
        self.base_influence_ = extract_influence_graph(net, strata)
        self.hidden_layer_ = net.n_layers - 1
        return self

    def _encode(self, record):
        if isinstance(record, dict):
            if self.features_ is None:
                raise ValueError("model has no feature metadata; pass a one-hot vector")
            return encode_record(record, self.features_)
        return as_f64(record, "record").reshape(-1)

    def explain(self, record) -> ExplanationBundle:
        self._check_fitted()
        net = self.net_
        x = self._encode(record)
        rec = forward(net, x)
        cls, prob = predict(net, x)
        out_idx = _out_index(net, cls)
        strata = select_strata(net, StrataSpec(kind="tabular-ffnn", class_index=out_idx))
        influence = _swap_output(self.base_influence_, strata)

        w_in = net.layers[0].weights          # input -> hidden unit
        w_out = net.layers[-1].weights        # hidden unit -> class
        a_in = rec.layer(0)
        a_hidden = rec.layer(self.hidden_layer_)
        a_out = float(rec.output[out_idx])

        def contribution(src: Node, dst: Node) -> float:
            if dst.name == "out":
                j = int(src.name[1:])
                return float(w_out[j, out_idx] * a_hidden[j])
            i, j = int(src.name[1:]), int(dst.name[1:])
            return float(w_in[i, j] * a_in[i])

        def receiver_activation(dst: Node) -> float:
            if dst.name == "out":
                return a_out
            return float(a_hidden[int(dst.name[1:])])

        def is_critical(src: Node, dst: Node) -> bool:
            a_y = receiver_activation(dst)
            return a_y > 0 and a_y - contribution(src, dst) <= 0

        chars = (
            Characterization(
                kind="critical-support",
                test=lambda s, d: contribution(s, d) > 0 and is_critical(s, d),
                overrides=frozenset({"support"}),
            ),
            Characterization(kind="support", test=lambda s, d: contribution(s, d) > 0),
            Characterization(kind="attack", test=lambda s, d: contribution(s, d) < 0),
        )
        gaf = extract_gaf(influence, chars)

        strengths = assign_strengths(
            gaf,
            StrengthSpec(
                root=lambda: a_out,
                intermediate=lambda name: abs(float(w_out[int(name[1:]), out_idx] * a_hidden[int(name[1:])])),
                input=lambda src, dst: abs(
                    float(w_in[int(src[1:]), int(dst[1:])] * w_out[int(dst[1:]), out_idx] * a_in[int(src[1:])])
                ),
            ),
        )

        reports = ()
        if self.attach_reports:
            reports = (check_counterfactuality(gaf, strengths, self.tolerance),)

        echo = {"values": record} if isinstance(record, dict) else {"onehot": [float(v) for v in x]}
        context = {
            "hidden_activations": {f"h{j}": float(a) for j, a in enumerate(a_hidden)},
            "class_weights": {f"h{j}": float(w_out[j, out_idx]) for j in range(w_out.shape[0])},
        }
        return ExplanationBundle(
            instance=self.instance,
            input_echo=echo,
            prediction_class=cls,
            prediction_label=self._label(cls),
            prediction_probability=prob,
            gaf=gaf,
            strengths=strengths,
            context=context,
            reports=reports,
            bias_free=net.bias_free,
        )

    def critical_by_rerun(self, record, src_index: int, dst_index: int) -> bool:
        """Forward-rerun counterpart of the critical-support test.

        Zeroes input ``src_index``, re-runs the network and reports
        whether hidden unit ``dst_index`` actually deactivates. The
        closed-form test approximates this for saturating activations,
        so the two may disagree; this is the ground-truth side.
        """
        self._check_fitted()
        x = self._encode(record).copy()
        before = forward(self.net_, x).layer(self.hidden_layer_)[dst_index]
        x[src_index] = 0.0
        after = forward(self.net_, x).layer(self.hidden_layer_)[dst_index]
        return before > 0 and after <= 0


class ToyExplainer(BaseExplainer):
    """Activation-strength explanations for small dense networks.

    Relations follow the sign of ``weight * activation`` on each edge;
    strengths are activation magnitudes. Attacks on saturating units
    still lower their activation, so dialectical monotonicity can hold,
    but strengths ignore connection weights, so additivity fails.
    """

    instance = "toy"

    def __init__(self, tolerance=1e-6, attach_reports=True):
        self.tolerance = tolerance
        self.attach_reports = attach_reports

    def fit(self, net, corpus=None):
        for spec in net.layers:
            if spec.kind not in ("dense", "flatten"):
                raise ArchitectureError("toy explanations cover dense networks only")
        self.net_ = net
        strata = select_strata(net, StrataSpec(kind="toy", class_index=0))
        self.base_influence_ = extract_influence_graph(net, strata)
        self.hidden_layer_ = net.n_layers - 1
        return self

    def _encode(self, x):
        return as_f64(x, "input").reshape(-1)

    def explain(self, x) -> ExplanationBundle:
        self._check_fitted()
        net = self.net_
        vec = self._encode(x)
        rec = forward(net, vec)
        cls, prob = predict(net, vec)
        out_idx = _out_index(net, cls)
        strata = select_strata(net, StrataSpec(kind="toy", class_index=out_idx))
        influence = _swap_output(self.base_influence_, strata)

        w_in = net.layers[0].weights
        w_out = net.layers[-1].weights
        a_in = rec.layer(0)
        a_hidden = rec.layer(self.hidden_layer_)

        def contribution(src: Node, dst: Node) -> float:
            if dst.name == "out":
                j = int(src.name[1:])
                return float(w_out[j, out_idx] * a_hidden[j])
            i, j = int(src.name[1:]), int(dst.name[1:])
            return float(w_in[i, j] * a_in[i])

        chars = (
            Characterization(kind="support", test=lambda s, d: contribution(s, d) > 0),
            Characterization(kind="attack", test=lambda s, d: contribution(s, d) < 0),
        )
        gaf = extract_gaf(influence, chars)

        activations = {"out": float(rec.output[out_idx])}
        activations.update({f"x{i}": float(a) for i, a in enumerate(a_in)})
        activations.update({f"h{j}": float(a) for j, a in enumerate(a_hidden)})

        strengths = assign_strengths(
            gaf,
            StrengthSpec(
                root=lambda: activations["out"],
                intermediate=lambda name: abs(activations[name]),
                input=lambda src, dst: abs(activations[src]),
            ),
        )

        reports = ()
        if self.attach_reports:
            reports = (
                check_dialectical_monotonicity(gaf, strengths, self.tolerance),
                check_additive_monotonicity(gaf, strengths, self.tolerance, notes=self._bias_note()),
            )
        return ExplanationBundle(
            instance=self.instance,
            input_echo={"vector": [float(v) for v in vec]},
            prediction_class=cls,
            prediction_label=self._label(cls),
            prediction_probability=prob,
            gaf=gaf,
            strengths=strengths,
            context={"activations": activations},
            reports=reports,
            bias_free=net.bias_free,
        )


def _swap_output(base: InfluenceGraph, strata: Strata) -> InfluenceGraph:
    """Reuse a cached influence graph with a different output node.

    The influencer sets are structural, hence identical for every output
    neuron of a dense output layer; only the strata (labels, class node)
    change per input.
    """
    return InfluenceGraph(strata=strata, parents=base.parents)


EXPLAINERS = {
    "text-cnn": TextCnnExplainer,
    "image-cnn": ImageCnnExplainer,
    "tabular-ffnn": TabularFfnnExplainer,
    "toy": ToyExplainer,
}


def explainer_for(instance: str, **params) -> BaseExplainer:
    if instance not in EXPLAINERS:
        raise ValueError(f"unknown instance {instance!r}; choose from {sorted(EXPLAINERS)}")
    return EXPLAINERS[instance](**params)


def explain_text_cnn(net, tokens, **params) -> ExplanationBundle:
    return TextCnnExplainer(**params).fit(net).explain(tokens)


def explain_image_cnn(net, image, **params) -> ExplanationBundle:
    return ImageCnnExplainer(**params).fit(net).explain(image)


def explain_tabular_ffnn(net, record, **params) -> ExplanationBundle:
    return TabularFfnnExplainer(**params).fit(net).explain(record)
