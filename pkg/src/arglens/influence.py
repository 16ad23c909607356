"""Strata over (groups of) neurons and the influence graph between them.

A stratum is an ordered set of nodes; a node is a single neuron or a
named group of neurons from one layer. Influences are path-reachability
edges between consecutive strata, computed on the network's structural
connectivity (zero weights still count as edges).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArchitectureError, InvalidStrataError
from .model import LayerSpec, NeuralGraph


@dataclass(frozen=True)
class Node:
    """A neuron or neuron group promoted to an explanation-graph node."""

    name: str
    neurons: tuple
    label: str = ""

    def __post_init__(self):
        if not self.neurons:
            raise InvalidStrataError(f"node {self.name!r} has no member neurons")
        if not self.label:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class Strata:
    """Ordered disjoint node sets; the last stratum is the output node."""

    levels: tuple

    def __post_init__(self):
        if len(self.levels) <= 2:
            raise InvalidStrataError(f"need more than 2 strata, got {len(self.levels)}")
        if len(self.levels[-1]) != 1:
            raise InvalidStrataError("the last stratum must be a single output node")
        seen = set()
        for level in self.levels:
            for node in level:
                for neuron in node.neurons:
                    if neuron in seen:
                        raise InvalidStrataError(f"neuron {neuron} appears in two strata")
                    seen.add(neuron)

    @property
    def k(self) -> int:
        return len(self.levels)

    @property
    def output_node(self) -> Node:
        return self.levels[-1][0]

    @property
    def sizes(self) -> tuple:
        return tuple(len(level) for level in self.levels)

    def level(self, i: int) -> tuple:
        """1-based stratum access."""
        return self.levels[i - 1]


@dataclass(frozen=True)
class StrataSpec:
    """Declarative stratum selector.

    ``kind`` picks a per-architecture rule; ``class_index`` selects the
    output neuron (the predicted class of the input being explained).
    ``custom`` takes explicit levels and may allow non-adjacent paths.
    """

    kind: str  # text-cnn | image-cnn | tabular-ffnn | toy | custom
    class_index: int = 0
    levels: tuple | None = None
    allow_skip: bool = False

    KINDS = ("text-cnn", "image-cnn", "tabular-ffnn", "toy", "custom")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown strata kind {self.kind!r}")
        if self.kind == "custom" and self.levels is None:
            raise ValueError("custom strata need explicit levels")


@dataclass(frozen=True)
class InfluenceGraph:
    """Strata plus reachability edges between consecutive strata.

    ``parents[i]`` maps a node name at stratum i+2 (1-based) to the names
    of its influencing nodes at stratum i+1, in stratum order.
    """

    strata: Strata
    parents: tuple

    def parent_names(self, stratum: int, node_name: str) -> tuple:
        """Influencers in stratum-1 of ``node_name`` at 1-based ``stratum``."""
        return self.parents[stratum - 2].get(node_name, ())

    @property
    def edge_count(self) -> int:
        return sum(len(v) for level in self.parents for v in level.values())

    def edges(self):
        for level_idx, level in enumerate(self.parents):
            for dst, srcs in level.items():
                for src in srcs:
                    yield (src, dst, level_idx + 1)


# -- stratum selection -------------------------------------------------------


def _require_layers(net: NeuralGraph, kinds: tuple, what: str) -> list[int]:
    chain = tuple(spec.kind for spec in net.layers)
    positions = []
    i = 0
    for want in kinds:
        while i < len(chain) and chain[i] != want:
            i += 1
        if i == len(chain):
            raise ArchitectureError(f"{what} needs layer chain containing {kinds}, got {chain}")
        positions.append(i + 1)  # 1-based layer index of this layer's output
        i += 1
    return positions


def _token_label(net: NeuralGraph, token_id: int) -> str:
    vocab = net.vocab
    if vocab is not None and 0 <= token_id < len(vocab):
        return vocab[token_id]
    return f"tok{token_id}"


def select_strata(net: NeuralGraph, spec: StrataSpec, input_values=None) -> Strata:
    """Resolve a declarative selector into concrete strata.

    For built-in kinds the intermediate choices depend only on the model
    and can be reused across inputs; only the output node tracks the
    predicted class. ``input_values`` is used solely for display labels
    (token strings on text networks).
    """
    if spec.kind == "custom":
        return Strata(levels=spec.levels)

    out_layer = net.n_layers
    out_node = Node(
        name="out",
        neurons=(net.neuron_id(out_layer, spec.class_index),),
        label=(net.labels[spec.class_index] if spec.class_index < len(net.labels) else f"class{spec.class_index}"),
    )

    if spec.kind == "text-cnn":
        emb_layer, pool_layer = _require_layers(net, ("embedding", "global-maxpool-1d"), "text-cnn strata")
        emb = net.layers[emb_layer - 1]
        seq_len, dim = emb.shape["seq_len"], emb.shape["dim"]
        words = []
        for p in range(seq_len):
            label = f"w{p}"
            if input_values is not None:
                label = _token_label(net, int(np.asarray(input_values).reshape(-1)[p]))
            words.append(
                Node(
                    name=f"w{p}",
                    neurons=tuple(f"L{emb_layer}.{p * dim + d}" for d in range(dim)),
                    label=label,
                )
            )
        n_filters = net.layers[pool_layer - 1].shape["filters"]
        filters = tuple(
            Node(name=f"f{j}", neurons=(f"L{pool_layer}.{j}",), label=f"filter {j}") for j in range(n_filters)
        )
        return Strata(levels=(tuple(words), filters, (out_node,)))

    if spec.kind == "image-cnn":
        conv_layers = [i for i, s in enumerate(net.layers, start=1) if s.kind == "conv2d"]
        if not conv_layers:
            raise ArchitectureError("image-cnn strata need a conv2d layer")
        first, last = conv_layers[0], conv_layers[-1]
        fspec = net.layers[first - 1].shape
        h, w, c = fspec["in_h"], fspec["in_w"], fspec["in_channels"]
        pixels = []
        for y in range(h):
            for x in range(w):
                base = (y * w + x) * c
                pixels.append(
                    Node(
                        name=f"px{y},{x}",
                        neurons=tuple(f"L0.{base + ch}" for ch in range(c)),
                        label=f"pixel ({y},{x})",
                    )
                )
        lspec = net.layers[last - 1]
        oh, ow = lspec.conv_out_hw
        filters = tuple(
            Node(
                name=f"f{j}",
                neurons=tuple(f"L{last}.{j * oh * ow + i}" for i in range(oh * ow)),
                label=f"filter {j}",
            )
            for j in range(lspec.shape["filters"])
        )
        return Strata(levels=(tuple(pixels), filters, (out_node,)))

    if spec.kind == "tabular-ffnn":
        hidden_layer = _hidden_stage(net)
        features = net.metadata.get("features")
        inputs = []
        for i in range(net.input_size):
            label = f"x{i}"
            if features:
                label = _onehot_label(features, i)
            inputs.append(Node(name=f"x{i}", neurons=(f"L0.{i}",), label=label))
        hidden = tuple(
            Node(name=f"h{j}", neurons=(f"L{hidden_layer}.{j}",), label=f"hidden {j}")
            for j in range(net.layer_size(hidden_layer))
        )
        return Strata(levels=(tuple(inputs), hidden, (out_node,)))

    # toy: one stratum per layer boundary of a small dense net
    inputs = tuple(Node(name=f"x{i}", neurons=(f"L0.{i}",), label=f"x{i}") for i in range(net.input_size))
    hidden_layer = _hidden_stage(net)
    hidden = tuple(
        Node(name=f"h{j}", neurons=(f"L{hidden_layer}.{j}",), label=f"h{j}")
        for j in range(net.layer_size(hidden_layer))
    )
    return Strata(levels=(inputs, hidden, (out_node,)))


def _hidden_stage(net: NeuralGraph) -> int:
    """Layer index of the hidden stage feeding the output layer.

    For a dense net with a trailing activation stage (e.g. tanh followed
    by a standalone ReLU) this is the post-activation-stage layer.
    """
    if net.n_layers < 2 or net.layers[-1].kind != "dense":
        raise ArchitectureError("tabular strata need a dense output layer")
    return net.n_layers - 1


def _onehot_label(features, index: int) -> str:
    offset = 0
    for feature in features:
        values = feature["values"]
        if index < offset + len(values):
            return f"{feature['name']}={values[index - offset]}"
        offset += len(values)
    return f"x{index}"


# -- reachability ------------------------------------------------------------


def _structural_step(spec: LayerSpec, frontier: np.ndarray) -> np.ndarray:
    """One forward step of reachability through a layer's structural edges."""
    s = spec.shape
    if spec.kind == "dense":
        return np.full(spec.out_size, bool(frontier.any()))
    if spec.kind == "embedding":
        return np.repeat(frontier, s["dim"])
    if spec.kind == "conv1d":
        pos_any = frontier.reshape(s["in_len"], s["in_channels"]).any(axis=1)
        out_len = spec.conv_out_len
        hit = np.zeros(out_len, dtype=bool)
        for dw in range(s["width"]):
            hit |= pos_any[dw : dw + out_len]
        return np.tile(hit, s["filters"])
    if spec.kind == "global-maxpool-1d":
        return frontier.reshape(s["filters"], s["in_len"]).any(axis=1)
    if spec.kind == "conv2d":
        pos_any = frontier.reshape(s["in_h"], s["in_w"], s["in_channels"]).any(axis=2)
        oh, ow = spec.conv_out_hw
        hit = np.zeros((oh, ow), dtype=bool)
        for dy in range(s["kh"]):
            for dx in range(s["kw"]):
                hit |= pos_any[dy : dy + oh, dx : dx + ow]
        return np.tile(hit.reshape(-1), s["filters"])
    if spec.kind == "maxpool-2d":
        oh, ow = spec.pool_out_hw
        grid = frontier.reshape(s["channels"], oh, s["pool_h"], ow, s["pool_w"])
        return grid.any(axis=(2, 4)).reshape(-1)
    return frontier.copy()  # flatten


def _frontier_of(net: NeuralGraph, nodes, layer: int) -> np.ndarray:
    frontier = np.zeros(net.layer_size(layer), dtype=bool)
    for node in nodes:
        for neuron in node.neurons:
            nl, ni = net.locate(neuron)
            if nl == layer:
                frontier[ni] = True
    return frontier


def _node_layer(net: NeuralGraph, node: Node) -> int:
    layers = {net.locate(n)[0] for n in node.neurons}
    if len(layers) != 1:
        raise InvalidStrataError(f"node {node.name!r} spans several layers")
    return layers.pop()


def _reaches(net: NeuralGraph, src: Node, dst: Node, blocked=None) -> bool:
    """Is there a directed path from a neuron of src to a neuron of dst?"""
    src_layer, dst_layer = _node_layer(net, src), _node_layer(net, dst)
    if dst_layer <= src_layer:
        return False
    frontier = _frontier_of(net, (src,), src_layer)
    for layer in range(src_layer + 1, dst_layer + 1):
        frontier = _structural_step(net.layers[layer - 1], frontier)
        if blocked is not None and layer in blocked:
            frontier = frontier & ~blocked[layer]
        if not frontier.any():
            return False
    dst_mask = _frontier_of(net, (dst,), dst_layer)
    return bool((frontier & dst_mask).any())


def extract_influence_graph(net: NeuralGraph, strata: Strata, *, allow_skip: bool = False) -> InfluenceGraph:
    """Path-reachability influences between consecutive strata.

    Unless ``allow_skip`` is set, strata admitting an influence that
    jumps over an intermediate stratum (a path avoiding every node of
    the strata in between) are rejected.
    """
    if _node_layer(net, strata.output_node) != net.n_layers:
        raise InvalidStrataError(
            f"output node {strata.output_node.name!r} is not in the output layer"
        )
    parents = []
    for i in range(1, strata.k):
        below, above = strata.level(i), strata.level(i + 1)
        level_parents = {}
        for dst in above:
            srcs = tuple(src.name for src in below if _reaches(net, src, dst))
            if srcs:
                level_parents[dst.name] = srcs
        parents.append(level_parents)

    if not allow_skip:
        _check_no_skip(net, strata)
    return InfluenceGraph(strata=strata, parents=tuple(parents))


def _check_no_skip(net: NeuralGraph, strata: Strata) -> None:
    for i in range(1, strata.k - 1):
        for j in range(i + 2, strata.k + 1):
            blocked = {}
            for mid in range(i + 1, j):
                for node in strata.level(mid):
                    layer = _node_layer(net, node)
                    mask = blocked.setdefault(layer, np.zeros(net.layer_size(layer), dtype=bool))
                    mask |= _frontier_of(net, (node,), layer)
            for src in strata.level(i):
                for dst in strata.level(j):
                    if _reaches(net, src, dst, blocked=blocked):
                        raise InvalidStrataError(
                            f"influence from {src.name!r} (stratum {i}) skips to "
                            f"{dst.name!r} (stratum {j})"
                        )
