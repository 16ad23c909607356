"""Quantitative measures behind relation tests and dialectical strengths.

Three families are computed from a forward pass:

* relevance back-propagation with the zero-order rule
  ``R_i = sum_j (a_i w_ij / sum_l a_l w_lj) R_j``, conserving the seeded
  relevance layer by layer on bias-free networks;
* per-filter gradient-weighted class activation maps for 2-d
  convolutional networks;
* plain linear contributions ``w_xy * a_x`` along single edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backward import backward
from .errors import ArchitectureError
from .forward import ActivationRecord
from .model import LayerSpec, NeuralGraph

EPS = 1e-9


def _stabilize(z: np.ndarray) -> np.ndarray:
    """Shift denominators away from zero by a signed epsilon."""
    sign = np.where(z >= 0, 1.0, -1.0)
    return np.where(np.abs(z) < EPS, z + sign * EPS, z)


def _redistribute(spec: LayerSpec, record: ActivationRecord, layer: int, r_out: np.ndarray) -> np.ndarray:
    """Push relevance from layer ``layer`` outputs onto its inputs."""
    s = spec.shape
    a_in = record.activations[layer - 1]
    z = record.pre_activations[layer - 1]
    if spec.kind == "dense":
        frac = r_out / _stabilize(z)
        return a_in * (spec.weights @ frac)
    if spec.kind == "embedding":
        # word-level stop: a token position collects its vector's relevance
        return r_out.reshape(s["seq_len"], s["dim"]).sum(axis=1)
    if spec.kind == "conv1d":
        out_len = spec.conv_out_len
        frac = (r_out / _stabilize(z)).reshape(s["filters"], out_len)
        grid = a_in.reshape(s["in_len"], s["in_channels"])
        r_in = np.zeros_like(grid)
        for dw in range(s["width"]):
            r_in[dw : dw + out_len] += grid[dw : dw + out_len] * np.einsum(
                "ft,fc->tc", frac, spec.weights[:, dw, :]
            )
        return r_in.reshape(-1)
    if spec.kind in ("global-maxpool-1d", "maxpool-2d"):
        r_in = np.zeros(spec.in_size)
        np.add.at(r_in, record.winners[layer], r_out)
        return r_in
    if spec.kind == "conv2d":
        oh, ow = spec.conv_out_hw
        frac = (r_out / _stabilize(z)).reshape(s["filters"], oh, ow)
        grid = a_in.reshape(s["in_h"], s["in_w"], s["in_channels"])
        r_in = np.zeros_like(grid)
        for dy in range(s["kh"]):
            for dx in range(s["kw"]):
                r_in[dy : dy + oh, dx : dx + ow, :] += grid[dy : dy + oh, dx : dx + ow, :] * np.einsum(
                    "fyx,fc->yxc", frac, spec.weights[:, dy, dx, :]
                )
        return r_in.reshape(-1)
    return r_out.copy()  # flatten: pass-through


@dataclass(frozen=True)
class RelevanceMap:
    """Relevance of every upstream neuron for one seeded source neuron.

    ``layer_relevance[i]`` holds per-neuron relevance at layer i (for the
    layer of an embedding output, index i-1 additionally collapses to one
    entry per token position).
    """

    source: str
    seed: float
    layer_relevance: tuple[np.ndarray, ...]
    node_relevance: dict

    def relevance(self, node_name: str) -> float:
        return self.node_relevance.get(node_name, 0.0)

    def layer_sum(self, layer: int) -> float:
        return float(self.layer_relevance[layer].sum())


def lrp0_backward(net: NeuralGraph, record: ActivationRecord, source: str, targets, seed_value=None) -> RelevanceMap:
    """Back-propagate the source activation onto the target nodes.

    ``targets`` is a sequence of nodes (see :mod:`arglens.influence`);
    group nodes receive the sum over their member neurons. Targets not
    upstream of the source get relevance 0. ``seed_value`` overrides the
    seeded quantity (default: the source's activation), e.g. to relate
    relevances to a pre-softmax class score instead.
    """
    src_layer, src_index = net.locate(source)
    seed = float(record.activations[src_layer][src_index]) if seed_value is None else float(seed_value)
    per_layer: list[np.ndarray | None] = [None] * (net.n_layers + 1)
    r = np.zeros(net.layer_size(src_layer))
    r[src_index] = seed
    per_layer[src_layer] = r
    for layer in range(src_layer, 0, -1):
        r = _redistribute(net.layers[layer - 1], record, layer, r)
        per_layer[layer - 1] = r

    node_relevance = {}
    for node in targets:
        total = 0.0
        for neuron in node.neurons:
            layer, index = net.locate(neuron)
            values = per_layer[layer]
            if values is None:
                continue  # downstream of the source: unreachable, stays 0
            total += float(values[index])
        node_relevance[node.name] = total

    filled = tuple(
        per_layer[i] if per_layer[i] is not None else np.zeros(net.layer_size(i))
        for i in range(net.n_layers + 1)
    )
    return RelevanceMap(source=source, seed=seed, layer_relevance=filled, node_relevance=node_relevance)


@dataclass(frozen=True)
class GradCamResult:
    """Per-filter importance weights and input-sized weighted maps."""

    class_neuron: str
    importance: np.ndarray    # g, one weight per filter
    maps: np.ndarray          # G, shape (filters, in_h, in_w), clamped >= 0
    raw_maps: np.ndarray      # A, shape (filters, out_h, out_w)

    @property
    def total(self) -> float:
        return float(self.maps.sum())

    def filter_sum(self, j: int) -> float:
        return float(self.maps[j].sum())


def _nearest_neighbor_upscale(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    src_h, src_w = grid.shape
    ys = np.floor(np.arange(out_h) * (src_h / out_h)).astype(int)
    xs = np.floor(np.arange(out_w) * (src_w / out_w)).astype(int)
    return grid[np.ix_(ys, xs)]


def gradcam(net: NeuralGraph, record: ActivationRecord, class_neuron: str) -> GradCamResult:
    """Weighted forward activation maps of the last 2-d convolutional layer.

    The importance weight of filter j is the spatial mean of the gradient
    of the pre-activation class score w.r.t. the filter's activation map;
    the map is the filter's activation scaled by that weight, clamped at
    zero, and resized to the input size by nearest neighbor.
    """
    conv_layers = [i for i, spec in enumerate(net.layers, start=1) if spec.kind == "conv2d"]
    if not conv_layers:
        raise ArchitectureError("gradient-weighted maps need a conv2d layer")
    layer = conv_layers[-1]
    spec = net.layers[layer - 1]
    oh, ow = spec.conv_out_hw
    n_filters = spec.shape["filters"]

    in_h, in_w = net.layers[conv_layers[0] - 1].shape["in_h"], net.layers[conv_layers[0] - 1].shape["in_w"]
    cls_layer, _ = net.locate(class_neuron)
    if cls_layer != net.n_layers:
        raise ArchitectureError("class neuron must lie in the output layer")

    grads = backward(net, record, class_neuron, of_preactivation=True)
    grad_maps = grads.layer(layer).reshape(n_filters, oh, ow)
    a_maps = record.layer(layer).reshape(n_filters, oh, ow)
    importance = grad_maps.mean(axis=(1, 2))
    maps = np.empty((n_filters, in_h, in_w))
    for j in range(n_filters):
        weighted = np.maximum(importance[j] * a_maps[j], 0.0)
        maps[j] = _nearest_neighbor_upscale(weighted, in_h, in_w)
    return GradCamResult(class_neuron=class_neuron, importance=importance, maps=maps, raw_maps=a_maps)


def linear_contribution(net: NeuralGraph, record: ActivationRecord, src: str, dst: str) -> float:
    """Contribution ``w(src, dst) * a(src)`` of one edge."""
    return net.weight(src, dst) * record.activation(src)
