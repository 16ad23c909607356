"""Reverse-mode derivatives of one neuron's value w.r.t. all activations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import ActivationRecord
from .model import LayerSpec, NeuralGraph


@dataclass(frozen=True)
class GradientRecord:
    """d(target)/d(activation) for every neuron; zero after the target."""

    net: NeuralGraph
    target: str
    values: tuple[np.ndarray, ...]

    def gradient(self, neuron_id: str) -> float:
        layer, index = self.net.locate(neuron_id)
        return float(self.values[layer][index])

    def layer(self, layer: int) -> np.ndarray:
        return self.values[layer]

    def as_dict(self) -> dict:
        out = {}
        for layer, values in enumerate(self.values):
            for index, value in enumerate(values):
                out[f"L{layer}.{index}"] = float(value)
        return out


def _activation_jacobian_vp(spec: LayerSpec, record: ActivationRecord, layer: int, g_post: np.ndarray) -> np.ndarray:
    """Vector-times-Jacobian of the activation at ``layer``: g_post -> g_pre."""
    a = record.activations[layer]
    z = record.pre_activations[layer - 1]
    tag = spec.activation
    if tag == "linear":
        return g_post
    if tag == "relu":
        return g_post * (z > 0)
    if tag == "tanh":
        return g_post * (1.0 - a * a)
    if tag == "sigmoid":
        return g_post * a * (1.0 - a)
    # softmax couples the whole layer
    return a * (g_post - np.dot(g_post, a))


def _linear_backward(spec: LayerSpec, record: ActivationRecord, layer: int, g_pre: np.ndarray) -> np.ndarray:
    """Propagate d/d(pre-activation of layer) to d/d(activation of layer-1)."""
    s = spec.shape
    if spec.kind == "dense":
        return spec.weights @ g_pre
    if spec.kind == "embedding":
        # token ids are symbolic inputs: no derivative flows to them
        return np.zeros(spec.in_size)
    if spec.kind == "conv1d":
        out_len = spec.conv_out_len
        g = g_pre.reshape(s["filters"], out_len)
        g_in = np.zeros((s["in_len"], s["in_channels"]))
        for dw in range(s["width"]):
            # contribution of output position t to input position t+dw
            g_in[dw : dw + out_len] += np.einsum("ft,fc->tc", g, spec.weights[:, dw, :])
        return g_in.reshape(-1)
    if spec.kind == "global-maxpool-1d":
        g_in = np.zeros(spec.in_size)
        np.add.at(g_in, record.winners[layer], g_pre)
        return g_in
    if spec.kind == "conv2d":
        oh, ow = spec.conv_out_hw
        g = g_pre.reshape(s["filters"], oh, ow)
        g_in = np.zeros((s["in_h"], s["in_w"], s["in_channels"]))
        for dy in range(s["kh"]):
            for dx in range(s["kw"]):
                g_in[dy : dy + oh, dx : dx + ow, :] += np.einsum(
                    "fyx,fc->yxc", g, spec.weights[:, dy, dx, :]
                )
        return g_in.reshape(-1)
    if spec.kind == "maxpool-2d":
        g_in = np.zeros(spec.in_size)
        np.add.at(g_in, record.winners[layer], g_pre)
        return g_in
    return g_pre.copy()  # flatten


def backward(net: NeuralGraph, record: ActivationRecord, target: str, *, of_preactivation: bool = False) -> GradientRecord:
    """Gradients of the target neuron w.r.t. every activation.

    ``of_preactivation=True`` differentiates the target's pre-activation
    value instead (needed for class-score maps on softmax outputs).
    """
    t_layer, t_index = net.locate(target)
    values = [np.zeros(net.layer_size(i)) for i in range(net.n_layers + 1)]
    if t_layer == 0:
        if of_preactivation:
            raise ValueError("input neurons have no pre-activation")
        values[0][t_index] = 1.0
        return GradientRecord(net=net, target=target, values=tuple(values))

    seed = np.zeros(net.layer_size(t_layer))
    seed[t_index] = 1.0
    if of_preactivation:
        g_pre = seed
    else:
        values[t_layer][t_index] = 1.0
        g_pre = _activation_jacobian_vp(net.layers[t_layer - 1], record, t_layer, seed)

    for layer in range(t_layer, 0, -1):
        if layer != t_layer:
            g_pre = _activation_jacobian_vp(net.layers[layer - 1], record, layer, g_post)
        g_post = _linear_backward(net.layers[layer - 1], record, layer, g_pre)
        values[layer - 1] = values[layer - 1] + g_post
    return GradientRecord(net=net, target=target, values=tuple(values))


def gradient(net: NeuralGraph, record: ActivationRecord, target: str) -> GradientRecord:
    """Partial derivatives of the target activation w.r.t. all activations."""
    return backward(net, record, target, of_preactivation=False)
