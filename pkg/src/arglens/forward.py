"""Deterministic forward evaluation producing a full activation record."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArchitectureError
from .model import LayerSpec, NeuralGraph
from .validation import as_f64, check_length, check_token_ids


def apply_activation(tag: str, z: np.ndarray) -> np.ndarray:
    if tag == "linear":
        return z
    if tag == "relu":
        return np.maximum(z, 0.0)
    if tag == "tanh":
        return np.tanh(z)
    if tag == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    # softmax, numerically shifted
    e = np.exp(z - z.max())
    return e / e.sum()


def _layer_forward(spec: LayerSpec, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Linear part of one layer. Returns (pre-activation, pool winners)."""
    s = spec.shape
    if spec.kind == "dense":
        z = x @ spec.weights
        winners = None
    elif spec.kind == "embedding":
        ids = check_token_ids(x, s["vocab"])
        z = spec.weights[ids].reshape(-1)
        winners = None
    elif spec.kind == "conv1d":
        grid = x.reshape(s["in_len"], s["in_channels"])
        out_len = spec.conv_out_len
        windows = np.stack([grid[t : t + s["width"]] for t in range(out_len)])
        z = np.einsum("twc,fwc->ft", windows, spec.weights).reshape(-1)
        winners = None
    elif spec.kind == "global-maxpool-1d":
        grid = x.reshape(s["filters"], s["in_len"])
        arg = grid.argmax(axis=1)  # numpy argmax: first (lowest) index wins ties
        z = grid[np.arange(s["filters"]), arg]
        winners = arg + np.arange(s["filters"]) * s["in_len"]
    elif spec.kind == "conv2d":
        grid = x.reshape(s["in_h"], s["in_w"], s["in_channels"])
        oh, ow = spec.conv_out_hw
        zmap = np.zeros((s["filters"], oh, ow))
        for dy in range(s["kh"]):
            for dx in range(s["kw"]):
                patch = grid[dy : dy + oh, dx : dx + ow, :]
                zmap += np.einsum("yxc,fc->fyx", patch, spec.weights[:, dy, dx, :])
        z = zmap.reshape(-1)
        winners = None
    elif spec.kind == "maxpool-2d":
        grid = x.reshape(s["channels"], s["in_h"], s["in_w"])
        oh, ow = spec.pool_out_hw
        blocks = grid.reshape(s["channels"], oh, s["pool_h"], ow, s["pool_w"])
        blocks = blocks.transpose(0, 1, 3, 2, 4).reshape(s["channels"], oh, ow, -1)
        arg = blocks.argmax(axis=3)
        z = np.take_along_axis(blocks, arg[..., None], axis=3)[..., 0].reshape(-1)
        dy, dx = np.divmod(arg, s["pool_w"])
        ys = np.arange(oh)[None, :, None] * s["pool_h"] + dy
        xs = np.arange(ow)[None, None, :] * s["pool_w"] + dx
        plane = np.arange(s["channels"])[:, None, None] * (s["in_h"] * s["in_w"])
        winners = (plane + ys * s["in_w"] + xs).reshape(-1)
    else:  # flatten
        z = x.astype(np.float64, copy=True)
        winners = None
    if spec.bias is not None:
        z = z + spec.bias
    return z, winners


@dataclass(frozen=True)
class ActivationRecord:
    """All activations of one forward pass.

    ``activations[0]`` is the raw input (token ids for embedding-first
    networks); ``activations[i]`` the post-activation output of layer i.
    ``winners[i]`` maps each pooled unit of layer i to the absolute index
    of the winning neuron in layer i-1.
    """

    net: NeuralGraph
    activations: tuple[np.ndarray, ...]
    pre_activations: tuple[np.ndarray, ...]
    winners: dict

    def layer(self, layer: int) -> np.ndarray:
        return self.activations[layer]

    def activation(self, neuron_id: str) -> float:
        layer, index = self.net.locate(neuron_id)
        return float(self.activations[layer][index])

    def as_dict(self) -> dict:
        out = {}
        for layer, values in enumerate(self.activations):
            for index, value in enumerate(values):
                out[f"L{layer}.{index}"] = float(value)
        return out

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(net: NeuralGraph, input_values) -> ActivationRecord:
    """Run the network on one input; pure and deterministic."""
    x = as_f64(input_values, "input").reshape(-1)
    check_length(x, net.input_size, "input")
    activations = [x]
    pre = []
    winners = {}
    for i, spec in enumerate(net.layers, start=1):
        z, layer_winners = _layer_forward(spec, activations[-1])
        pre.append(z)
        activations.append(apply_activation(spec.activation, z))
        if layer_winners is not None:
            winners[i] = layer_winners
    return ActivationRecord(
        net=net,
        activations=tuple(activations),
        pre_activations=tuple(pre),
        winners=winners,
    )


def predict(net: NeuralGraph, input_values) -> tuple[int, float]:
    """Most probable class and its probability.

    Ties break toward the lowest index. A single sigmoid output unit is
    read as a binary classifier: class 1 iff p > 0.5, reporting the
    probability of the chosen class.
    """
    out_act = net.layers[-1].activation
    if out_act not in ("softmax", "sigmoid"):
        raise ArchitectureError(f"predict needs softmax or sigmoid output, got {out_act}")
    record = forward(net, input_values)
    out = record.output
    if out_act == "sigmoid" and out.size == 1:
        p = float(out[0])
        cls = 1 if p > 0.5 else 0
        return cls, p if cls == 1 else 1.0 - p
    cls = int(out.argmax())
    return cls, float(out[cls])
