"""Seeded training of desk-scale fixture networks.

Supports the layer kinds of :mod:`arglens.model` with cross-entropy on
softmax outputs and per-unit binary cross-entropy on sigmoid outputs.
Fixtures are trained bias-free by default: the additivity properties
checked downstream hold exactly only without bias terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backward import _activation_jacobian_vp, _linear_backward
from .errors import TrainingDivergedError
from .forward import forward
from .model import LayerSpec, NeuralGraph
from .validation import check_positive


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    learning_rate: float = 0.01
    epochs: int = 30
    batch_size: int = 32

    def __post_init__(self):
        check_positive(self.learning_rate, "learning_rate")
        check_positive(self.batch_size, "batch_size")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass(frozen=True)
class TrainResult:
    net: NeuralGraph
    train_accuracy: float
    losses: tuple


def init_network(arch, seed: int, metadata=None) -> NeuralGraph:
    """Glorot-uniform initialization of an architecture description.

    ``arch`` is a list of (kind, activation, shape) dicts, i.e. bundle
    layers without weights.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for item in arch:
        kind, activation, shape = item["kind"], item["activation"], dict(item["shape"])
        probe = LayerSpec(kind=kind, activation=activation, shape=shape,
                          weights=_zero_weights(kind, shape))
        weights = None
        if probe._weight_shape() is not None:
            wshape = probe._weight_shape()
            if kind == "embedding":
                weights = rng.normal(0.0, 0.1, size=wshape)
            else:
                fan_in = int(np.prod(wshape[:-1])) if kind != "dense" else wshape[0]
                fan_out = wshape[-1]
                lim = np.sqrt(6.0 / (fan_in + fan_out))
                scale = float(item.get("init_scale", 1.0))
                weights = rng.uniform(-lim, lim, size=wshape) * scale
        layers.append(LayerSpec(kind=kind, activation=activation, shape=shape, weights=weights))
    return NeuralGraph(layers=tuple(layers), metadata=dict(metadata or {}))


def _zero_weights(kind, shape):
    probe_shapes = {
        "dense": (shape.get("in", 1), shape.get("out", 1)),
        "embedding": (shape.get("vocab", 1), shape.get("dim", 1)),
        "conv1d": (shape.get("filters", 1), shape.get("width", 1), shape.get("in_channels", 1)),
        "conv2d": (shape.get("filters", 1), shape.get("kh", 1), shape.get("kw", 1), shape.get("in_channels", 1)),
    }
    if kind in probe_shapes:
        return np.zeros(probe_shapes[kind])
    return None


def _weight_gradient(spec: LayerSpec, a_in: np.ndarray, dz: np.ndarray) -> np.ndarray | None:
    s = spec.shape
    if spec.kind == "dense":
        return np.outer(a_in, dz)
    if spec.kind == "embedding":
        grad = np.zeros_like(spec.weights)
        per_pos = dz.reshape(s["seq_len"], s["dim"])
        np.add.at(grad, a_in.astype(int), per_pos)
        return grad
    if spec.kind == "conv1d":
        out_len = spec.conv_out_len
        g = dz.reshape(s["filters"], out_len)
        grid = a_in.reshape(s["in_len"], s["in_channels"])
        grad = np.zeros_like(spec.weights)
        for dw in range(s["width"]):
            grad[:, dw, :] = np.einsum("ft,tc->fc", g, grid[dw : dw + out_len])
        return grad
    if spec.kind == "conv2d":
        oh, ow = spec.conv_out_hw
        g = dz.reshape(s["filters"], oh, ow)
        grid = a_in.reshape(s["in_h"], s["in_w"], s["in_channels"])
        grad = np.zeros_like(spec.weights)
        for dy in range(s["kh"]):
            for dx in range(s["kw"]):
                grad[:, dy, dx, :] = np.einsum("fyx,yxc->fc", g, grid[dy : dy + oh, dx : dx + ow])
        return grad
    return None


def _loss_and_dz(out: np.ndarray, activation: str, label: int) -> tuple[float, np.ndarray]:
    eps = 1e-12
    target = np.zeros_like(out)
    if out.size == 1:
        target[0] = float(label)
    else:
        target[label] = 1.0
    if activation == "softmax":
        loss = -float(np.log(out[label] + eps))
        return loss, out - target
    if activation == "sigmoid":
        loss = -float(np.sum(target * np.log(out + eps) + (1 - target) * np.log(1 - out + eps)))
        return loss, out - target
    raise ValueError(f"training needs softmax or sigmoid output, got {activation}")


class _Adam:
    def __init__(self, shapes, lr):
        self.lr = lr
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            if g is None:
                out.append(p)
                continue
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1**self.t)
            vhat = self.v[i] / (1 - self.beta2**self.t)
            out.append(p - self.lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


def _rebuild(net: NeuralGraph, weights) -> NeuralGraph:
    layers = tuple(
        LayerSpec(kind=l.kind, activation=l.activation, shape=l.shape, weights=w, bias=l.bias)
        for l, w in zip(net.layers, weights)
    )
    return NeuralGraph(layers=layers, metadata=net.metadata)


def evaluate_accuracy(net: NeuralGraph, inputs, labels) -> float:
    from .forward import predict

    hits = 0
    for x, y in zip(inputs, labels):
        cls, _ = predict(net, x)
        hits += int(cls == y)
    return hits / len(labels)


def train_toy(arch_or_net, inputs, labels, config: TrainConfig, metadata=None) -> TrainResult:
    """Train a small network deterministically; pure given the seed.

    ``arch_or_net`` is either an architecture description for
    :func:`init_network` or an already-initialized network. Zero epochs
    return the seeded initialization unchanged. Aborts with
    :class:`TrainingDivergedError` if the loss becomes non-finite.
    """
    if isinstance(arch_or_net, NeuralGraph):
        net = arch_or_net
    else:
        net = init_network(arch_or_net, config.seed, metadata)
    rng = np.random.default_rng(config.seed + 1)
    weights = [None if l.weights is None else l.weights.copy() for l in net.layers]
    shapes = [() if w is None else w.shape for w in weights]
    adam = _Adam(shapes, config.learning_rate)
    n = len(inputs)
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = [None if w is None else np.zeros_like(w) for w in weights]
            current = _rebuild(net, weights)
            for idx in batch:
                record = forward(current, inputs[idx])
                loss, dz = _loss_and_dz(record.output, current.layers[-1].activation, int(labels[idx]))
                epoch_loss += loss
                for layer in range(current.n_layers, 0, -1):
                    spec = current.layers[layer - 1]
                    if layer != current.n_layers:
                        dz = _activation_jacobian_vp(spec, record, layer, da)
                    g = _weight_gradient(spec, record.activations[layer - 1], dz)
                    if g is not None:
                        grads[layer - 1] += g
                    da = _linear_backward(spec, record, layer, dz)
            scaled = [None if g is None else g / len(batch) for g in grads]
            weights = adam.step(weights, scaled)
        epoch_loss /= n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        losses.append(epoch_loss)
    final = _rebuild(net, weights)
    accuracy = evaluate_accuracy(final, inputs, labels) if config.epochs > 0 else float("nan")
    return TrainResult(net=final, train_accuracy=accuracy, losses=tuple(losses))
