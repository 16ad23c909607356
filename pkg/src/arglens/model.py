"""Network representation and the JSON model-bundle format.

A network is a chain of layers over float64 weights. Every Neuron has a
stable id ``L{layer}.{index}`` where layer 0 is the raw input and layer
``i`` is the output of ``layers[i-1]``. Layouts are fixed per kind:

* ``dense``            in: flat vector            out: flat vector
* ``embedding``        in: token ids (seq_len)    out: position-major (pos, dim)
* ``conv1d``           in: position-major (t, c)  out: filter-major (f, t)
* ``global-maxpool-1d``in: filter-major (f, t)    out: one value per filter
* ``conv2d``           in: row-major (h, w, c)    out: filter-major (f, y, x)
* ``maxpool-2d``       in: filter-major (f, y, x) out: filter-major (f, y, x)
* ``flatten``          identity on values (used both for reshaping and for
                       standalone activation stages such as a ReLU applied
                       after a tanh layer)

Biases are supported by the format but shipped fixtures are bias-free:
the additivity checks in :mod:`arglens.dialectics` hold exactly only
without bias terms, so explainers flag biased networks in their reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ModelFormatError

ACTIVATIONS = ("linear", "relu", "tanh", "sigmoid", "softmax")

LAYER_KINDS = (
    "dense",
    "embedding",
    "conv1d",
    "global-maxpool-1d",
    "conv2d",
    "maxpool-2d",
    "flatten",
)

# shape keys per kind, in serialization order
_SHAPE_KEYS = {
    "dense": ("in", "out"),
    "embedding": ("vocab", "dim", "seq_len"),
    "conv1d": ("filters", "width", "in_channels", "in_len"),
    "global-maxpool-1d": ("filters", "in_len"),
    "conv2d": ("filters", "kh", "kw", "in_channels", "in_h", "in_w"),
    "maxpool-2d": ("channels", "pool_h", "pool_w", "in_h", "in_w"),
    "flatten": ("size",),
}


@dataclass(frozen=True)
class LayerSpec:
    """One layer: kind, shape parameters, weights and activation tag."""

    kind: str
    activation: str
    shape: dict
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ModelFormatError(f"unknown layer kind {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ModelFormatError(f"unknown activation {self.activation!r}")
        missing = [k for k in _SHAPE_KEYS[self.kind] if k not in self.shape]
        if missing:
            raise ModelFormatError(f"{self.kind} layer missing shape keys {missing}")
        for key in _SHAPE_KEYS[self.kind]:
            if int(self.shape[key]) < 1:
                raise ModelFormatError(f"{self.kind} shape {key} must be >= 1")
        expected = self._weight_shape()
        if expected is None:
            if self.weights is not None:
                raise ModelFormatError(f"{self.kind} layer takes no weights")
        else:
            if self.weights is None:
                raise ModelFormatError(f"{self.kind} layer requires weights")
            if self.weights.size != int(np.prod(expected)):
                raise ModelFormatError(
                    f"{self.kind} layer declares {int(np.prod(expected))} weights "
                    f"({'x'.join(map(str, expected))}) but carries {self.weights.size}"
                )
            if not np.all(np.isfinite(self.weights)):
                raise ModelFormatError(f"{self.kind} layer has non-finite weights")
            object.__setattr__(self, "weights", self.weights.reshape(expected))
        if self.bias is not None:
            if self.bias.size != self.out_size:
                raise ModelFormatError(
                    f"{self.kind} bias has {self.bias.size} entries, expected {self.out_size}"
                )
            if not np.all(np.isfinite(self.bias)):
                raise ModelFormatError(f"{self.kind} layer has non-finite bias")
        if self.kind == "maxpool-2d":
            if self.shape["in_h"] % self.shape["pool_h"] or self.shape["in_w"] % self.shape["pool_w"]:
                raise ModelFormatError("maxpool-2d input size must divide by pool size")

    def _weight_shape(self):
        s = self.shape
        if self.kind == "dense":
            return (s["in"], s["out"])
        if self.kind == "embedding":
            return (s["vocab"], s["dim"])
        if self.kind == "conv1d":
            return (s["filters"], s["width"], s["in_channels"])
        if self.kind == "conv2d":
            return (s["filters"], s["kh"], s["kw"], s["in_channels"])
        return None

    @property
    def in_size(self) -> int:
        s = self.shape
        return {
            "dense": lambda: s["in"],
            "embedding": lambda: s["seq_len"],
            "conv1d": lambda: s["in_len"] * s["in_channels"],
            "global-maxpool-1d": lambda: s["filters"] * s["in_len"],
            "conv2d": lambda: s["in_h"] * s["in_w"] * s["in_channels"],
            "maxpool-2d": lambda: s["channels"] * s["in_h"] * s["in_w"],
            "flatten": lambda: s["size"],
        }[self.kind]()

    @property
    def out_size(self) -> int:
        s = self.shape
        if self.kind == "dense":
            return s["out"]
        if self.kind == "embedding":
            return s["seq_len"] * s["dim"]
        if self.kind == "conv1d":
            return s["filters"] * self.conv_out_len
        if self.kind == "global-maxpool-1d":
            return s["filters"]
        if self.kind == "conv2d":
            oh, ow = self.conv_out_hw
            return s["filters"] * oh * ow
        if self.kind == "maxpool-2d":
            return s["channels"] * (s["in_h"] // s["pool_h"]) * (s["in_w"] // s["pool_w"])
        return s["size"]

    @property
    def conv_out_len(self) -> int:
        return self.shape["in_len"] - self.shape["width"] + 1

    @property
    def conv_out_hw(self) -> tuple[int, int]:
        s = self.shape
        return (s["in_h"] - s["kh"] + 1, s["in_w"] - s["kw"] + 1)

    @property
    def pool_out_hw(self) -> tuple[int, int]:
        s = self.shape
        return (s["in_h"] // s["pool_h"], s["in_w"] // s["pool_w"])


@dataclass(frozen=True)
class NeuralGraph:
    """An immutable trained network: layers plus label/vocab metadata."""

    layers: tuple[LayerSpec, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.layers:
            raise ModelFormatError("a network needs at least one layer")
        for i in range(1, len(self.layers)):
            got, want = self.layers[i - 1].out_size, self.layers[i].in_size
            if got != want:
                raise ModelFormatError(
                    f"layer {i} expects {want} inputs but layer {i - 1} produces {got}"
                )
            if self.layers[i].kind == "embedding":
                raise ModelFormatError(f"layer {i}: embedding only allowed as first layer")

    @property
    def input_size(self) -> int:
        return self.layers[0].in_size

    @property
    def output_size(self) -> int:
        return self.layers[-1].out_size

    @property
    def labels(self) -> list[str]:
        return list(self.metadata.get("labels", []))

    @property
    def vocab(self) -> list[str] | None:
        v = self.metadata.get("vocab")
        return list(v) if v is not None else None

    @property
    def bias_free(self) -> bool:
        return all(layer.bias is None for layer in self.layers)

    def layer_size(self, layer: int) -> int:
        """Neuron count of layer ``layer`` (0 = raw input)."""
        if layer == 0:
            return self.input_size
        return self.layers[layer - 1].out_size

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def neuron_count(self) -> int:
        return sum(self.layer_size(i) for i in range(self.n_layers + 1))

    def neuron_id(self, layer: int, index: int) -> str:
        return f"L{layer}.{index}"

    def neuron_ids(self, layer: int) -> list[str]:
        return [f"L{layer}.{i}" for i in range(self.layer_size(layer))]

    def locate(self, neuron_id: str) -> tuple[int, int]:
        """Parse ``L{layer}.{index}`` and bounds-check it."""
        try:
            layer_s, index_s = neuron_id[1:].split(".")
            layer, index = int(layer_s), int(index_s)
        except (ValueError, IndexError):
            raise KeyError(f"malformed neuron id {neuron_id!r}") from None
        if not neuron_id.startswith("L") or not 0 <= layer <= self.n_layers:
            raise KeyError(f"unknown neuron id {neuron_id!r}")
        if not 0 <= index < self.layer_size(layer):
            raise KeyError(f"unknown neuron id {neuron_id!r}")
        return layer, index

    # -- structural connectivity ------------------------------------------

    def in_edges(self, layer: int, index: int) -> Iterator[int]:
        """Indices in layer ``layer - 1`` structurally feeding (layer, index)."""
        spec = self.layers[layer - 1]
        s = spec.shape
        if spec.kind == "dense":
            yield from range(s["in"])
        elif spec.kind == "embedding":
            yield index // s["dim"]
        elif spec.kind == "conv1d":
            t = index % spec.conv_out_len
            c_count = s["in_channels"]
            for dw in range(s["width"]):
                base = (t + dw) * c_count
                yield from range(base, base + c_count)
        elif spec.kind == "global-maxpool-1d":
            f = index
            base = f * s["in_len"]
            yield from range(base, base + s["in_len"])
        elif spec.kind == "conv2d":
            oh, ow = spec.conv_out_hw
            f, rest = divmod(index, oh * ow)
            y, x = divmod(rest, ow)
            for dy in range(s["kh"]):
                for dx in range(s["kw"]):
                    base = ((y + dy) * s["in_w"] + (x + dx)) * s["in_channels"]
                    yield from range(base, base + s["in_channels"])
        elif spec.kind == "maxpool-2d":
            oh, ow = spec.pool_out_hw
            f, rest = divmod(index, oh * ow)
            y, x = divmod(rest, ow)
            plane = f * s["in_h"] * s["in_w"]
            for dy in range(s["pool_h"]):
                row = (y * s["pool_h"] + dy) * s["in_w"]
                for dx in range(s["pool_w"]):
                    yield plane + row + x * s["pool_w"] + dx
        else:  # flatten
            yield index

    def weight(self, src_id: str, dst_id: str) -> float:
        """Weight of the structural edge ``src -> dst``; KeyError if absent."""
        sl, si = self.locate(src_id)
        dl, di = self.locate(dst_id)
        if dl != sl + 1:
            raise KeyError(f"no edge {src_id} -> {dst_id}: not consecutive layers")
        if si not in set(self.in_edges(dl, di)):
            raise KeyError(f"no edge {src_id} -> {dst_id}")
        spec = self.layers[dl - 1]
        s = spec.shape
        if spec.kind == "dense":
            return float(spec.weights[si, di])
        if spec.kind == "conv1d":
            t = di % spec.conv_out_len
            f = di // spec.conv_out_len
            pos, c = divmod(si, s["in_channels"])
            return float(spec.weights[f, pos - t, c])
        if spec.kind == "conv2d":
            oh, ow = spec.conv_out_hw
            f, rest = divmod(di, oh * ow)
            y, x = divmod(rest, ow)
            pos, c = divmod(si, s["in_channels"])
            iy, ix = divmod(pos, s["in_w"])
            return float(spec.weights[f, iy - y, ix - x, c])
        # pooling, flatten and embedding edges carry no learnt weight
        return 1.0


# -- model-bundle JSON -----------------------------------------------------

FORMAT_VERSION = 1


def _layer_to_json(layer: LayerSpec) -> dict:
    shape = {k: int(layer.shape[k]) for k in _SHAPE_KEYS[layer.kind]}
    return {
        "kind": layer.kind,
        "activation": layer.activation,
        "shape": shape,
        "weights": [] if layer.weights is None else [float(w) for w in layer.weights.reshape(-1)],
        "bias": None if layer.bias is None else [float(b) for b in layer.bias.reshape(-1)],
    }


def _layer_from_json(doc: dict, position: int) -> LayerSpec:
    try:
        kind = doc["kind"]
        activation = doc["activation"]
        shape = doc["shape"]
        raw_weights = doc["weights"]
        raw_bias = doc.get("bias")
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"layer {position}: missing field {exc}") from None
    weights = np.asarray(raw_weights, dtype=np.float64) if raw_weights else None
    bias = None if raw_bias is None else np.asarray(raw_bias, dtype=np.float64)
    try:
        return LayerSpec(kind=kind, activation=activation, shape=dict(shape), weights=weights, bias=bias)
    except ModelFormatError as exc:
        raise ModelFormatError(f"layer {position}: {exc}") from None


def to_bundle(net: NeuralGraph) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "layers": [_layer_to_json(layer) for layer in net.layers],
        "metadata": dict(net.metadata),
    }


def from_bundle(doc: dict) -> NeuralGraph:
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError("not a model bundle (format_version != 1)")
    layers = tuple(_layer_from_json(layer, i) for i, layer in enumerate(doc.get("layers", [])))
    return NeuralGraph(layers=layers, metadata=dict(doc.get("metadata", {})))


def dumps_bundle(net: NeuralGraph) -> str:
    """Canonical serialization: fixed field order, compact separators."""
    return json.dumps(to_bundle(net), ensure_ascii=False, separators=(",", ":"))


def save_model(net: NeuralGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_bundle(net))


def load_model(path_or_doc) -> NeuralGraph:
    """Load a bundle from a path, JSON string, or already-parsed dict."""
    if isinstance(path_or_doc, dict):
        return from_bundle(path_or_doc)
    if isinstance(path_or_doc, str) and path_or_doc.lstrip().startswith("{"):
        return from_bundle(json.loads(path_or_doc))
    with open(path_or_doc, encoding="utf-8") as fh:
        return from_bundle(json.load(fh))
