"""Builders for the shipped desk-scale fixture models.

Trained fixtures are deterministic in the seed; the toy and the
hand-traceable text network carry fixed weights chosen so that their
explanation graphs can be derived by hand.
"""

from __future__ import annotations

import numpy as np

from . import datasets
from .model import LayerSpec, NeuralGraph
from .training import TrainConfig, train_toy


def build_toy_fixture() -> NeuralGraph:
    """3-3-1 tanh/sigmoid net with sparse hand-picked weights.

    On the canonical input (0.9, 0.9, 0.9) it yields a bipolar graph
    with two supporters and one attacker of the output, equal-strength
    leaves, and activation strengths that respect all three
    dialectical-monotonicity clauses (tanh responds monotonically to its
    weighted input) while failing additivity (weights are ignored).
    """
    w1 = np.array([
        [2.0, -1.5, 0.0],
        [0.0, 0.0, -0.5],
        [0.0, 2.6, 0.0],
    ])
    w2 = np.array([[1.0], [-1.0], [-1.0]])
    return NeuralGraph(
        layers=(
            LayerSpec(kind="dense", activation="tanh", shape={"in": 3, "out": 3}, weights=w1),
            LayerSpec(kind="dense", activation="sigmoid", shape={"in": 3, "out": 1}, weights=w2),
        ),
        metadata={"labels": ["no", "yes"]},
    )


TOY_INPUT = (0.9, 0.9, 0.9)


HAND_VOCAB = ["<pad>", "good", "bad", "movie", "great", "awful"]


def build_hand_text_fixture() -> NeuralGraph:
    """22-neuron text net with weights simple enough to trace on paper.

    Vocabulary of 6, embeddings of size 2, one conv layer with 2 filters
    of width 2 over 4 positions, global max pooling, softmax over 2
    classes.
    """
    embeddings = np.array([
        [0.0, 0.0],    # <pad>
        [1.0, 0.5],    # good
        [-1.0, 0.5],   # bad
        [0.2, 1.0],    # movie
        [2.0, 1.0],    # great
        [-2.0, 1.0],   # awful
    ])
    # filter 0 reads channel 0 of both window slots, filter 1 mixes
    kernels = np.array([
        [[1.0, 0.0], [1.0, 0.0]],
        [[0.5, -1.0], [-0.5, 1.0]],
    ])
    out = np.array([
        [1.0, -1.0],
        [0.5, 0.5],
    ])
    return NeuralGraph(
        layers=(
            LayerSpec(kind="embedding", activation="linear", shape={"vocab": 6, "dim": 2, "seq_len": 4}, weights=embeddings),
            LayerSpec(kind="conv1d", activation="relu", shape={"filters": 2, "width": 2, "in_channels": 2, "in_len": 4}, weights=kernels),
            LayerSpec(kind="global-maxpool-1d", activation="linear", shape={"filters": 2, "in_len": 3}),
            LayerSpec(kind="dense", activation="softmax", shape={"in": 2, "out": 2}, weights=out),
        ),
        metadata={"labels": ["negative", "positive"], "vocab": HAND_VOCAB},
    )


def text_arch(n_filters: int = 20, vocab_size: int = 500, seq_len: int = 150, dim: int = 16, width: int = 3):
    return [
        {"kind": "embedding", "activation": "linear", "shape": {"vocab": vocab_size, "dim": dim, "seq_len": seq_len}},
        {"kind": "conv1d", "activation": "relu", "shape": {"filters": n_filters, "width": width, "in_channels": dim, "in_len": seq_len}},
        {"kind": "global-maxpool-1d", "activation": "linear", "shape": {"filters": n_filters, "in_len": seq_len - width + 1}},
        {"kind": "dense", "activation": "softmax", "shape": {"in": n_filters, "out": len(datasets.TOPIC_LABELS)}},
    ]


def build_text_fixture(seed: int = 0, n_filters: int = 20, n_docs: int = 2000, epochs: int = 6):
    """Train the 4-topic text fixture; returns (result, vocab, docs, labels)."""
    vocab, docs, labels = datasets.make_text_corpus(n_docs=n_docs, seed=seed)
    seq_len = 150
    inputs = [np.array(datasets.pad_tokens(d, seq_len), dtype=float) for d in docs]
    config = TrainConfig(seed=seed, learning_rate=0.01, epochs=epochs, batch_size=32)
    result = train_toy(
        text_arch(n_filters=n_filters, vocab_size=len(vocab), seq_len=seq_len),
        inputs,
        labels,
        config,
        metadata={"labels": list(datasets.TOPIC_LABELS), "vocab": vocab},
    )
    return result, vocab, docs, labels


def image_arch(n_filters: int = 12, size: int = 16):
    conv_out = size - 2
    pooled = conv_out // 2
    return [
        {"kind": "conv2d", "activation": "relu", "init_scale": 0.02,
         "shape": {"filters": n_filters, "kh": 3, "kw": 3, "in_channels": 3, "in_h": size, "in_w": size}},
        {"kind": "maxpool-2d", "activation": "linear",
         "shape": {"channels": n_filters, "pool_h": 2, "pool_w": 2, "in_h": conv_out, "in_w": conv_out}},
        {"kind": "flatten", "activation": "linear", "shape": {"size": n_filters * pooled * pooled}},
        {"kind": "dense", "activation": "softmax",
         "shape": {"in": n_filters * pooled * pooled, "out": len(datasets.SHAPE_LABELS)}},
    ]


def build_image_fixture(seed: int = 0, n_filters: int = 12, n_images: int = 600, epochs: int = 30):
    """Train the 3-class shape fixture; returns (result, images, labels)."""
    images, labels = datasets.make_shape_images(n_images=n_images, seed=seed)
    inputs = [np.asarray(img).reshape(-1) for img in images]
    config = TrainConfig(seed=seed, learning_rate=0.005, epochs=epochs, batch_size=32)
    result = train_toy(
        image_arch(n_filters=n_filters),
        inputs,
        labels,
        config,
        metadata={"labels": list(datasets.SHAPE_LABELS)},
    )
    return result, images, labels


def tabular_arch(n_inputs: int = 58, n_hidden: int = 8):
    return [
        {"kind": "dense", "activation": "tanh", "shape": {"in": n_inputs, "out": n_hidden}},
        {"kind": "flatten", "activation": "relu", "shape": {"size": n_hidden}},
        {"kind": "dense", "activation": "sigmoid", "shape": {"in": n_hidden, "out": 2}},
    ]


def build_tabular_fixture(seed: int = 0, n_records: int = 1600, epochs: int = 12):
    """Train the categorical risk-table fixture; returns (result, records, labels)."""
    records, labels = datasets.make_risk_table(n_records=n_records, seed=seed)
    inputs = [datasets.encode_record(r) for r in records]
    config = TrainConfig(seed=seed, learning_rate=0.01, epochs=epochs, batch_size=32)
    result = train_toy(
        tabular_arch(n_inputs=datasets.onehot_width()),
        inputs,
        labels,
        config,
        metadata={"labels": list(datasets.TABLE_LABELS), "features": datasets.TABLE_FEATURES},
    )
    return result, records, labels


def build_xor_fixture(seed: int = 0, epochs: int = 400):
    inputs, labels = datasets.make_xor()
    arch = [
        {"kind": "dense", "activation": "tanh", "shape": {"in": 2, "out": 4}},
        {"kind": "dense", "activation": "softmax", "shape": {"in": 4, "out": 2}},
    ]
    config = TrainConfig(seed=seed, learning_rate=0.1, epochs=epochs, batch_size=4)
    return train_toy(arch, inputs, labels, config, metadata={"labels": ["even", "odd"]})
