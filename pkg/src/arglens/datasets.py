"""Deterministic synthetic datasets for the desk-scale fixture models."""

from __future__ import annotations

import json

import numpy as np

# -- text: 4-topic corpus ------------------------------------------------------

TOPIC_LABELS = ("sport", "market", "science", "culture")

_TOPIC_WORDS = {
    "sport": """coach match stadium league goal striker referee tournament season champion
        defender keeper fixture derby penalty squad winger transfer kickoff whistle
        podium sprint marathon relay medal arena scoreboard playoff halftime
        offside corner tackle dribble header volley cupset rally forehand serve umpire""",
    "market": """shares traders profit quarterly earnings dividend merger stockholder inflation
        revenue forecast portfolio bonds hedge acquisition ipo valuation bankrupt
        liquidity futures commodity audit ledger margin brokerage bullish bearish
        recession tariff subsidy invoice payroll creditor debtor surplus deficit lender
        equity broker banknote""",
    "science": """laboratory experiment hypothesis protein neuron telescope quantum particle
        genome molecule catalyst enzyme orbit photon electron isotope reactor
        microscope vaccine antibody bacteria fossil sediment glacier asteroid
        spectrum theorem dataset sensor silicon polymer membrane chromosome
        synapse cortex plasma nebula comet mineral crystal""",
    "culture": """gallery orchestra novelist premiere sculpture canvas ballet symphony
        exhibition curator poetry memoir playwright ensemble soprano fresco
        portrait festival cinema screenplay director actress libretto aria
        museum archive manuscript folklore mythology tapestry mosaic choreography
        quartet sonata verses stanza critics encore matinee troupe""",
}

_COMMON_WORDS = """the a an of to in on for with and or but as at by from into over after
    before between during under about against among around through toward within
    without is was are were be been being has have had do does did will would
    can could may might must shall should its his her their our your this that
    these those it they we you he she one two new old last first next early late
    big small good bad long short high low many few more most less least very
    quite rather still yet now then here there when where while since because
    year day week time people group part world report""".split()


def text_vocab(size: int = 500):
    """Vocabulary: pad, topic words, common words, rare filler tokens."""
    vocab = ["<pad>"]
    topic_ids = {}
    for topic in TOPIC_LABELS:
        words = _TOPIC_WORDS[topic].split()
        topic_ids[topic] = list(range(len(vocab), len(vocab) + len(words)))
        vocab.extend(words)
    common_start = len(vocab)
    vocab.extend(_COMMON_WORDS)
    common_ids = list(range(common_start, len(vocab)))
    rare_ids = []
    i = 0
    while len(vocab) < size:
        vocab.append(f"misc{i}")
        rare_ids.append(len(vocab) - 1)
        i += 1
    return vocab, topic_ids, common_ids, rare_ids


def make_text_corpus(n_docs: int = 2000, vocab_size: int = 500, seed: int = 0):
    """Synthetic 4-class topic corpus.

    Returns ``(vocab, docs, labels)`` with docs as lists of token ids.
    """
    rng = np.random.default_rng(seed)
    vocab, topic_ids, common_ids, rare_ids = text_vocab(vocab_size)
    docs, labels = [], []
    for _ in range(n_docs):
        label = int(rng.integers(len(TOPIC_LABELS)))
        own = topic_ids[TOPIC_LABELS[label]]
        length = int(rng.integers(20, 61))
        tokens = []
        for _ in range(length):
            r = rng.random()
            if r < 0.35:
                tokens.append(int(rng.choice(own)))
            elif r < 0.45:
                other = TOPIC_LABELS[int(rng.integers(len(TOPIC_LABELS)))]
                tokens.append(int(rng.choice(topic_ids[other])))
            elif r < 0.90:
                tokens.append(int(rng.choice(common_ids)))
            else:
                tokens.append(int(rng.choice(rare_ids)))
        docs.append(tokens)
        labels.append(label)
    return vocab, docs, labels


def pad_tokens(tokens, seq_len: int, pad_id: int = 0):
    out = list(tokens)[:seq_len]
    return out + [pad_id] * (seq_len - len(out))


# -- image: 3-class shapes -----------------------------------------------------

SHAPE_LABELS = ("square", "cross", "stripes")


def _draw_shape(rng, label: int, size: int):
    img = np.zeros((size, size, 3))
    tint = rng.uniform(0.55, 1.0, size=3)
    if label == 0:  # filled square
        side = int(rng.integers(size // 3, size // 2 + 1))
        y = int(rng.integers(1, size - side))
        x = int(rng.integers(1, size - side))
        img[y : y + side, x : x + side] = tint
    elif label == 1:  # cross
        margin = max(3, size // 4)
        cy = int(rng.integers(margin, size - margin))
        cx = int(rng.integers(margin, size - margin))
        arm = int(rng.integers(2, margin + 1))
        img[cy - 1 : cy + 2, max(0, cx - arm) : cx + arm + 1] = tint
        img[max(0, cy - arm) : cy + arm + 1, cx - 1 : cx + 2] = tint
    else:  # horizontal stripes
        phase = int(rng.integers(0, 4))
        for y in range(phase, size, 4):
            img[y : y + 2, :] = tint
    img += rng.normal(0.0, 0.04, size=img.shape)
    return np.clip(img, 0.0, 1.0) * 255.0


def make_shape_images(n_images: int = 600, size: int = 16, seed: int = 0):
    """Synthetic shape images, pixel values in 0..255.

    Returns ``(images, labels)`` with images of shape (size, size, 3).
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for _ in range(n_images):
        label = int(rng.integers(len(SHAPE_LABELS)))
        images.append(_draw_shape(rng, label, size))
        labels.append(label)
    return images, labels


# -- tabular: categorical risk table -------------------------------------------

TABLE_LABELS = ("no", "yes")

# 12 categorical features whose one-hot widths sum to 58
TABLE_FEATURES = [
    {"name": "sex", "values": ["f", "m"]},
    {"name": "age_band", "values": ["<25", "25-34", "35-44", "45-54", "55+"]},
    {"name": "area", "values": ["north", "south", "east", "west", "center", "outer"]},
    {"name": "minor_counts", "values": ["0", "1", "2", "3+"]},
    {"name": "major_counts", "values": ["0", "1", "2", "3+"]},
    {"name": "other_counts", "values": ["0", "1", "2", "3+"]},
    {"name": "priors", "values": ["0", "1", "2", "3", "4", "5+"]},
    {"name": "repeat", "values": ["no", "yes"]},
    {"name": "severe", "values": ["no", "yes"]},
    {"name": "custody", "values": ["none", "short", "medium", "long", "remand", "open", "night", "other"]},
    {"name": "charge", "values": ["theft", "fraud", "assault", "traffic", "drugs", "vandalism", "burglary", "arson", "weapons", "misc"]},
    {"name": "class", "values": ["a", "b", "c", "d", "e"]},
]


def onehot_width(features=TABLE_FEATURES) -> int:
    return sum(len(f["values"]) for f in features)


def encode_record(record: dict, features=TABLE_FEATURES) -> np.ndarray:
    """One-hot encode a feature->value mapping; unknown values raise."""
    out = np.zeros(onehot_width(features))
    offset = 0
    for feature in features:
        values = feature["values"]
        value = record[feature["name"]]
        if value not in values:
            raise ValueError(f"unknown value {value!r} for feature {feature['name']!r}")
        out[offset + values.index(value)] = 1.0
        offset += len(values)
    return out


def make_risk_table(n_records: int = 1600, seed: int = 0):
    """Synthetic binary-outcome categorical table.

    Returns ``(records, labels)``; records are feature->value dicts.
    """
    rng = np.random.default_rng(seed)
    records, labels = [], []
    for _ in range(n_records):
        record = {}
        for feature in TABLE_FEATURES:
            values = feature["values"]
            # mild skew toward early values
            weights = np.linspace(1.6, 0.6, len(values))
            weights /= weights.sum()
            record[feature["name"]] = str(rng.choice(values, p=weights))
        score = 0.0
        score += 1.2 * (record["priors"] in ("4", "5+"))
        score += 0.9 * (record["repeat"] == "yes")
        score += 0.8 * (record["severe"] == "yes")
        score += 0.6 * (record["age_band"] == "<25")
        score += 0.5 * (record["custody"] in ("long", "remand"))
        score += 0.4 * (record["charge"] in ("assault", "weapons", "burglary"))
        score -= 0.5 * (record["priors"] == "0")
        score -= 0.3 * (record["age_band"] == "55+")
        score += rng.normal(0.0, 0.55)
        label = int(score > 0.55)
        records.append(record)
        labels.append(label)
    return records, labels


# -- XOR -----------------------------------------------------------------------


def make_xor():
    """The four-corner parity task in 0/1 encoding.

    Learnable by bias-free tanh nets: the all-zero corner lands on the
    uniform output, which the lowest-index tie-break classifies as 0.
    """
    inputs = [np.array(p, dtype=float) for p in ((0, 0), (0, 1), (1, 0), (1, 1))]
    labels = [0, 1, 1, 0]
    return inputs, labels


# -- JSON serialization --------------------------------------------------------


def save_text_dataset(path, vocab, docs, labels):
    doc = {
        "kind": "text",
        "vocab": vocab,
        "docs": [{"tokens": d, "label": int(l)} for d, l in zip(docs, labels)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, separators=(",", ":"))


def save_image_dataset(path, images, labels):
    doc = {
        "kind": "image",
        "images": [
            {"pixels": np.asarray(img).round(2).tolist(), "label": int(l)}
            for img, l in zip(images, labels)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, separators=(",", ":"))


def save_table_dataset(path, records, labels, features=TABLE_FEATURES):
    doc = {
        "kind": "table",
        "features": features,
        "records": [{"values": r, "label": int(l)} for r, l in zip(records, labels)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, separators=(",", ":"))


def load_dataset(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
