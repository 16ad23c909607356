import json
from pathlib import Path

import numpy as np
import pytest

from arglens import fixtures
from arglens.model import load_model

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def text_net():
    return load_model(FIXTURE_DIR / "text_model.json")


@pytest.fixture(scope="session")
def text_corpus():
    with open(FIXTURE_DIR / "text_corpus.json", encoding="utf-8") as fh:
        data = json.load(fh)
    docs = [d["tokens"] for d in data["docs"]]
    labels = [d["label"] for d in data["docs"]]
    return data["vocab"], docs, labels


@pytest.fixture(scope="session")
def image_net():
    return load_model(FIXTURE_DIR / "image_model.json")


@pytest.fixture(scope="session")
def image_data():
    with open(FIXTURE_DIR / "image_data.json", encoding="utf-8") as fh:
        data = json.load(fh)
    images = [np.asarray(d["pixels"]) for d in data["images"]]
    labels = [d["label"] for d in data["images"]]
    return images, labels


@pytest.fixture(scope="session")
def tabular_net():
    return load_model(FIXTURE_DIR / "tabular_model.json")


@pytest.fixture(scope="session")
def tabular_data():
    with open(FIXTURE_DIR / "tabular_data.json", encoding="utf-8") as fh:
        data = json.load(fh)
    records = [d["values"] for d in data["records"]]
    labels = [d["label"] for d in data["records"]]
    return records, labels


@pytest.fixture(scope="session")
def toy_net():
    return fixtures.build_toy_fixture()


@pytest.fixture(scope="session")
def hand_text_net():
    return fixtures.build_hand_text_fixture()
