"""Shared fixtures: the 50-word toy embedding store, the 20-sentence corpus,
and a small metaphor inventory generated from them."""
from __future__ import annotations

from pathlib import Path

import pytest

from figura.config import Config
from figura.embeddings import load_embeddings
from figura.evidence import build_corpus_index
from figura.lexicon import read_pos_tsv
from figura.pipeline import generate_metaphors
from figura.resources import default_stopwords

DATA = Path(__file__).parent / "data"

EMBEDDINGS_PATH = DATA / "toy_embeddings.txt"
CORPUS_PATH = DATA / "corpus_20.conllu"
POS_PATH = DATA / "pos.tsv"
FREQ_PATH = DATA / "freq.tsv"
CONCRETENESS_PATH = DATA / "concreteness.tsv"
THEMES_PATH = DATA / "themes_toy.txt"
CHATLOG_PATH = DATA / "chatlog.txt"


@pytest.fixture(scope="session")
def store():
    return load_embeddings(EMBEDDINGS_PATH)


@pytest.fixture(scope="session")
def corpus():
    return build_corpus_index(CORPUS_PATH)


@pytest.fixture(scope="session")
def pos_table():
    return read_pos_tsv(POS_PATH)


@pytest.fixture(scope="session")
def stopwords():
    return default_stopwords()


@pytest.fixture(scope="session")
def config():
    return Config()


@pytest.fixture(scope="session")
def inventory_records(store, corpus, pos_table, stopwords, config):
    """Pipeline output over the toy world: one metaphor per POS category."""
    return generate_metaphors(
        store,
        corpus,
        pos_table,
        targets=["love", "soul"],
        sources=["sugar", "salary", "fan"],
        stopwords=stopwords,
        config=config,
    )


@pytest.fixture(scope="session")
def inventory(inventory_records):
    return [record.metaphor for record in inventory_records]
