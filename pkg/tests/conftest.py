from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # helpers/oracle importable as modules

from eventsmith.corpus import AnnotatedDocument, load_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def mini_doc() -> AnnotatedDocument:
    return load_corpus(DATA_DIR / "mini_corpus.jsonl", strict=True)[0]


@pytest.fixture(scope="session")
def fallback_doc() -> AnnotatedDocument:
    return load_corpus(DATA_DIR / "fallback_corpus.jsonl", strict=True)[0]
