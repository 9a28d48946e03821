"""Shared helpers: corpus loading and analysis shortcuts."""

from pathlib import Path

import pytest

from termiarith.syntax import normalize_program, parse_program, parse_query_pattern

CORPUS = Path(__file__).parent / "corpus"


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.pl"


def corpus_source(name: str) -> str:
    return corpus_path(name).read_text()


def corpus_program(name: str, normalize: bool = True):
    program = parse_program(corpus_source(name))
    return normalize_program(program) if normalize else program


@pytest.fixture
def load_program():
    return corpus_program


@pytest.fixture
def load_pattern():
    return parse_query_pattern
