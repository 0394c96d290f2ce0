import json
from pathlib import Path

import pytest

from tracefix.lang import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "src" / "tracefix" / "corpus"

CORPUS_PROGRAMS = sorted(p.name for p in CORPUS.glob("*.mj"))


def corpus_source(name: str) -> str:
    return (CORPUS / name).read_text()


def corpus_program(name: str):
    return parse_program(corpus_source(name))


def corpus_request(name: str) -> dict:
    return json.loads((CORPUS / name).read_text())


@pytest.fixture
def largestgap():
    return corpus_program("largestgap.mj")


@pytest.fixture
def largestgap_fix():
    return corpus_program("largestgap_fix.mj")


@pytest.fixture
def largestgap_rev():
    return corpus_program("largestgap_rev.mj")


@pytest.fixture
def sublargestgap():
    return corpus_program("sublargestgap.mj")


@pytest.fixture
def maxmin():
    return corpus_program("maxmin.mj")


@pytest.fixture
def sumpow():
    return corpus_program("sumpow.mj")


@pytest.fixture
def triple():
    return corpus_program("triple.mj")
