"""Shared fixtures: corpus loading and small signatures for property tests."""

import pathlib

import pytest

from consfree.syntax import parse_atrs, parse_term

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "consfree" / "corpus"
ATRS_NAMES = sorted(p.name for p in CORPUS.glob("*.atrs"))


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


def load(name: str):
    return parse_atrs(corpus_text(name))


def term(text: str, atrs):
    return parse_term(text, atrs, {})


@pytest.fixture(scope="session")
def majority():
    return load("majority.atrs")


@pytest.fixture(scope="session")
def sat():
    return load("sat.atrs")


@pytest.fixture(scope="session")
def succ_system():
    return load("succ.atrs")


@pytest.fixture(scope="session")
def hocount():
    return load("hocount.atrs")


@pytest.fixture(scope="session")
def nonlinear_tm():
    return load("nonlinear_tm.atrs")
