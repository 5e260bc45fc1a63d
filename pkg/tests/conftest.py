import json
from importlib import resources
from pathlib import Path

import pytest

from diag_arcs.forms import load_system


def corpus_path(name: str) -> Path:
    ref = resources.files("diag_arcs").joinpath(f"corpus/{name}.json")
    with resources.as_file(ref) as p:
        return Path(p)


def corpus_system(name: str):
    return load_system(corpus_path(name))


@pytest.fixture
def eq_squares():
    return corpus_system("eq_squares")


@pytest.fixture
def lin2():
    return corpus_system("lin2")


@pytest.fixture
def lin3():
    return corpus_system("lin3")


@pytest.fixture
def sq4():
    return corpus_system("sq4")


@pytest.fixture
def k12_s6():
    return corpus_system("k12_s6")


@pytest.fixture
def toy127():
    return corpus_system("toy_1_2_7")


@pytest.fixture
def tmp_system(tmp_path):
    def write(payload: dict, name: str = "system.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write
