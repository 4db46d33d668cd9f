from __future__ import annotations

from pathlib import Path

import pytest

from greenfn import groupdata as gd
from greenfn.cli import Pipeline

GOLDEN = Path(gd.__file__).with_name("data") / "golden"


@pytest.fixture(scope="session")
def pipe() -> Pipeline:
    return Pipeline()


@pytest.fixture(scope="session")
def spin8(pipe):
    return pipe.setup("spin8")


@pytest.fixture(scope="session")
def spin8_table(pipe):
    return pipe.green("spin8")


@pytest.fixture(scope="session")
def sl2_table(pipe):
    return pipe.green("sl2")


@pytest.fixture(scope="session")
def golden():
    return {tw: (GOLDEN / f"levi124_{tw}.txt").read_text() for tw in ("split", "twisted")}
