from __future__ import annotations

from pathlib import Path

import pytest

from polygen import fingrp
from polygen import io as pio
from polygen.vagroup import VAGroupSpec

ROOT = Path(__file__).resolve().parent.parent
GROUPS = ROOT / "docs" / "groups"


def load(name: str) -> VAGroupSpec:
    return pio.load_group(GROUPS / f"{name}.yaml").spec


def z() -> VAGroupSpec:
    return VAGroupSpec(1, fingrp.cyclic(1), [((1,),)], name="Z")


def c2xz() -> VAGroupSpec:
    return VAGroupSpec(1, fingrp.cyclic(2), [((1,),), ((1,),)], name="C2xZ")


def dinf() -> VAGroupSpec:
    return VAGroupSpec(1, fingrp.cyclic(2), [((1,),), ((-1,),)], name="Dinf")


def nonsplit_z() -> VAGroupSpec:
    return VAGroupSpec(1, fingrp.cyclic(2), [((1,),), ((1,),)], {(1, 1): (1,)}, name="nonsplit")


@pytest.fixture
def spec_dinf() -> VAGroupSpec:
    return dinf()


@pytest.fixture
def spec_c2xz() -> VAGroupSpec:
    return c2xz()


@pytest.fixture
def spec_z() -> VAGroupSpec:
    return z()


def corpus_names() -> list[str]:
    return sorted(p.stem for p in GROUPS.glob("*.yaml"))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
