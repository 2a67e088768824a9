from functools import lru_cache

import pytest
from hypothesis import settings

from aklv.duality import compute_b, compute_duality
from aklv.klv import solve_P
from aklv.orbit_graph import build
from aklv.root_datum import load_pair_spec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

PRESETS = ("sl2_group", "sl3_group", "pgl2_group", "sl2_t", "gl2_o2")


@lru_cache(maxsize=None)
def pipeline(name, max_delta, mode="general"):
    """(graph, D, b, P) for a preset, cached across the session."""
    g = build(load_pair_spec(name), mode=mode, max_delta=max_delta)
    D = compute_duality(g)
    b = compute_b(g, D)
    return g, D, b, solve_P(g, b)


@pytest.fixture(scope="session")
def presets():
    return {n: load_pair_spec(n) for n in PRESETS}


ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
