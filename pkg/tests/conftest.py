"""Shared fixtures.  Expensive objects are built once per session."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import pytest

from wallcross.config import load_fixture
from wallcross.git_core import compute_wall_crossing
from wallcross.ifunction import build_I, make_side, sides_from_wall

FIXTURES = ("p2", "fixture_a", "fixture_b")
WALL_FIXTURES = ("fixture_a", "fixture_b")


@lru_cache(maxsize=None)
def config(name: str):
    return load_fixture(name)


@lru_cache(maxsize=None)
def wall(name: str):
    cfg = config(name)
    return compute_wall_crossing(cfg.data, cfg.p_plus, cfg.p_minus)


@lru_cache(maxsize=None)
def sides(name: str) -> tuple:
    cfg = config(name)
    if cfg.data.omega_minus is None:
        return (make_side(cfg.data, "plus", cfg.data.omega_plus, cfg.p_plus),)
    return sides_from_wall(cfg.data, wall(name))


@lru_cache(maxsize=None)
def series(name: str, side: str, N=6):
    s = {x.name: x for x in sides(name)}[side]
    return build_I(s, Fraction(N))


@lru_cache(maxsize=None)
def fit_a():
    """Connection-matrix fit on fixture A with the default settings."""
    from wallcross import transform as tf
    plus, minus = sides("fixture_a")
    return tf.solve_L_fit(plus, minus, wall("fixture_a"), tf.FitConfig())


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run
# ---------------------------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
