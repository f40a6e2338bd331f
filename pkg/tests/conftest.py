from fractions import Fraction

import pytest
from hypothesis import strategies as st

from advsel.core import Population


def definition_stats(levels_by_position, positions):
    """KS, L1, CvM straight from the definitions, one Fraction at a time.

    ``levels_by_position[i]`` is the level of the item at position i+1.
    Deliberately shares no code with ``advsel.stats``.
    """
    n, k = len(levels_by_position), len(positions)
    chosen = [levels_by_position[p - 1] for p in positions]
    diffs = []
    for lv in levels_by_position:
        fx = Fraction(sum(1 for x in levels_by_position if x <= lv), n)
        fy = Fraction(sum(1 for y in chosen if y <= lv), k)
        diffs.append(fx - fy)
    ks = max(abs(d) for d in diffs)
    l1 = sum(abs(d) for d in diffs) / n
    cvm = sum(d * d for d in diffs) / n
    return ks, l1, cvm


@st.composite
def weak_levels(draw, min_n=1, max_n=10):
    """Contiguous level vectors 1..L in arbitrary input order."""
    n = draw(st.integers(min_n, max_n))
    raw = draw(st.lists(st.integers(0, n), min_size=n, max_size=n))
    distinct = sorted(set(raw))
    return [distinct.index(v) + 1 for v in raw]


@st.composite
def population_and_sample(draw, max_n=10):
    levels = draw(weak_levels(max_n=max_n))
    pop = Population.from_levels(levels)
    positions = draw(st.lists(st.integers(1, pop.n), min_size=1, max_size=pop.n, unique=True))
    return pop, tuple(sorted(positions))


@pytest.fixture
def strict9():
    return Population.strict(9)


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """``record(number, ok, detail)`` logs one acceptance line and returns ``ok``."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(number: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = (bool(ok), detail)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
