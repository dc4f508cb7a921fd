import contextlib
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from schwarzlat.lattice import SparseFunction

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def sparse_functions(draw, dims=(1, 2, 3), max_size=12, radius=3, ties=None):
    """Finitely supported positive functions; ``ties`` forces values from a tiny set."""
    d = draw(st.sampled_from(dims))
    coord = st.integers(-radius, radius)
    points = draw(st.lists(st.tuples(*[coord] * d), min_size=0, max_size=max_size, unique=True))
    use_ties = draw(st.booleans()) if ties is None else ties
    if use_ties:
        value = st.sampled_from([0.5, 1.0, 2.0])
    else:
        value = st.floats(0.01, 10.0, allow_nan=False, allow_infinity=False)
    vals = draw(st.lists(value, min_size=len(points), max_size=len(points)))
    return SparseFunction(dict(zip(points, vals)), dim=d)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary

ACCEPTANCE: dict[int, dict] = {}


@pytest.fixture
def acceptance():
    @contextlib.contextmanager
    def part(number: int, title: str, label: str = "", budget: float | None = None):
        entry = ACCEPTANCE.setdefault(number, {"title": title, "failed": [], "parts": 0})
        entry["parts"] += 1
        start = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - start
            if budget is not None:
                assert elapsed < budget, f"runtime {elapsed:.1f}s exceeds {budget}s"
            ok = True
        finally:
            if not ok:
                entry["failed"].append(label or "main")
            status = "PASS" if ok else "FAIL"
            print(f"criterion {number:2d} {status} {title}{f' [{label}]' if label else ''}")

    return part


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        status = "FAIL" if entry["failed"] else "PASS"
        detail = f" (failed: {', '.join(entry['failed'])})" if entry["failed"] else ""
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {entry['title']}{detail}")
