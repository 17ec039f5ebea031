import functools

import numpy as np
import pytest

from vertcover.geometry import Region
from vertcover.maps import catalog
from vertcover.slabs import build_decomposition, region_for


def comb_region():
    """Body around 0, a column on the far left, a top bar and a tooth hanging at u ~ 0.8.

    Everything right of the body is attached only through the column at
    u < 0, so no u-monotone path from 0 reaches the tooth.
    """
    pts = [(-0.5, -0.5), (0.6, -0.5), (0.6, 0.5), (-0.3, 0.5), (-0.3, 2.3), (0.7, 2.3),
           (0.7, 1.0), (0.9, 1.0), (0.9, 2.3), (1.0, 2.3), (1.0, 2.5), (-0.5, 2.5)]
    return Region([pts])


def stacked_rectangles():
    return Region([[(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 2), (1, 2), (1, 2.5), (0, 2.5)]])


def random_polygon(rng, n=None):
    """Star-shaped random polygon around the origin (simple by construction)."""
    n = n or int(rng.integers(5, 25))
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.3, 1.5, n)
    return Region([np.column_stack([r * np.cos(t), r * np.sin(t)])])


@pytest.fixture
def comb():
    return comb_region()


@pytest.fixture
def stacked():
    return stacked_rectangles()


@functools.lru_cache(maxsize=None)
def cached_decomposition(name, rho, delta, side):
    return build_decomposition(catalog(name), rho, delta, side)


@functools.lru_cache(maxsize=None)
def cached_region(name, r, tol=1e-6):
    return region_for(catalog(name), r, tol)


# -- acceptance reporting -------------------------------------------------------------

_CRITERIA = {}


@pytest.fixture
def criterion(capsys):
    """``criterion(n, ok, detail)`` prints one PASS/FAIL line and records it for the summary."""

    def report(n, ok, detail):
        line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[n] = line
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
