import itertools

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from tscover.code import SparseBitMatrix
from tscover.data import load_code

# numba compiles on first call, so per-example deadlines are meaningless
settings.register_profile("default", deadline=None)
settings.load_profile("default")

# acceptance lines collected by test_acceptance, printed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def tanner():
    return load_code("tanner")


@st.composite
def small_matrices(draw, max_m=6, max_n=10, min_n=1):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.booleans(), min_size=m * n, max_size=m * n))
    return SparseBitMatrix.from_dense(np.array(bits, dtype=np.uint8).reshape(m, n))


@st.composite
def column_regular(draw, n_min=6, n_max=14, m_min=3, m_max=8, dv=3):
    """Random H whose columns all have weight dv."""
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(max(m_min, dv), m_max))
    cols = [draw(st.sampled_from(list(itertools.combinations(range(m), dv)))) for _ in range(n)]
    return SparseBitMatrix.from_entries(m, n, [(c, v) for v, cs in enumerate(cols) for c in cs])


FIG1A_DIAGONAL = (0, 1, 2)


def fig1a_graph() -> SparseBitMatrix:
    """Isolated (5,3) set cut out of the Tanner code.

    Variables 0, 1, 2 (the diagonal) each see one degree-1 check and two
    degree-2 checks; variables 3, 4 see only degree-2 checks.
    """
    dense = [[0, 1, 0, 0, 0],
             [0, 0, 1, 1, 0],
             [1, 0, 0, 0, 1],
             [0, 0, 1, 0, 0],
             [1, 0, 0, 1, 0],
             [0, 1, 0, 0, 1],
             [1, 0, 0, 0, 0],
             [0, 1, 0, 1, 0],
             [0, 0, 1, 0, 1]]
    return SparseBitMatrix.from_dense(np.array(dense, dtype=np.uint8))
