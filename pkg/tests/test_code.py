import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_matrices
from tscover.code import (AlistError, BudgetExceeded, SparseBitMatrix, block_matrix, code_profile,
                          gf2_rank, girth, min_distance_bruteforce, nullspace_basis, parse_alist,
                          qc_expand, write_alist)
from tscover.data import bundled_codes, load_code


def rank_oracle(dense) -> int:
    # row reduction on python ints, one bitmask per row
    rows = [int("".join(map(str, r)), 2) if len(r) else 0 for r in dense.tolist()]
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        if pivot == 0:
            break
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
    return rank


def codewords_oracle(dense):
    m, n = dense.shape
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits, dtype=np.uint8)
        if not (dense.astype(int) @ x % 2).any():
            yield x


def nx_girth(matrix):
    G = nx.Graph()
    G.add_edges_from((("c", c), ("v", v)) for c, v in matrix.entries)
    g = nx.girth(G)
    return None if g == float("inf") else int(g)


# ---------------------------------------------------------------------------
# matrix and graph


def test_from_entries_rejects_duplicates_and_range():
    with pytest.raises(ValueError):
        SparseBitMatrix.from_entries(2, 2, [(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        SparseBitMatrix.from_entries(2, 2, [(2, 0)])


@given(small_matrices())
def test_dense_round_trip(H):
    assert SparseBitMatrix.from_dense(H.to_dense()) == H
    assert H.nnz == int(H.to_dense().sum())


@given(small_matrices())
def test_graph_edges_biject_with_entries(H):
    g = H.graph
    seen = {g.edge(e) for e in range(g.num_edges)}
    assert seen == set(H.entries) and len(seen) == g.num_edges
    for e in range(g.num_edges):
        assert g.edge_id(*g.edge(e)) == e
    assert np.array_equal(g.var_degrees(), H.col_weights())
    assert np.array_equal(g.check_degrees(), H.row_weights())
    for v in range(H.n):
        assert len(g.var_neighbors(v)) == H.col_weights()[v]


@given(small_matrices(), st.data())
def test_syndrome_matches_dense(H, data):
    x = np.array(data.draw(st.lists(st.integers(0, 1), min_size=H.n, max_size=H.n)), dtype=np.uint8)
    assert np.array_equal(H.syndrome(x), H.to_dense().astype(int) @ x % 2)


# ---------------------------------------------------------------------------
# alist


@given(small_matrices())
def test_alist_round_trip(H):
    assert parse_alist(write_alist(H)) == H


def test_alist_accepts_zero_padding():
    text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
    H = parse_alist(text)
    assert H.to_dense().tolist() == [[1, 1, 0], [0, 1, 1]]


@pytest.mark.parametrize("text, line", [
    ("3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n", 9),       # index out of range
    ("3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n1 3\n", 8),       # column/row disagreement
    ("3 2\n2 2\n1 2 x\n", 3),                                 # bad token
    ("3 2\n2 2\n1 2\n", 3),                                   # short degree list
    ("3 2\n2 2\n1 2 1\n2 2\n1 2\n", 5),                       # neighbor list longer than degree
    ("3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n", 7),                    # truncated
])
def test_alist_errors_carry_line_numbers(text, line):
    with pytest.raises(AlistError) as info:
        parse_alist(text)
    assert info.value.lineno == line


# ---------------------------------------------------------------------------
# rank, distance, girth


@settings(max_examples=200)
@given(small_matrices(max_m=8, max_n=14))
def test_rank_matches_oracle(H):
    assert gf2_rank(H) == rank_oracle(H.to_dense())


@given(small_matrices(max_m=8, max_n=14))
def test_nullspace_basis_spans_code(H):
    B = nullspace_basis(H)
    k = H.n - gf2_rank(H)
    assert B.shape == (k, H.n)
    assert not (H.to_dense().astype(int) @ B.T.astype(int) % 2).any()
    if k:
        assert rank_oracle(B) == k


@settings(max_examples=100, deadline=None)
@given(small_matrices(max_m=6, max_n=11))
def test_min_distance_matches_enumeration(H):
    weights = [int(x.sum()) for x in codewords_oracle(H.to_dense()) if x.any()]
    assert min_distance_bruteforce(H) == (min(weights) if weights else None)


def test_min_distance_budget():
    H = SparseBitMatrix.from_entries(1, 40, [(0, 0), (0, 1)])
    with pytest.raises(BudgetExceeded, match="max_dimension=28"):
        min_distance_bruteforce(H, max_dimension=28)
    assert min_distance_bruteforce(SparseBitMatrix.from_dense(np.eye(4, dtype=np.uint8))) is None


@settings(max_examples=150)
@given(small_matrices(max_m=7, max_n=12))
def test_girth_matches_networkx(H):
    assert girth(H) == nx_girth(H)


def test_trivial_profiles():
    assert girth(SparseBitMatrix.from_dense(np.ones((2, 2), dtype=np.uint8))) == 4
    p = code_profile(SparseBitMatrix.from_dense(np.eye(4, dtype=np.uint8)))
    assert (p.rank, p.rate, p.girth) == (4, 0.0, None)


def test_tanner_profile(tanner):
    p = code_profile(tanner)
    assert (p.n, p.m, p.dimension) == (155, 93, 64)
    assert round(p.rate, 4) == 0.4129
    assert p.girth == 8
    assert p.column_weights == {3: 155} and p.row_weights == {5: 93}


def test_bundled_codes_load():
    assert bundled_codes() == ["mackay-1008", "mackay-504", "margulis", "tanner"]
    p = code_profile(load_code("margulis"))
    assert (p.n, p.rank, p.rate, p.girth) == (2640, 1320, 0.5, 8)
    for name, n in [("mackay-504", 504), ("mackay-1008", 1008)]:
        p = code_profile(load_code(name))
        assert p.n == n and p.girth == 6 and p.column_weights == {3: n}


# ---------------------------------------------------------------------------
# quasi-cyclic expansion


def test_qc_expand_circulant_convention():
    H = qc_expand([[1, None], [0, 2]], 3)
    d = H.to_dense()
    assert d[:3, :3].tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    assert not d[:3, 3:].any()
    assert d[3:, 3:].tolist() == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]


@given(st.integers(2, 9), st.data())
def test_qc_expand_is_permutation_blocks(z, data):
    table = data.draw(st.lists(st.lists(st.integers(-1, z - 1), min_size=3, max_size=3),
                               min_size=2, max_size=2))
    H = qc_expand(table, z)
    d = H.to_dense()
    for bi, row in enumerate(table):
        for bj, s in enumerate(row):
            blk = d[bi * z:(bi + 1) * z, bj * z:(bj + 1) * z]
            expect = np.zeros((z, z), dtype=np.uint8) if s < 0 else np.roll(np.eye(z, dtype=np.uint8), s, axis=1)
            assert np.array_equal(blk, expect)


def test_qc_expand_rejects_bad_shift():
    with pytest.raises(ValueError):
        qc_expand([[5]], 3)


@given(small_matrices(max_m=3, max_n=4), small_matrices(max_m=3, max_n=4))
def test_block_matrix_matches_numpy(A, B):
    if A.shape != B.shape:
        B = SparseBitMatrix.from_dense(np.zeros(A.shape, dtype=np.uint8))
    m, n = A.shape
    M = block_matrix([[A, None], [B, A]], m, n)
    z = np.zeros((m, n), dtype=np.uint8)
    assert np.array_equal(M.to_dense(), np.block([[A.to_dense(), z], [B.to_dense(), A.to_dense()]]))
