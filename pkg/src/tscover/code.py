"""
Sparse GF(2) parity-check matrices and their Tanner graphs.

Everything here is exact: rank by GF(2) elimination on bit-packed rows,
girth by breadth-first search from every variable node, and minimum
distance by exhaustive Gray-code enumeration of the code.

Matrices are read and written in the alist format (1-indexed on disk,
0-indexed in memory).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numba as nb
import numpy as np


class AlistError(ValueError):
    """Malformed alist input; ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""


@dataclass(frozen=True, eq=False)
class SparseBitMatrix:
    """Binary m x n matrix stored as both row and column adjacency.

    Build with :meth:`from_entries` or :meth:`from_dense`; the raw
    constructor expects already validated CSR/CSC arrays.
    """

    m: int
    n: int
    row_ptr: np.ndarray
    row_idx: np.ndarray  # column indices, sorted within each row
    col_ptr: np.ndarray
    col_idx: np.ndarray  # row indices, sorted within each column

    @classmethod
    def from_entries(cls, m: int, n: int, entries: Iterable[tuple[int, int]]) -> "SparseBitMatrix":
        pairs = [(int(r), int(c)) for r, c in entries]
        seen = set()
        for r, c in pairs:
            if not (0 <= r < m and 0 <= c < n):
                raise ValueError(f"entry ({r}, {c}) outside {m}x{n}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry ({r}, {c})")
            seen.add((r, c))
        if pairs:
            arr = np.array(pairs, dtype=np.int64)
        else:
            arr = np.zeros((0, 2), dtype=np.int64)
        return cls._from_array(m, n, arr)

    @classmethod
    def _from_array(cls, m: int, n: int, arr: np.ndarray) -> "SparseBitMatrix":
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        rows, cols = arr[order, 0], arr[order, 1]
        row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=m), out=row_ptr[1:])
        order_c = np.lexsort((arr[:, 0], arr[:, 1]))
        col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(arr[:, 1], minlength=n), out=col_ptr[1:])
        mat = cls(m, n, row_ptr, cols.astype(np.int64), col_ptr, arr[order_c, 0].astype(np.int64))
        for a in (mat.row_ptr, mat.row_idx, mat.col_ptr, mat.col_idx):
            a.setflags(write=False)
        return mat

    @classmethod
    def from_dense(cls, dense) -> "SparseBitMatrix":
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        r, c = np.nonzero(dense % 2)
        return cls._from_array(dense.shape[0], dense.shape[1], np.stack([r, c], axis=1).astype(np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def nnz(self) -> int:
        return int(self.row_idx.size)

    @cached_property
    def entries(self) -> frozenset[tuple[int, int]]:
        rows = np.repeat(np.arange(self.m), np.diff(self.row_ptr))
        return frozenset(zip(rows.tolist(), self.row_idx.tolist()))

    def row(self, i: int) -> np.ndarray:
        return self.row_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    def col(self, j: int) -> np.ndarray:
        return self.col_idx[self.col_ptr[j]:self.col_ptr[j + 1]]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_weights(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.uint8)
        rows = np.repeat(np.arange(self.m), np.diff(self.row_ptr))
        out[rows, self.row_idx] = 1
        return out

    def syndrome(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)
        return _syndrome(self.row_ptr, self.row_idx, x)

    @cached_property
    def graph(self) -> "TannerGraph":
        return TannerGraph(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBitMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.row_ptr, other.row_ptr)
                and np.array_equal(self.row_idx, other.row_idx))

    def __hash__(self) -> int:
        return hash((self.m, self.n, self.row_idx.tobytes(), self.row_ptr.tobytes()))

    def __repr__(self) -> str:
        return f"SparseBitMatrix({self.m}x{self.n}, nnz={self.nnz})"


@nb.njit(cache=True)
def _syndrome(row_ptr, row_idx, x):
    m = row_ptr.size - 1
    s = np.zeros(m, dtype=np.uint8)
    for i in range(m):
        acc = 0
        for k in range(row_ptr[i], row_ptr[i + 1]):
            acc ^= x[row_idx[k]]
        s[i] = acc & 1
    return s


class TannerGraph:
    """Bipartite view of a parity-check matrix with numbered edges.

    Edge ``e`` is the ``e``-th one of the matrix in row-major order, so the
    edges of check ``c`` are ``range(check_ptr[c], check_ptr[c+1])``.
    ``var_edges[var_ptr[v]:var_ptr[v+1]]`` lists the edges of variable ``v``
    in increasing check order.
    """

    def __init__(self, matrix: SparseBitMatrix):
        self.matrix = matrix
        self.n = matrix.n
        self.m = matrix.m
        self.check_ptr = matrix.row_ptr
        self.edge_var = matrix.row_idx
        self.edge_check = np.repeat(np.arange(matrix.m, dtype=np.int64), np.diff(matrix.row_ptr))
        self.var_ptr = matrix.col_ptr
        # stable sort by variable keeps check order inside each variable
        self.var_edges = np.argsort(self.edge_var, kind="stable").astype(np.int64)
        for a in (self.edge_check, self.var_edges):
            a.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.size)

    def edge(self, e: int) -> tuple[int, int]:
        """(check, variable) of edge ``e``."""
        return int(self.edge_check[e]), int(self.edge_var[e])

    def edge_id(self, check: int, var: int) -> int:
        lo, hi = self.check_ptr[check], self.check_ptr[check + 1]
        k = lo + int(np.searchsorted(self.edge_var[lo:hi], var))
        if k >= hi or self.edge_var[k] != var:
            raise KeyError(f"no edge between check {check} and variable {var}")
        return int(k)

    def var_neighbors(self, v: int) -> np.ndarray:
        return self.matrix.col(v)

    def check_neighbors(self, c: int) -> np.ndarray:
        return self.matrix.row(c)

    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def induced_check_degrees(self, variables: Iterable[int]) -> dict[int, int]:
        """Degree of each check counting only edges into ``variables``."""
        deg: Counter = Counter()
        for v in variables:
            deg.update(self.matrix.col(int(v)).tolist())
        return dict(deg)

    def edges_of(self, variables: Iterable[int]) -> list[int]:
        """All edges incident to ``variables`` (the edge set of the induced subgraph)."""
        out = []
        for v in variables:
            out.extend(self.var_edges[self.var_ptr[v]:self.var_ptr[v + 1]].tolist())
        return sorted(out)

    def __repr__(self) -> str:
        return f"TannerGraph(n={self.n}, m={self.m}, edges={self.num_edges})"


@dataclass(frozen=True)
class CodeProfile:
    n: int
    m: int
    rank: int
    rate: float
    girth: Optional[int]  # None when the Tanner graph is acyclic
    column_weights: dict[int, int] = field(default_factory=dict)
    row_weights: dict[int, int] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.n - self.rank

    @property
    def full_rank(self) -> bool:
        return self.rank == self.m

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "rank": self.rank,
            "dimension": self.dimension,
            "rate": self.rate,
            "girth": self.girth if self.girth is not None else "acyclic",
            "column_weights": {str(k): v for k, v in sorted(self.column_weights.items())},
            "row_weights": {str(k): v for k, v in sorted(self.row_weights.items())},
        }


# ---------------------------------------------------------------------------
# alist I/O


def parse_alist(text: str) -> SparseBitMatrix:
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(no, toks) for no, toks in lines if toks]
    pos = 0

    def next_ints(expect: Optional[int], what: str) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines):
            raise AlistError(f"unexpected end of input while reading {what}",
                             lines[-1][0] + 1 if lines else 1)
        no, toks = lines[pos]
        pos += 1
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise AlistError(f"non-integer token in {what}", no) from None
        if expect is not None and len(vals) != expect:
            raise AlistError(f"{what}: expected {expect} values, got {len(vals)}", no)
        return no, vals

    no, (n, m) = next_ints(2, "header 'n m'")
    if n < 0 or m < 0:
        raise AlistError("negative dimension in header", no)
    no, (max_c, max_r) = next_ints(2, "max degree line")
    no, col_deg = next_ints(n, "column degree list")
    if any(d < 0 or d > max_c for d in col_deg):
        raise AlistError("column degree outside [0, max column degree]", no)
    no, row_deg = next_ints(m, "row degree list")
    if any(d < 0 or d > max_r for d in row_deg):
        raise AlistError("row degree outside [0, max row degree]", no)

    def read_lists(count, degs, bound, kind):
        out = []
        for j in range(count):
            if degs[j] == 0:
                # empty list: a line of zeros, or nothing at all
                if pos < len(lines) and _is_padding_only(lines[pos][1]):
                    next_ints(None, f"{kind} {j + 1} neighbor list")
                out.append([])
                continue
            no, vals = next_ints(None, f"{kind} {j + 1} neighbor list")
            head, tail = vals[:degs[j]], vals[degs[j]:]
            if len(head) < degs[j]:
                raise AlistError(f"{kind} {j + 1}: expected {degs[j]} neighbors, got {len(head)}", no)
            if any(t != 0 for t in tail):
                raise AlistError(f"{kind} {j + 1}: more neighbors than its degree {degs[j]}", no)
            for v in head:
                if not 1 <= v <= bound:
                    raise AlistError(f"{kind} {j + 1}: neighbor index {v} outside [1, {bound}]", no)
            if len(set(head)) != len(head):
                raise AlistError(f"{kind} {j + 1}: repeated neighbor", no)
            out.append([v - 1 for v in head])
        return out

    col_lists = read_lists(n, col_deg, m, "column")
    row_start = lines[pos][0] if pos < len(lines) else None
    row_lists = read_lists(m, row_deg, n, "row")
    if pos < len(lines):
        raise AlistError("trailing data after row lists", lines[pos][0])

    from_cols = {(r, c) for c, rs in enumerate(col_lists) for r in rs}
    from_rows = {(r, c) for r, cs in enumerate(row_lists) for c in cs}
    if from_cols != from_rows:
        r, c = min(from_cols ^ from_rows)
        raise AlistError(f"column and row lists disagree at entry ({r + 1}, {c + 1})", row_start)
    return SparseBitMatrix.from_entries(m, n, from_cols)


def _is_padding_only(toks: Sequence[str]) -> bool:
    return all(t == "0" for t in toks)


def write_alist(matrix: SparseBitMatrix) -> str:
    cw, rw = matrix.col_weights(), matrix.row_weights()
    out = [
        f"{matrix.n} {matrix.m}",
        f"{int(cw.max()) if cw.size else 0} {int(rw.max()) if rw.size else 0}",
        " ".join(str(int(d)) for d in cw),
        " ".join(str(int(d)) for d in rw),
    ]
    for j in range(matrix.n):
        out.append(" ".join(str(int(r) + 1) for r in matrix.col(j)) or "0")
    for i in range(matrix.m):
        out.append(" ".join(str(int(c) + 1) for c in matrix.row(i)) or "0")
    return "\n".join(out) + "\n"


def read_alist(path) -> SparseBitMatrix:
    with open(path) as fh:
        return parse_alist(fh.read())


def save_alist(matrix: SparseBitMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_alist(matrix))


# ---------------------------------------------------------------------------
# GF(2) linear algebra


def pack_rows(matrix: SparseBitMatrix) -> np.ndarray:
    """Rows as uint64 words, bit ``j % 64`` of word ``j // 64`` holds column ``j``."""
    words = max(1, (matrix.n + 63) // 64)
    out = np.zeros((matrix.m, words), dtype=np.uint64)
    rows = np.repeat(np.arange(matrix.m), np.diff(matrix.row_ptr))
    cols = matrix.row_idx
    np.bitwise_or.at(out, (rows, cols // 64), np.left_shift(np.uint64(1), (cols % 64).astype(np.uint64)))
    return out


@nb.njit(cache=True)
def _rref_packed(a, ncols):
    """In-place reduced row echelon form; returns pivot columns."""
    m = a.shape[0]
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == m:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, m):
            if a[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(a.shape[1]):
                t = a[r, k]
                a[r, k] = a[p, k]
                a[p, k] = t
        for i in range(m):
            if i != r and (a[i, w] & bit):
                for k in range(w, a.shape[1]):
                    a[i, k] ^= a[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


def gf2_rank(matrix: SparseBitMatrix) -> int:
    if matrix.m == 0 or matrix.n == 0:
        return 0
    return int(_rref_packed(pack_rows(matrix), matrix.n).size)


def nullspace_basis(matrix: SparseBitMatrix) -> np.ndarray:
    """Basis of {x : Hx = 0} as a dense (n - rank) x n uint8 array, systematic in the free columns."""
    n = matrix.n
    if matrix.m == 0:
        return np.eye(n, dtype=np.uint8)
    a = pack_rows(matrix)
    piv = _rref_packed(a, n)
    r = piv.size
    dense = np.unpackbits(a[:r].view(np.uint8), axis=1, bitorder="little")[:, :n]
    free = np.setdiff1d(np.arange(n), piv)
    basis = np.zeros((free.size, n), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        basis[t, piv] = dense[:, f]
    return basis


@nb.njit(cache=True)
def _min_weight_gray(gen):
    """Minimum popcount over all nonzero GF(2) combinations of packed rows."""
    k, words = gen.shape
    cur = np.zeros(words, dtype=np.uint64)
    best = 1 << 62
    total = np.int64(1) << k
    for i in range(1, total):
        # Gray code: flip the row indexed by the lowest set bit of i
        j = 0
        t = i
        while (t & 1) == 0:
            t >>= 1
            j += 1
        w = 0
        for q in range(words):
            cur[q] ^= gen[j, q]
            x = cur[q]
            # popcount
            x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
            x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
            x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
            w += int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))
        if w < best:
            best = w
    return best


def min_distance_bruteforce(matrix: SparseBitMatrix, max_dimension: int = 28) -> Optional[int]:
    """Exact minimum distance by enumerating all 2^k codewords.

    Returns ``None`` when the code has no nonzero codeword. Raises
    :class:`BudgetExceeded` if the dimension exceeds ``max_dimension``.
    """
    k = matrix.n - gf2_rank(matrix)
    if k > max_dimension:
        raise BudgetExceeded(f"code dimension {k} exceeds the enumeration limit max_dimension={max_dimension}")
    if k == 0:
        return None
    basis = nullspace_basis(matrix)
    packed = np.packbits(basis, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    packed = np.pad(packed, ((0, 0), (0, pad))).view(np.uint64)
    return int(_min_weight_gray(np.ascontiguousarray(packed)))


# ---------------------------------------------------------------------------
# structure


@nb.njit(cache=True)
def _girth(n, m, var_ptr, var_nbrs, check_ptr, check_nbrs):
    # node ids: variables 0..n-1, checks n..n+m-1
    best = 1 << 30
    dist = np.full(n + m, -1, dtype=np.int64)
    parent = np.full(n + m, -1, dtype=np.int64)
    queue = np.empty(n + m, dtype=np.int64)
    for s in range(n):
        dist[:] = -1
        parent[:] = -1
        dist[s] = 0
        head, tail = 0, 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            if u < n:
                lo, hi, nbrs, off = var_ptr[u], var_ptr[u + 1], var_nbrs, n
            else:
                lo, hi, nbrs, off = check_ptr[u - n], check_ptr[u - n + 1], check_nbrs, 0
            for k in range(lo, hi):
                w = nbrs[k] + off
                if w == parent[u]:
                    continue
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                else:
                    cyc = dist[u] + dist[w] + 1
                    if cyc < best:
                        best = cyc
    return best


def girth(matrix: SparseBitMatrix) -> Optional[int]:
    """Length of the shortest cycle of the Tanner graph, ``None`` if acyclic."""
    if matrix.nnz == 0:
        return None
    g = _girth(matrix.n, matrix.m, matrix.col_ptr, matrix.col_idx, matrix.row_ptr, matrix.row_idx)
    return None if g >= (1 << 30) else int(g)


def code_profile(matrix: SparseBitMatrix) -> CodeProfile:
    rank = gf2_rank(matrix)
    return CodeProfile(
        n=matrix.n,
        m=matrix.m,
        rank=rank,
        rate=(matrix.n - rank) / matrix.n if matrix.n else 0.0,
        girth=girth(matrix),
        column_weights=dict(sorted(Counter(matrix.col_weights().tolist()).items())),
        row_weights=dict(sorted(Counter(matrix.row_weights().tolist()).items())),
    )


def qc_expand(exponent_table: Sequence[Sequence[Optional[int]]], circulant_size: int) -> SparseBitMatrix:
    """Expand a table of circulant shifts into a quasi-cyclic matrix.

    A cell with shift ``s`` becomes the ``circulant_size`` identity with each
    row's one moved right by ``s`` (row ``r`` has its one in column
    ``(r + s) mod size``). ``None`` or ``-1`` marks an all-zero block.
    """
    z = circulant_size
    table = [list(row) for row in exponent_table]
    if not table:
        return SparseBitMatrix.from_entries(0, 0, [])
    width = len(table[0])
    if any(len(row) != width for row in table):
        raise ValueError("exponent table rows differ in length")
    entries = []
    for bi, row in enumerate(table):
        for bj, s in enumerate(row):
            if s is None or s == -1:
                continue
            if not 0 <= s < z:
                raise ValueError(f"shift {s} at cell ({bi}, {bj}) outside [0, {z})")
            for r in range(z):
                entries.append((bi * z + r, bj * z + (r + s) % z))
    return SparseBitMatrix.from_entries(len(table) * z, width * z, entries)


def block_matrix(blocks: Sequence[Sequence[Optional[SparseBitMatrix]]], m: int, n: int) -> SparseBitMatrix:
    """Assemble equal-size ``m`` x ``n`` blocks (``None`` = zero block)."""
    parts = []
    for bi, row in enumerate(blocks):
        for bj, blk in enumerate(row):
            if blk is None or blk.nnz == 0:
                continue
            if blk.shape != (m, n):
                raise ValueError(f"block ({bi}, {bj}) has shape {blk.shape}, expected {(m, n)}")
            rows = np.repeat(np.arange(m), np.diff(blk.row_ptr)) + bi * m
            parts.append(np.stack([rows, blk.row_idx + bj * n], axis=1))
    arr = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return SparseBitMatrix._from_array(len(blocks) * m, len(blocks[0]) * n, arr.astype(np.int64))
