"""
Trapping sets: records, instanton search, critical numbers and a
topological scan.

An (a, b) trapping set is a set of ``a`` variable nodes whose induced
subgraph has ``b > 0`` checks of odd degree. Decoder failures are mapped to
sets through the terminal phase of the trace: the union of error supports
over the final period (or the final few iterations when no short period is
found).

Exhaustive searches assume the all-zero codeword and enumerate error
patterns in lexicographic order, so witness lists are reproducible and
independent of the number of workers.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

import numba as nb
import numpy as np

from .code import BudgetExceeded, TannerGraph, girth as code_girth
from .decoders import (DecodeTrace, GallagerBConfig, MinSumConfig, Outcome, gallager_b_decode,
                       gb_sparse_patterns_fail, gb_workspace, kernel_arrays, min_sum_decode)

DecoderConfig = Union[GallagerBConfig, MinSumConfig]

DEFAULT_PATTERN_BUDGET = 10 ** 8


@dataclass(frozen=True)
class TrappingSetRecord:
    variables: tuple[int, ...]
    induced_checks: tuple[int, ...]
    odd_checks: tuple[int, ...]
    critical_number: Optional[int] = None
    halo: Optional[int] = None
    witness_patterns: tuple[tuple[int, ...], ...] = ()
    kind: str = "trapping"  # "codeword" when b == 0
    cycle_length: Optional[int] = None

    @property
    def a(self) -> int:
        return len(self.variables)

    @property
    def b(self) -> int:
        return len(self.odd_checks)

    @property
    def signature(self) -> tuple[int, int]:
        return (self.a, self.b)

    def edges(self, graph: TannerGraph) -> list[int]:
        return graph.edges_of(self.variables)

    def as_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "a": self.a,
            "b": self.b,
            "kind": self.kind,
            "critical_number": self.critical_number,
            "halo": self.halo,
            "witnesses": [list(w) for w in self.witness_patterns],
            "odd_checks": list(self.odd_checks),
            "cycle_length": self.cycle_length,
        }

    @classmethod
    def from_dict(cls, graph: TannerGraph, d: dict) -> "TrappingSetRecord":
        rec = trapping_set_from_variables(graph, d["variables"])
        return replace(rec, critical_number=d.get("critical_number"), halo=d.get("halo"),
                       witness_patterns=tuple(tuple(w) for w in d.get("witnesses", ())))


def _induced_cycle_length(graph: TannerGraph, variables: Sequence[int]) -> Optional[int]:
    vs = set(variables)
    adj: dict = {}
    for v in vs:
        for c in graph.var_neighbors(v).tolist():
            adj.setdefault(("v", v), []).append(("c", c))
            adj.setdefault(("c", c), []).append(("v", v))
    best = None
    for s in [("v", v) for v in vs]:
        dist = {s: 0}
        parent = {s: None}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w == parent[u]:
                    continue
                if w in dist:
                    L = dist[u] + dist[w] + 1
                    if best is None or L < best:
                        best = L
                else:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    q.append(w)
    return best


def trapping_set_from_variables(graph: TannerGraph, variables: Iterable[int]) -> TrappingSetRecord:
    vs = tuple(sorted({int(v) for v in variables}))
    deg = graph.induced_check_degrees(vs)
    odd = tuple(sorted(c for c, d in deg.items() if d % 2))
    return TrappingSetRecord(
        variables=vs,
        induced_checks=tuple(sorted(deg)),
        odd_checks=odd,
        kind="trapping" if odd else "codeword",
        cycle_length=_induced_cycle_length(graph, vs),
    )


def classify_failure(trace: DecodeTrace, graph: TannerGraph) -> TrappingSetRecord:
    """Trapping set the decoder ended up in.

    A miscorrection (zero syndrome on a wrong codeword) is classified by its
    error support and comes back with ``kind == "codeword"`` and ``b == 0``.
    """
    if trace.outcome is Outcome.SUCCESS:
        raise ValueError("classify_failure called on a successful decode")
    if trace.outcome is Outcome.MISCORRECTION:
        return trapping_set_from_variables(graph, trace.supports[-1])
    return trapping_set_from_variables(graph, trace.terminal_union())


# ---------------------------------------------------------------------------
# census


@dataclass
class InstantonCensus:
    k: int
    patterns_tested: int
    failures: list = field(default_factory=list)  # (pattern, TrappingSetRecord), lexicographic
    region: Optional[tuple[int, ...]] = None  # variables searched, None for the whole code

    @property
    def num_failures(self) -> int:
        return len(self.failures)

    def classes(self) -> list[TrappingSetRecord]:
        """Distinct failure sets, ordered by variables, with their witnesses
        and ``critical_number`` set to this census weight."""
        by_set: dict = {}
        for pattern, rec in self.failures:
            if rec.variables not in by_set:
                by_set[rec.variables] = (rec, [])
            by_set[rec.variables][1].append(tuple(pattern))
        out = []
        for vs in sorted(by_set):
            rec, wit = by_set[vs]
            out.append(replace(rec, critical_number=self.k, witness_patterns=tuple(wit)))
        return out

    def multiplicities(self) -> dict:
        """Class signature -> number of distinct sets of that type."""
        out: dict = {}
        for rec in self.classes():
            key = rec.signature if rec.kind == "trapping" else ("codeword", rec.a)
            out[key] = out.get(key, 0) + 1
        return out

    def merge(self, other: "InstantonCensus") -> "InstantonCensus":
        if other.k != self.k:
            raise ValueError("cannot merge censuses of different weights")
        fails = sorted(self.failures + other.failures, key=lambda f: tuple(f[0]))
        return InstantonCensus(self.k, self.patterns_tested + other.patterns_tested, fails, self.region)

    def to_json(self, **meta) -> str:
        doc = {
            "k": self.k,
            "patterns_tested": self.patterns_tested,
            "failures": self.num_failures,
            **meta,
            "records": [rec.as_dict() for rec in self.classes()],
        }
        return json.dumps(doc, indent=1)


def census_records_from_json(graph: TannerGraph, text: str) -> list[TrappingSetRecord]:
    doc = json.loads(text)
    return [TrappingSetRecord.from_dict(graph, d) for d in doc["records"]]


def census_to_json(records: Sequence[TrappingSetRecord], **meta) -> str:
    return json.dumps({**meta, "records": [r.as_dict() for r in records]}, indent=1)


# ---------------------------------------------------------------------------
# exhaustive pattern enumeration


def _unrank_combination(rank: int, pool_size: int, k: int) -> list[int]:
    """Lexicographic combination of ``range(pool_size)`` with the given rank."""
    out = []
    x = 0
    for i in range(k):
        while True:
            c = math.comb(pool_size - x - 1, k - i - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return out


@nb.njit(cache=True, nogil=True)
def _fill_combinations(state, pool_size, out):
    """Write successive combinations starting at ``state`` into ``out``;
    advances ``state`` in place. Returns the number written."""
    k = state.size
    rows = out.shape[0]
    for r in range(rows):
        for j in range(k):
            out[r, j] = state[j]
        # next combination
        i = k - 1
        while i >= 0 and state[i] == pool_size - k + i:
            i -= 1
        if i < 0:
            return r + 1
        state[i] += 1
        for j in range(i + 1, k):
            state[j] = state[j - 1] + 1
    return rows


def _scan_range(arrays, pool, k, start, count, max_iter, chunk=1 << 16):
    graph_arrays, ws = arrays
    state = np.array(_unrank_combination(start, pool.size, k), dtype=np.int64)
    buf = np.empty((min(chunk, count), k), dtype=np.int64)
    failing = []
    done = 0
    while done < count:
        rows = min(buf.shape[0], count - done)
        got = _fill_combinations(state, pool.size, buf[:rows])
        pats = pool[buf[:got]]
        flags = gb_sparse_patterns_fail(*graph_arrays, pats, max_iter, ws)
        for r in np.flatnonzero(flags):
            failing.append(tuple(int(x) for x in pats[r]))
        done += got
        if got < rows:
            break
    return failing


def _failing_patterns(graph: TannerGraph, pool: np.ndarray, k: int, config: DecoderConfig,
                      workers: int = 1) -> list[tuple[int, ...]]:
    total = math.comb(pool.size, k)
    if total == 0:
        return []
    if isinstance(config, GallagerBConfig):
        ka = kernel_arrays(graph)
        workers = max(1, min(workers, total))
        bounds = [total * i // workers for i in range(workers + 1)]
        jobs = [((ka, gb_workspace(graph)), pool, k, bounds[i], bounds[i + 1] - bounds[i],
                 config.max_iterations) for i in range(workers)]
        if workers == 1:
            parts = [_scan_range(*jobs[0])]
        else:
            with ThreadPoolExecutor(workers) as ex:
                parts = list(ex.map(lambda j: _scan_range(*j), jobs))
        return [p for part in parts for p in part]
    # generic decoder: decode each pattern through the traced path
    out = []
    for pat in _iter_combinations(pool, k):
        if decode_pattern(graph, pat, config).failed:
            out.append(pat)
    return out


def _iter_combinations(pool: np.ndarray, k: int):
    return itertools.combinations(pool.tolist(), k)


def decode_pattern(graph: TannerGraph, pattern: Iterable[int], config: DecoderConfig) -> DecodeTrace:
    """Decode the all-zero codeword received with errors at ``pattern``.

    Min-sum sees the BSC output as LLRs of +-1 (min-sum is scale invariant).
    """
    y = np.zeros(graph.n, dtype=np.uint8)
    y[list(pattern)] = 1
    if isinstance(config, GallagerBConfig):
        return gallager_b_decode(graph, y, config)
    return min_sum_decode(graph, 1.0 - 2.0 * y, config)


def _census(graph, pool, k, config, budget, workers, region):
    total = math.comb(pool.size, k)
    if total > budget:
        raise BudgetExceeded(
            f"C({pool.size}, {k}) = {total} patterns exceeds the budget of {budget}; "
            "use restricted_instanton_search on a candidate region instead")
    failing = _failing_patterns(graph, pool, k, config, workers)
    failures = []
    for pat in failing:
        trace = decode_pattern(graph, pat, config)
        failures.append((pat, classify_failure(trace, graph)))
    return InstantonCensus(k, total, failures, region)


def instanton_search(graph: TannerGraph, k: int, config: DecoderConfig = GallagerBConfig(),
                     budget: int = DEFAULT_PATTERN_BUDGET, workers: int = 1) -> InstantonCensus:
    """Decode every weight-``k`` error pattern and collect the failures."""
    return _census(graph, np.arange(graph.n, dtype=np.int64), k, config, budget, workers, None)


def halo_region(graph: TannerGraph, variables: Iterable[int], halo_radius: int) -> np.ndarray:
    """Variables within Tanner-graph distance ``2 * halo_radius`` of ``variables``."""
    region = {int(v) for v in variables}
    frontier = set(region)
    for _ in range(halo_radius):
        nxt = set()
        for v in frontier:
            for c in graph.var_neighbors(v).tolist():
                nxt.update(graph.check_neighbors(c).tolist())
        frontier = nxt - region
        region |= nxt
    return np.array(sorted(region), dtype=np.int64)


def restricted_instanton_search(graph: TannerGraph, k: int, candidate_variables: Iterable[int],
                                halo_radius: int = 1, config: DecoderConfig = GallagerBConfig(),
                                budget: int = DEFAULT_PATTERN_BUDGET, workers: int = 1) -> InstantonCensus:
    """Like :func:`instanton_search` but errors only inside the candidate set
    and its halo."""
    pool = halo_region(graph, candidate_variables, halo_radius)
    return _census(graph, pool, k, config, budget, workers, tuple(pool.tolist()))


@dataclass(frozen=True)
class CriticalNumber:
    value: Optional[int]  # None: nothing found up to searched_up_to
    halo: int
    searched_up_to: int
    witnesses: tuple[tuple[int, ...], ...] = ()

    @property
    def found(self) -> bool:
        return self.value is not None


def critical_number(graph: TannerGraph, ts: TrappingSetRecord, config: DecoderConfig = GallagerBConfig(),
                    halo_radius: int = 1, k_max: Optional[int] = None,
                    budget: int = DEFAULT_PATTERN_BUDGET) -> CriticalNumber:
    """Smallest error weight, with errors confined to ``ts`` plus its halo,
    that drives the decoder into a set containing ``ts``.

    This is an upper-bound certificate relative to the searched region.
    """
    k_max = ts.a if k_max is None else k_max
    target = set(ts.variables)
    for k in range(1, k_max + 1):
        census = restricted_instanton_search(graph, k, ts.variables, halo_radius, config, budget)
        wit = tuple(p for p, rec in census.failures if target <= set(rec.variables))
        if wit:
            return CriticalNumber(k, halo_radius, k, wit)
    return CriticalNumber(None, halo_radius, k_max)


# ---------------------------------------------------------------------------
# topological scan


@nb.njit(cache=True, nogil=True)
def _cycles(n, var_ptr, var_checks, check_ptr, edge_var, max_vars, out, limit):
    """Variable sets of cycles with at most ``max_vars`` variables.

    Each cycle is rooted at its smallest variable; rows of ``out`` are
    padded with -1. Returns the number of rows written, or -1 on overflow.
    """
    count = 0
    path_v = np.empty(max_vars, dtype=np.int64)
    path_c = np.empty(max_vars, dtype=np.int64)
    # iterative DFS state: per depth, index into neighbour lists
    it_c = np.empty(max_vars, dtype=np.int64)
    it_v = np.empty(max_vars, dtype=np.int64)
    for v0 in range(n):
        path_v[0] = v0
        depth = 0
        it_c[0] = var_ptr[v0]
        it_v[0] = -1
        while depth >= 0:
            v = path_v[depth]
            # advance to next (check, variable) pair from v
            advanced = False
            while it_c[depth] < var_ptr[v + 1]:
                c = var_checks[it_c[depth]]
                if depth > 0 and c == path_c[depth - 1]:
                    it_c[depth] += 1
                    it_v[depth] = -1
                    continue
                used = False
                for d in range(depth - 1):
                    if path_c[d] == c:
                        used = True
                        break
                if used:
                    it_c[depth] += 1
                    it_v[depth] = -1
                    continue
                if it_v[depth] < 0:
                    it_v[depth] = check_ptr[c]
                while it_v[depth] < check_ptr[c + 1]:
                    w = edge_var[it_v[depth]]
                    it_v[depth] += 1
                    if w == v:
                        continue
                    if w == v0:
                        if depth >= 1 and c != path_c[0]:
                            # closed cycle v0..v; keep one orientation
                            if path_v[1] <= v:
                                if count >= limit:
                                    return -1
                                for j in range(max_vars):
                                    out[count, j] = path_v[j] if j <= depth else -1
                                count += 1
                        continue
                    if w < v0:
                        continue
                    seen = False
                    for d in range(1, depth + 1):
                        if path_v[d] == w:
                            seen = True
                            break
                    if seen or depth + 1 >= max_vars:
                        continue
                    path_c[depth] = c
                    path_v[depth + 1] = w
                    depth += 1
                    it_c[depth] = var_ptr[w]
                    it_v[depth] = -1
                    advanced = True
                    break
                if advanced:
                    break
                it_c[depth] += 1
                it_v[depth] = -1
            if not advanced:
                depth -= 1
    return count


def short_cycle_variable_sets(graph: TannerGraph, max_vars: int, limit: int = 10 ** 7) -> set:
    """Variable sets of all cycles through at most ``max_vars`` variables
    (cycle length at most ``2 * max_vars``)."""
    if max_vars < 2:
        return set()
    var_checks = graph.edge_check[graph.var_edges]
    cap = 1 << 12
    while True:
        out = np.empty((cap, max_vars), dtype=np.int64)
        cnt = _cycles(graph.n, graph.var_ptr, var_checks, graph.check_ptr, graph.edge_var,
                      max_vars, out, cap)
        if cnt >= 0:
            break
        if cap >= limit:
            raise BudgetExceeded(f"more than {limit} short cycles")
        cap = min(cap * 4, limit)
    return {tuple(sorted(x for x in row if x >= 0)) for row in out[:cnt].tolist()}


def topological_ts_scan(graph: TannerGraph, a_max: int, b_max: int,
                        budget: int = 5 * 10 ** 6) -> list[TrappingSetRecord]:
    """All connected variable sets of size <= ``a_max`` that contain a short
    cycle and have ``0 < b <= b_max`` odd checks.

    Seeds are cycles of length at most ``girth + 4`` (and at most
    ``2 * a_max``); sets grow one adjacent variable at a time.
    """
    g = code_girth(graph.matrix)
    if g is None:
        return []
    max_cycle_vars = min(a_max, (g + 4) // 2)
    seeds = short_cycle_variable_sets(graph, max_cycle_vars, limit=budget)
    check_sets = [set(graph.var_neighbors(v).tolist()) for v in range(graph.n)]
    seen: set = set(seeds)
    level = sorted(seeds)
    found = []
    while level:
        nxt = []
        for vs in level:
            deg: dict = {}
            for v in vs:
                for c in check_sets[v]:
                    deg[c] = deg.get(c, 0) + 1
            b = sum(1 for d in deg.values() if d % 2)
            if 0 < b <= b_max:
                found.append(vs)
            if len(vs) >= a_max:
                continue
            members = set(vs)
            nbrs = set()
            for c in deg:
                nbrs.update(graph.check_neighbors(c).tolist())
            for w in nbrs - members:
                grown = tuple(sorted(members | {w}))
                if grown not in seen:
                    seen.add(grown)
                    nxt.append(grown)
            if len(seen) > budget:
                raise BudgetExceeded(f"topological scan visited more than {budget} variable sets")
        level = nxt
    return [trapping_set_from_variables(graph, vs) for vs in sorted(found)]


def count_by_signature(records: Iterable[TrappingSetRecord]) -> dict:
    out: dict = {}
    for r in records:
        out[r.signature] = out.get(r.signature, 0) + 1
    return dict(sorted(out.items()))


def sets_of_signature(records: Iterable[TrappingSetRecord], signature: tuple[int, int]) -> list:
    return [r for r in records if r.signature == tuple(signature)]
