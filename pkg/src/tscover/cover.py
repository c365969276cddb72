"""
Graph covers that break trapping sets by swapping edges between copies.

Start from ``copies`` disjoint copies of the base Tanner graph. Swapping
base edge (c, v) with shift ``s`` reconnects check c of copy ``i`` to
variable v of copy ``(i + s) mod copies``. For two copies the result is

    [[H', B],
     [B,  H']]

with B holding the swapped edges and H' = H - B.

A set of base variables still appears as a trapping set of the cover
exactly when the shifts are balanced on its subgraph: every cycle of the
set carries a net shift of 0 mod ``copies``. :func:`set_survives` checks
that condition directly and :func:`verify_elimination` confirms it by
searching the cover itself.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._version import __version__
from .code import (BudgetExceeded, SparseBitMatrix, block_matrix, gf2_rank, min_distance_bruteforce)
from .decoders import GallagerBConfig
from .trapping import (DecoderConfig, InstantonCensus, TrappingSetRecord, instanton_search,
                       sets_of_signature, topological_ts_scan)

SCHEDULES = ("random", "unique-edge", "relaxed-freeze", "manual")


@dataclass
class LogEntry:
    set_id: Optional[int]
    edge: Optional[tuple[int, int]]  # (check, variable) in the base graph
    action: str

    def as_dict(self) -> dict:
        return {"set_id": self.set_id, "edge": list(self.edge) if self.edge else None,
                "action": self.action}


@dataclass
class SwapPlan:
    base: SparseBitMatrix
    swapped: dict = field(default_factory=dict)  # edge id -> shift in [1, copies)
    frozen: set = field(default_factory=set)
    schedule: str = "manual"
    seed: Optional[int] = None
    copies: int = 2
    log: list = field(default_factory=list)

    def swapped_edges(self) -> list[int]:
        return sorted(self.swapped)

    def b_matrix(self) -> SparseBitMatrix:
        g = self.base.graph
        return SparseBitMatrix.from_entries(self.base.m, self.base.n, (g.edge(e) for e in self.swapped))

    def h_prime(self) -> SparseBitMatrix:
        g = self.base.graph
        keep = [g.edge(e) for e in range(g.num_edges) if e not in self.swapped]
        return SparseBitMatrix.from_entries(self.base.m, self.base.n, keep)

    def swap(self, edge: int, shift: int = 1, set_id: Optional[int] = None, action: str = "swap"):
        if edge in self.frozen:
            raise ValueError(f"edge {self.base.graph.edge(edge)} is frozen")
        if not 1 <= shift < self.copies:
            raise ValueError(f"shift {shift} outside [1, {self.copies})")
        self.swapped[edge] = shift
        self.log.append(LogEntry(set_id, self.base.graph.edge(edge), action))

    def freeze(self, edges: Iterable[int], set_id: Optional[int] = None):
        self.frozen.update(int(e) for e in edges)
        self.log.append(LogEntry(set_id, None, "freeze"))

    def to_json(self) -> str:
        g = self.base.graph
        doc = {
            "tool": f"tscover {__version__}",
            "schedule": self.schedule,
            "seed": self.seed,
            "copies": self.copies,
            "base": {"n": self.base.n, "m": self.base.m, "nnz": self.base.nnz,
                     "sha256": matrix_digest(self.base)},
            "swapped": [[*g.edge(e), s] for e, s in sorted(self.swapped.items())],
            "frozen": [list(g.edge(e)) for e in sorted(self.frozen)],
            "log": [entry.as_dict() for entry in self.log],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str, base: SparseBitMatrix) -> "SwapPlan":
        doc = json.loads(text)
        meta = doc.get("base", {})
        if meta.get("sha256") not in (None, matrix_digest(base)):
            raise ValueError("swap plan was built for a different base matrix")
        g = base.graph
        plan = cls(base, schedule=doc.get("schedule", "manual"), seed=doc.get("seed"),
                   copies=int(doc.get("copies", 2)))
        plan.swapped = {g.edge_id(c, v): int(s) for c, v, s in doc["swapped"]}
        plan.frozen = {g.edge_id(c, v) for c, v in doc.get("frozen", [])}
        plan.log = [LogEntry(d["set_id"], tuple(d["edge"]) if d["edge"] else None, d["action"])
                    for d in doc.get("log", [])]
        return plan


def matrix_digest(matrix: SparseBitMatrix) -> str:
    h = hashlib.sha256()
    h.update(f"{matrix.m} {matrix.n}".encode())
    h.update(matrix.row_ptr.astype(np.int64).tobytes())
    h.update(matrix.row_idx.astype(np.int64).tobytes())
    return h.hexdigest()


@dataclass
class CoverCode:
    matrix: SparseBitMatrix
    plan: SwapPlan
    copies: int

    @property
    def n(self) -> int:
        return self.matrix.n


def build_cover(plan: SwapPlan, copies: Optional[int] = None) -> CoverCode:
    t = plan.copies if copies is None else copies
    if t < 2:
        raise ValueError("a cover needs at least two copies")
    H = plan.base
    g = H.graph
    for e, s in plan.swapped.items():
        if not 1 <= s < t:
            raise ValueError(f"edge {g.edge(e)} has shift {s} outside [1, {t})")
    shift = np.zeros(g.num_edges, dtype=np.int64)
    for e, s in plan.swapped.items():
        shift[e] = s
    rows, cols = [], []
    for i in range(t):
        rows.append(g.edge_check + i * H.m)
        cols.append(g.edge_var + ((i + shift) % t) * H.n)
    arr = np.stack([np.concatenate(rows), np.concatenate(cols)], axis=1)
    matrix = SparseBitMatrix._from_array(t * H.m, t * H.n, arr)
    return CoverCode(matrix, plan, t)


def set_survives(plan: SwapPlan, variables: Iterable[int]) -> bool:
    """True if the set lifts to ``copies`` disjoint copies of itself, i.e. it
    is still a trapping set of the cover."""
    g = plan.base.graph
    t = plan.copies
    vs = sorted({int(v) for v in variables})
    inset = set(vs)
    pot: dict = {}
    for root in vs:
        if ("v", root) in pot:
            continue
        pot[("v", root)] = 0
        q = deque([("v", root)])
        while q:
            kind, x = q.popleft()
            p = pot[(kind, x)]
            if kind == "v":
                nbrs = [(("c", int(g.edge_check[e])), int(e))
                        for e in g.var_edges[g.var_ptr[x]:g.var_ptr[x + 1]]]
                sign = -1
            else:
                nbrs = [(("v", int(g.edge_var[e])), int(e))
                        for e in range(g.check_ptr[x], g.check_ptr[x + 1]) if int(g.edge_var[e]) in inset]
                sign = 1
            for node, e in nbrs:
                want = (p + sign * plan.swapped.get(e, 0)) % t
                if node in pot:
                    if pot[node] != want:
                        return False
                else:
                    pot[node] = want
                    q.append(node)
    return True


def _order_targets(targets: Sequence[TrappingSetRecord], threshold: Optional[int]):
    indexed = list(enumerate(targets))
    if threshold is not None:
        indexed = [(i, t) for i, t in indexed
                   if t.critical_number is not None and t.critical_number <= threshold]
    big = float("inf")
    indexed.sort(key=lambda it: (it[1].critical_number if it[1].critical_number is not None else big,
                                 it[1].variables))
    return indexed


def eliminate_trapping_sets(H: SparseBitMatrix, targets: Sequence[TrappingSetRecord],
                            schedule: str = "random", seed: Optional[int] = 0, copies: int = 2,
                            threshold: Optional[int] = None,
                            manual_edges: Sequence[tuple[int, int]] = ()) -> tuple[CoverCode, SwapPlan]:
    """Swap edges until every target set is broken in the cover.

    Targets are handled in order of critical number (ties: variables in
    lexicographic order). For each target: if it already has a swapped edge
    and is broken, only its edges are frozen; otherwise an eligible
    (unfrozen, unswapped) edge is swapped and then all its edges frozen.
    A swap that leaves the set intact (e.g. an edge into an odd check, or
    swaps that merely exchange check copies) is logged and another edge is
    tried. ``relaxed-freeze`` may additionally swap frozen edges as long as
    no earlier target is restored. ``manual`` applies ``manual_edges`` as
    given and ignores the targets.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    plan = SwapPlan(H, schedule=schedule, seed=seed, copies=copies)
    g = H.graph
    if schedule == "manual":
        for c, v in manual_edges:
            plan.swap(g.edge_id(c, v), action="manual swap")
        return build_cover(plan), plan

    rng = random.Random(seed)
    order = _order_targets(targets, threshold)
    edge_sets = {i: set(t.edges(g)) for i, t in order}
    usage: dict = {}
    for i, es in edge_sets.items():
        for e in es:
            usage[e] = usage.get(e, 0) + 1
    by_edge: dict = {}
    for i, es in edge_sets.items():
        for e in es:
            by_edge.setdefault(e, []).append(i)
    def restores_earlier(e: int) -> bool:
        for j in by_edge.get(e, ()):
            if j in done_set and not set_survives_before[j] and set_survives(plan, targets[j].variables):
                return True
        return False

    done_set: set = set()
    set_survives_before: dict = {}
    for i, ts in order:
        E = edge_sets[i]
        alive = set_survives(plan, ts.variables)
        if E & set(plan.swapped):
            if not alive:
                plan.log.append(LogEntry(i, None, "already broken"))
            else:
                plan.log.append(LogEntry(i, None, "guard: swapped edges cancel"))
        while alive:
            eligible = sorted(E - plan.frozen - set(plan.swapped))
            if schedule == "unique-edge":
                unique = [e for e in eligible if usage[e] == 1]
                eligible = unique or eligible
            chosen = None
            if eligible:
                chosen = rng.choice(eligible)
                plan.swap(chosen, set_id=i)
            elif schedule == "relaxed-freeze":
                frozen_pool = sorted((E & plan.frozen) - set(plan.swapped))
                rng.shuffle(frozen_pool)
                for e in frozen_pool:
                    plan.swapped[e] = 1
                    ok = not set_survives(plan, ts.variables) and not restores_earlier(e)
                    del plan.swapped[e]
                    if ok:
                        chosen = e
                        plan.frozen.discard(e)
                        plan.swap(e, set_id=i, action="relaxed swap")
                        plan.frozen.add(e)
                        break
            if chosen is None:
                plan.log.append(LogEntry(i, None, "unresolvable under freeze rule"))
                break
            alive = set_survives(plan, ts.variables)
            if alive:
                plan.log.append(LogEntry(i, g.edge(chosen), "swap left set intact"))
        plan.freeze(E, set_id=i)
        done_set.add(i)
        set_survives_before[i] = alive
    return build_cover(plan), plan


def unresolved_targets(plan: SwapPlan, targets: Sequence[TrappingSetRecord]) -> list[int]:
    return [i for i, t in enumerate(targets) if set_survives(plan, t.variables)]


def replay_log(plan: SwapPlan, targets: Sequence[TrappingSetRecord]) -> SwapPlan:
    """Rebuild a plan from its log.

    Raises ``ValueError`` if a plain swap ever touches an edge frozen by an
    earlier step; only ``relaxed swap`` entries may reuse frozen edges.
    """
    g = plan.base.graph
    fresh = SwapPlan(plan.base, schedule=plan.schedule, seed=plan.seed, copies=plan.copies)
    for entry in plan.log:
        if entry.action in ("swap", "manual swap", "relaxed swap"):
            e = g.edge_id(*entry.edge)
            if entry.action == "relaxed swap":
                fresh.frozen.discard(e)
            fresh.swap(e, plan.swapped.get(e, 1), entry.set_id, entry.action)
            if entry.action == "relaxed swap":
                fresh.frozen.add(e)
        elif entry.action == "freeze":
            fresh.freeze(targets[entry.set_id].edges(g), entry.set_id)
        else:
            fresh.log.append(LogEntry(entry.set_id, entry.edge, entry.action))
    return fresh


# ---------------------------------------------------------------------------
# verification


@dataclass
class EliminationReport:
    signature: tuple[int, int]
    surviving_sets: list
    instanton_weight: Optional[int]
    instanton_failures: dict  # weight -> InstantonCensus

    @property
    def eliminated(self) -> bool:
        return not self.surviving_sets and all(c.num_failures == 0 for c in self.instanton_failures.values())

    def summary(self) -> dict:
        return {
            "signature": list(self.signature),
            "surviving_sets": len(self.surviving_sets),
            "instanton_weight": self.instanton_weight,
            "failures_by_weight": {str(w): c.num_failures for w, c in sorted(self.instanton_failures.items())},
            "eliminated": self.eliminated,
        }


def verify_elimination(cover: CoverCode, signature: tuple[int, int], k: Optional[int] = None,
                       config: DecoderConfig = GallagerBConfig(), scan: bool = True,
                       scan_budget: int = 5 * 10 ** 6, pattern_budget: int = 10 ** 8,
                       workers: int = 1) -> EliminationReport:
    """Search the cover for sets of ``signature`` and for decoder failures at
    every weight up to ``k``."""
    a, b = signature
    surviving: list = []
    if scan:
        surviving = sets_of_signature(topological_ts_scan(cover.matrix.graph, a, b, budget=scan_budget),
                                      signature)
    censuses: dict = {}
    if k:
        for w in range(1, k + 1):
            censuses[w] = instanton_search(cover.matrix.graph, w, config, pattern_budget, workers)
    return EliminationReport(tuple(signature), surviving, k, censuses)


@dataclass(frozen=True)
class RateReport:
    n: int
    rank: int
    rate: float
    cover_n: int
    cover_rank: int
    cover_rate: float
    full_rank: bool
    reduced_form_ok: Optional[bool]

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_rate_theorem(cover: CoverCode) -> RateReport:
    """Compare ranks of the base and the cover.

    For two copies this asserts rate(cover) <= rate(base), equality when the
    base is full rank, rank(cover) >= 2 rank(base), and that adding the
    second block row to the first and then the first block column to the
    second turns [[H', B], [B, H']] into [[H, 0], [B, H]].
    """
    H = cover.plan.base
    r = gf2_rank(H)
    R = gf2_rank(cover.matrix)
    rate = (H.n - r) / H.n
    t = cover.copies
    cover_rate = (cover.matrix.n - R) / cover.matrix.n
    full = r == H.m
    reduced_ok = None
    if t == 2:
        dense = cover.matrix.to_dense()
        m, n = H.m, H.n
        dense[:m] ^= dense[m:]
        dense[:, n:] ^= dense[:, :n]
        B = cover.plan.b_matrix()
        expect = block_matrix([[H, None], [B, H]], m, n).to_dense()
        reduced_ok = bool(np.array_equal(dense, expect))
        assert reduced_ok, "block reduction of the cover does not give [[H, 0], [B, H]]"
        assert R >= 2 * r, f"rank(cover)={R} < 2*rank(H)={2 * r}"
        assert cover_rate <= rate + 1e-15, f"cover rate {cover_rate} exceeds base rate {rate}"
        if full:
            assert R == 2 * r and cover_rate == rate, "full-rank base but rates differ"
    return RateReport(H.n, r, rate, cover.matrix.n, R, cover_rate, full, reduced_ok)


@dataclass(frozen=True)
class DistanceReport:
    d_min: Optional[int]
    cover_d_min: Optional[int]

    @property
    def lower_tight(self) -> bool:
        return self.d_min is not None and self.cover_d_min == self.d_min

    @property
    def upper_tight(self) -> bool:
        return self.d_min is not None and self.cover_d_min == 2 * self.d_min


def verify_distance_theorem(cover: CoverCode, max_dimension: int = 28) -> DistanceReport:
    """Exact distances of base and cover; asserts d <= d2 <= 2d (two copies)."""
    d = min_distance_bruteforce(cover.plan.base, max_dimension)
    d2 = min_distance_bruteforce(cover.matrix, max_dimension)
    if cover.copies == 2 and d is not None:
        assert d2 is not None and d <= d2 <= 2 * d, f"distance sandwich violated: d={d}, d2={d2}"
    return DistanceReport(d, d2)


def unwrap_convolutional(plan: SwapPlan, periods: int) -> SparseBitMatrix:
    """``periods`` x ``periods`` block truncation of the band matrix with H' on
    the diagonal and B directly below it."""
    if periods < 1:
        raise ValueError("periods must be >= 1")
    Hp, B = plan.h_prime(), plan.b_matrix()
    m, n = plan.base.shape
    blocks = [[None] * periods for _ in range(periods)]
    for i in range(periods):
        blocks[i][i] = Hp
        if i > 0:
            blocks[i][i - 1] = B
    return block_matrix(blocks, m, n)
