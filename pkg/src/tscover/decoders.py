"""
Gallager B (BSC) and min-sum (AWGN) decoders with per-iteration traces.

Both decoders check the syndrome after every iteration and stop at the
first zero syndrome. Iteration 0 is the channel decision itself.

Gallager B rules, for a variable of degree ``dv`` with channel bit ``y``:

* variable -> check: ``1 - y`` if all ``dv - 1`` other incoming check
  messages equal ``1 - y``, else ``y``. Iteration 1 sends ``y``.
* check -> variable: XOR of the other incoming variable messages.
* decision: majority over ``{y}`` and all ``dv`` check messages, ties go to
  ``y``.

The frame-error kernels (``gb_patterns_fail``, ``gb_sparse_patterns_fail``,
``ms_frame_error``) are the hot paths used by exhaustive search and Monte
Carlo; they only report whether a frame was decoded correctly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numba as nb
import numpy as np

from .code import TannerGraph


class Outcome(enum.Enum):
    SUCCESS = "success"              # zero syndrome on the transmitted word
    MISCORRECTION = "miscorrection"  # zero syndrome on a different codeword
    FAILURE = "failure"              # no zero syndrome within max_iterations


@dataclass(frozen=True)
class GallagerBConfig:
    max_iterations: int = 50

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def name(self) -> str:
        return "gallager-b"


@dataclass(frozen=True)
class MinSumConfig:
    max_iterations: int = 500
    sigma: Optional[float] = None  # channel noise std, only used when decoding from received samples

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def name(self) -> str:
        return "min-sum"


@dataclass(frozen=True, eq=False)
class DecodeTrace:
    """Hard decisions after every iteration of one decode.

    ``decisions[t]`` is the decision after iteration ``t`` (row 0 is the
    channel decision). ``supports[t]`` is where it differs from the
    transmitted word.
    """

    decisions: np.ndarray
    transmitted: np.ndarray
    outcome: Outcome
    final_syndrome_zero: bool
    oscillation_period: Optional[int] = None
    periodic_suffix: int = 0
    messages: dict = field(default_factory=dict, repr=False)

    @property
    def iterations(self) -> int:
        """Index of the last iteration performed."""
        return self.decisions.shape[0] - 1

    @property
    def success_iteration(self) -> Optional[int]:
        return self.iterations if self.outcome is Outcome.SUCCESS else None

    @property
    def failed(self) -> bool:
        return self.outcome is not Outcome.SUCCESS

    @cached_property
    def supports(self) -> list[frozenset[int]]:
        diff = self.decisions != self.transmitted[None, :]
        return [frozenset(np.flatnonzero(row).tolist()) for row in diff]

    @property
    def final_decision(self) -> np.ndarray:
        return self.decisions[-1]

    def terminal_supports(self, window: int = 4) -> list[frozenset[int]]:
        """Supports over the terminal phase: one full period if one was detected,
        otherwise the last ``window`` iterations."""
        p = self.oscillation_period or window
        return self.supports[-p:]

    def terminal_union(self, window: int = 4) -> frozenset[int]:
        out: set[int] = set()
        for s in self.terminal_supports(window):
            out |= s
        return frozenset(out)


def detect_period(supports: list, max_period: int = 4) -> tuple[Optional[int], int]:
    """Smallest p <= max_period with S[t] == S[t-p] for the last two t.

    Returns ``(period, suffix_length)``; the suffix length is the longest
    repeating tail, rounded down to a multiple of the period.
    """
    T = len(supports) - 1
    for p in range(1, max_period + 1):
        if T - 1 - p < 0:
            break
        if supports[T] == supports[T - p] and supports[T - 1] == supports[T - 1 - p]:
            t = T
            while t - p >= 0 and supports[t] == supports[t - p]:
                t -= 1
            run = T - t + p  # elements in the repeating tail
            return p, (run // p) * p
    return None, 0


def _check_lengths(graph: TannerGraph, *vectors):
    for v in vectors:
        if v.ndim != 1 or v.size != graph.n:
            raise ValueError(f"expected a length-{graph.n} vector, got shape {v.shape}")


def _finish(graph, decisions, transmitted, converged) -> DecodeTrace:
    if converged:
        ok = np.array_equal(decisions[-1], transmitted)
        outcome = Outcome.SUCCESS if ok else Outcome.MISCORRECTION
    else:
        outcome = Outcome.FAILURE
    diff = decisions != transmitted[None, :]
    sups = [frozenset(np.flatnonzero(r).tolist()) for r in diff]
    period, suffix = detect_period(sups) if outcome is Outcome.FAILURE else (None, 0)
    trace = DecodeTrace(decisions, transmitted, outcome, bool(converged), period, suffix)
    trace.__dict__["supports"] = sups
    return trace


# ---------------------------------------------------------------------------
# Gallager B


@nb.njit(cache=True, nogil=True)
def _gb_core(check_ptr, edge_var, var_ptr, var_edges, y, max_iter, record):
    """Returns (decision history or last decision, iterations done, converged)."""
    n = y.size
    m = check_ptr.size - 1
    ne = edge_var.size
    v2c = np.empty(ne, dtype=np.uint8)
    c2v = np.empty(ne, dtype=np.uint8)
    for e in range(ne):
        v2c[e] = y[edge_var[e]]
    rows = max_iter + 1 if record else 1
    hist = np.empty((rows, n), dtype=np.uint8)
    dec = y.copy()
    hist[0, :] = dec
    # iteration 0 syndrome
    ok = True
    for c in range(m):
        acc = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            acc ^= dec[edge_var[e]]
        if acc:
            ok = False
            break
    if ok:
        return hist[:1], 0, True
    for it in range(1, max_iter + 1):
        for c in range(m):
            acc = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                acc ^= v2c[e]
            for e in range(check_ptr[c], check_ptr[c + 1]):
                c2v[e] = acc ^ v2c[e]
        for v in range(n):
            yv = y[v]
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            dv = hi - lo
            dis = 0
            for k in range(lo, hi):
                if c2v[var_edges[k]] != yv:
                    dis += 1
            dec[v] = (1 - yv) if 2 * dis > dv + 1 else yv
            for k in range(lo, hi):
                e = var_edges[k]
                others = dis - (1 if c2v[e] != yv else 0)
                v2c[e] = (1 - yv) if (dv > 1 and others == dv - 1) else yv
        if record:
            hist[it, :] = dec
        ok = True
        for c in range(m):
            acc = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                acc ^= dec[edge_var[e]]
            if acc:
                ok = False
                break
        if ok:
            if record:
                return hist[:it + 1], it, True
            hist[0, :] = dec
            return hist, it, True
    if record:
        return hist, max_iter, False
    hist[0, :] = dec
    return hist, max_iter, False


def gallager_b_decode(graph: TannerGraph, received, config: GallagerBConfig = GallagerBConfig(),
                      transmitted=None) -> DecodeTrace:
    received = np.ascontiguousarray(received, dtype=np.uint8)
    transmitted = (np.zeros(graph.n, dtype=np.uint8) if transmitted is None
                   else np.ascontiguousarray(transmitted, dtype=np.uint8))
    _check_lengths(graph, received, transmitted)
    hist, _, conv = _gb_core(graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges,
                             received, config.max_iterations, True)
    return _finish(graph, hist.copy(), transmitted, conv)


@nb.njit(cache=True, nogil=True)
def _gb_frame_error(check_ptr, edge_var, var_ptr, var_edges, y, max_iter, v2c, c2v, dec, synd_buf):
    """All-zero transmitted word; True when the frame is not recovered."""
    n = y.size
    m = check_ptr.size - 1
    ne = edge_var.size
    for e in range(ne):
        v2c[e] = y[edge_var[e]]
    for v in range(n):
        dec[v] = y[v]
    for it in range(1, max_iter + 1):
        for c in range(m):
            acc = 0
            lo = check_ptr[c]
            hi = check_ptr[c + 1]
            for e in range(lo, hi):
                acc ^= v2c[e]
            for e in range(lo, hi):
                c2v[e] = acc ^ v2c[e]
        for v in range(n):
            yv = y[v]
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            dv = hi - lo
            dis = 0
            for k in range(lo, hi):
                if c2v[var_edges[k]] != yv:
                    dis += 1
            dec[v] = (1 - yv) if 2 * dis > dv + 1 else yv
            for k in range(lo, hi):
                e = var_edges[k]
                others = dis - (1 if c2v[e] != yv else 0)
                v2c[e] = (1 - yv) if (dv > 1 and others == dv - 1) else yv
        ok = True
        for c in range(m):
            acc = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                acc ^= dec[edge_var[e]]
            if acc:
                ok = False
                break
        if ok:
            for v in range(n):
                if dec[v]:
                    return True
            return False
    return True


@nb.njit(cache=True, nogil=True)
def _zero_syndrome(check_ptr, edge_var, x):
    m = check_ptr.size - 1
    for c in range(m):
        acc = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            acc ^= x[edge_var[e]]
        if acc:
            return False
    return True


@nb.njit(cache=True, nogil=True)
def gb_patterns_fail(check_ptr, edge_var, var_ptr, var_edges, n, patterns, max_iter):
    """Decode every row of ``patterns`` (error positions, -1 padded) against
    the all-zero codeword; returns a uint8 failure flag per row."""
    npat = patterns.shape[0]
    out = np.zeros(npat, dtype=np.uint8)
    ne = edge_var.size
    v2c = np.empty(ne, dtype=np.uint8)
    c2v = np.empty(ne, dtype=np.uint8)
    dec = np.empty(n, dtype=np.uint8)
    y = np.zeros(n, dtype=np.uint8)
    buf = np.empty(1, dtype=np.uint8)
    for i in range(npat):
        w = 0
        for j in range(patterns.shape[1]):
            p = patterns[i, j]
            if p >= 0:
                y[p] = 1
                w += 1
        if w > 0:
            if _zero_syndrome(check_ptr, edge_var, y):
                out[i] = 1
            else:
                out[i] = _gb_frame_error(check_ptr, edge_var, var_ptr, var_edges, y, max_iter,
                                         v2c, c2v, dec, buf)
        for j in range(patterns.shape[1]):
            p = patterns[i, j]
            if p >= 0:
                y[p] = 0
    return out


@nb.njit(cache=True, nogil=True)
def _gb_sparse_frame_error(check_ptr, edge_var, var_ptr, var_edges, var_checks,
                           errs, nerr, max_iter, ws):
    """Event-driven Gallager B for the all-zero codeword.

    Only variables in error or adjacent to a check carrying a nonzero
    message are visited; everything else provably sends and decides 0.
    ``ws`` is a reusable workspace from :func:`gb_workspace`.
    """
    y, v2c, c2v, dec, cstamp, vstamp, hot, stamp_box, checks, cand = ws
    n = y.size
    for i in range(nerr):
        y[errs[i]] = 1
    # hot: variables whose outgoing messages may be nonzero
    nhot = 0
    for i in range(nerr):
        v = errs[i]
        hot[nhot] = v
        nhot += 1
        for k in range(var_ptr[v], var_ptr[v + 1]):
            v2c[var_edges[k]] = 1
    stamp = stamp_box[0]
    failed = True
    for it in range(1, max_iter + 1):
        stamp += 1
        # checks touched by hot variables
        nch = 0
        for i in range(nhot):
            v = hot[i]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                c = var_checks[k]
                if cstamp[c] != stamp:
                    cstamp[c] = stamp
                    checks[nch] = c
                    nch += 1
        for i in range(nch):
            c = checks[i]
            acc = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                acc ^= v2c[e]
            for e in range(check_ptr[c], check_ptr[c + 1]):
                c2v[e] = acc ^ v2c[e]
        # candidates: error positions and neighbours of touched checks
        ncand = 0
        for i in range(nerr):
            v = errs[i]
            if vstamp[v] != stamp:
                vstamp[v] = stamp
                cand[ncand] = v
                ncand += 1
        for i in range(nch):
            c = checks[i]
            for e in range(check_ptr[c], check_ptr[c + 1]):
                v = edge_var[e]
                if vstamp[v] != stamp:
                    vstamp[v] = stamp
                    cand[ncand] = v
                    ncand += 1
        nhot = 0
        for i in range(ncand):
            v = cand[i]
            yv = y[v]
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            dv = hi - lo
            dis = 0
            for k in range(lo, hi):
                e = var_edges[k]
                if cstamp[var_checks[k]] == stamp:
                    msg = c2v[e]
                else:
                    msg = 0
                if msg != yv:
                    dis += 1
            dec[v] = (1 - yv) if 2 * dis > dv + 1 else yv
            anyone = False
            for k in range(lo, hi):
                e = var_edges[k]
                msg = c2v[e] if cstamp[var_checks[k]] == stamp else 0
                others = dis - (1 if msg != yv else 0)
                out = (1 - yv) if (dv > 1 and others == dv - 1) else yv
                v2c[e] = out
                if out:
                    anyone = True
            if anyone:
                hot[nhot] = v
                nhot += 1
        # syndrome of the decision: only checks next to a 1 can be unsatisfied
        ok = True
        anyone_dec = False
        for i in range(ncand):
            v = cand[i]
            if dec[v]:
                anyone_dec = True
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    c = var_checks[k]
                    acc = 0
                    for e in range(check_ptr[c], check_ptr[c + 1]):
                        u = edge_var[e]
                        if vstamp[u] == stamp and dec[u]:
                            acc ^= 1
                    if acc:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            failed = anyone_dec
            # cleanup below
            for i in range(ncand):
                dec[cand[i]] = 0
            break
        for i in range(ncand):
            dec[cand[i]] = 0
    stamp_box[0] = stamp
    # reset workspace
    for i in range(nhot):
        v = hot[i]
        for k in range(var_ptr[v], var_ptr[v + 1]):
            v2c[var_edges[k]] = 0
    for i in range(ncand):
        v = cand[i]
        for k in range(var_ptr[v], var_ptr[v + 1]):
            v2c[var_edges[k]] = 0
    for i in range(nerr):
        v = errs[i]
        y[v] = 0
        for k in range(var_ptr[v], var_ptr[v + 1]):
            v2c[var_edges[k]] = 0
    return failed


def gb_workspace(graph: TannerGraph):
    n, m, ne = graph.n, graph.m, graph.num_edges
    return (np.zeros(n, np.uint8), np.zeros(ne, np.uint8), np.zeros(ne, np.uint8),
            np.zeros(n, np.uint8), np.zeros(m, np.int64), np.zeros(n, np.int64),
            np.zeros(n, np.int64), np.zeros(1, np.int64), np.zeros(m, np.int64),
            np.zeros(n, np.int64))


def kernel_arrays(graph: TannerGraph):
    """Flat arrays consumed by the numba kernels."""
    var_checks = graph.edge_check[graph.var_edges]
    return graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges, var_checks


@nb.njit(cache=True, nogil=True)
def gb_sparse_patterns_fail(check_ptr, edge_var, var_ptr, var_edges, var_checks, patterns, max_iter, ws):
    """Sparse-kernel equivalent of :func:`gb_patterns_fail`."""
    npat = patterns.shape[0]
    out = np.zeros(npat, dtype=np.uint8)
    errs = np.empty(patterns.shape[1], dtype=np.int64)
    y = ws[0]
    for i in range(npat):
        w = 0
        for j in range(patterns.shape[1]):
            if patterns[i, j] >= 0:
                errs[w] = patterns[i, j]
                w += 1
        if w == 0:
            continue
        for j in range(w):
            y[errs[j]] = 1
        zero = _zero_syndrome(check_ptr, edge_var, y)
        for j in range(w):
            y[errs[j]] = 0
        if zero:
            out[i] = 1
        else:
            out[i] = _gb_sparse_frame_error(check_ptr, edge_var, var_ptr, var_edges, var_checks,
                                            errs, w, max_iter, ws)
    return out


# ---------------------------------------------------------------------------
# min-sum


@nb.njit(cache=True, nogil=True)
def _ms_check_update(check_ptr, v2c, c2v):
    m = check_ptr.size - 1
    for c in range(m):
        lo = check_ptr[c]
        hi = check_ptr[c + 1]
        sgn = 1.0
        min1 = np.inf
        min2 = np.inf
        arg = -1
        for e in range(lo, hi):
            x = v2c[e]
            if x < 0:
                sgn = -sgn
            a = abs(x)
            if a < min1:
                min2 = min1
                min1 = a
                arg = e
            elif a < min2:
                min2 = a
        for e in range(lo, hi):
            mag = min2 if e == arg else min1
            s = sgn
            if v2c[e] < 0:
                s = -s
            c2v[e] = s * mag


@nb.njit(cache=True, nogil=True)
def _ms_core(check_ptr, edge_var, var_ptr, var_edges, llr, max_iter, record):
    n = llr.size
    ne = edge_var.size
    v2c = np.empty(ne)
    c2v = np.zeros(ne)
    for e in range(ne):
        v2c[e] = llr[edge_var[e]]
    rows = max_iter + 1 if record else 1
    hist = np.empty((rows, n), dtype=np.uint8)
    dec = np.empty(n, dtype=np.uint8)
    for v in range(n):
        dec[v] = 1 if llr[v] < 0 else 0
    hist[0, :] = dec
    if _zero_syndrome(check_ptr, edge_var, dec):
        return hist[:1], 0, True, v2c, c2v
    for it in range(1, max_iter + 1):
        _ms_check_update(check_ptr, v2c, c2v)
        for v in range(n):
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            tot = llr[v]
            for k in range(lo, hi):
                tot += c2v[var_edges[k]]
            dec[v] = 1 if tot < 0 else 0
            for k in range(lo, hi):
                e = var_edges[k]
                v2c[e] = tot - c2v[e]
        row = it if record else 0
        hist[row, :] = dec
        if _zero_syndrome(check_ptr, edge_var, dec):
            return hist[:row + 1], it, True, v2c, c2v
    return hist, max_iter, False, v2c, c2v


def _llr_input(graph, llr):
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    _check_lengths(graph, llr)
    if not np.all(np.isfinite(llr)):
        raise ValueError("LLR input contains non-finite values")
    return llr


def min_sum_decode(graph: TannerGraph, llr, config: MinSumConfig = MinSumConfig(),
                   transmitted=None) -> DecodeTrace:
    """Plain (unscaled) min-sum on channel LLRs; positive LLR favours bit 0."""
    llr = _llr_input(graph, llr)
    transmitted = (np.zeros(graph.n, dtype=np.uint8) if transmitted is None
                   else np.ascontiguousarray(transmitted, dtype=np.uint8))
    _check_lengths(graph, transmitted)
    hist, _, conv, _, _ = _ms_core(graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges,
                                   llr, config.max_iterations, True)
    return _finish(graph, hist.copy(), transmitted, conv)


def min_sum_messages(graph: TannerGraph, llr, iterations: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(variable->check, check->variable) edge messages after ``iterations``
    full iterations, ignoring the early stop. Indexed by edge id."""
    llr = _llr_input(graph, llr)
    ne = graph.num_edges
    v2c = llr[graph.edge_var].copy()
    c2v = np.zeros(ne)
    for _ in range(iterations):
        _ms_check_update(graph.check_ptr, v2c, c2v)
        tot = llr.copy()
        np.add.at(tot, graph.edge_var, c2v)
        v2c = tot[graph.edge_var] - c2v
    return v2c, c2v


@nb.njit(cache=True, nogil=True)
def ms_frame_error(check_ptr, edge_var, var_ptr, var_edges, llr, max_iter):
    """All-zero transmitted word; True when the frame is not recovered."""
    hist, it, conv, _, _ = _ms_core(check_ptr, edge_var, var_ptr, var_edges, llr, max_iter, False)
    if not conv:
        return True
    for v in range(llr.size):
        if hist[0, v]:
            return True
    return False


def awgn_llr(received, sigma: float) -> np.ndarray:
    """Channel LLRs for BPSK (0 -> +1, 1 -> -1) over AWGN with noise std ``sigma``."""
    return 2.0 * np.asarray(received, dtype=np.float64) / sigma ** 2
