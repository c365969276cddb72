"""
Monte Carlo frame error rates on the BSC and the BI-AWGN channel.

The all-zero codeword is sent. Frames are generated in fixed-size blocks
and block ``j`` of channel point ``p`` draws its noise from a generator
seeded by ``(seed, p, j)``, so every frame's noise is fixed by its index
and results do not depend on how blocks are spread over workers. The stop
rule is evaluated at block boundaries in block order.

BSC error positions are drawn as geometric gaps over the flattened block
(an exact Bernoulli(alpha) process), which keeps low-alpha sweeps cheap.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numba as nb
import numpy as np

from .code import BudgetExceeded, TannerGraph
from .decoders import (GallagerBConfig, MinSumConfig, _gb_sparse_frame_error, _zero_syndrome,
                       gb_workspace, kernel_arrays, ms_frame_error)
from .trapping import DecoderConfig, _failing_patterns

WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class Bsc:
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 0.5:
            raise ValueError(f"BSC crossover probability must be in (0, 0.5), got {self.alpha}")

    kind = "bsc"

    @property
    def param(self) -> float:
        return self.alpha


@dataclass(frozen=True)
class Awgn:
    """BI-AWGN at ``snr`` = Eb/N0 as a linear ratio; ``rate`` converts it to
    the noise level, sigma^2 = 1 / (2 * rate * snr)."""

    snr: float
    rate: float = 1.0

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError(f"SNR must be positive, got {self.snr}")
        if not 0 < self.rate <= 1:
            raise ValueError(f"code rate must be in (0, 1], got {self.rate}")

    kind = "awgn"

    @classmethod
    def from_db(cls, snr_db: float, rate: float = 1.0) -> "Awgn":
        return cls(10.0 ** (snr_db / 10.0), rate)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @property
    def sigma(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.rate * self.snr))

    @property
    def param(self) -> float:
        return self.snr


ChannelSpec = Union[Bsc, Awgn]


@dataclass(frozen=True)
class StopRule:
    max_frames: int = 10 ** 7
    target_failures: int = 100


@dataclass(frozen=True)
class FerPoint:
    channel: ChannelSpec
    frames: int
    failures: int
    seed: int
    decoder: str
    code_id: str = ""

    @property
    def fer(self) -> float:
        return self.failures / self.frames if self.frames else float("nan")

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.frames)

    def row(self) -> dict:
        lo, hi = self.ci95
        return {
            "code_id": self.code_id,
            "decoder": self.decoder,
            "channel_kind": self.channel.kind,
            "channel_param": repr(float(self.channel.param)),
            "frames": self.frames,
            "failures": self.failures,
            "fer": repr(self.fer),
            "ci_low": repr(lo),
            "ci_high": repr(hi),
            "seed": self.seed,
        }


CSV_COLUMNS = ["code_id", "decoder", "channel_kind", "channel_param", "frames", "failures",
               "fer", "ci_low", "ci_high", "seed"]


def points_to_csv(points: Sequence[FerPoint]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def points_from_csv(text: str, rate: float = 1.0) -> list[FerPoint]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        param = float(row["channel_param"])
        ch = Bsc(param) if row["channel_kind"] == "bsc" else Awgn(param, rate)
        out.append(FerPoint(ch, int(row["frames"]), int(row["failures"]), int(row["seed"]),
                            row["decoder"], row["code_id"]))
    return out


def wilson_interval(failures: int, frames: int, z: float = WILSON_Z) -> tuple[float, float]:
    if frames == 0:
        return (0.0, 1.0)
    p = failures / frames
    denom = 1 + z * z / frames
    centre = (p + z * z / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z * z / (4 * frames * frames)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


# ---------------------------------------------------------------------------
# frame kernels


@nb.njit(cache=True, nogil=True)
def _bsc_block_failures(check_ptr, edge_var, var_ptr, var_edges, var_checks, n,
                        frame_start, positions, max_iter, ws):
    """Decode each frame of a block; ``positions[frame_start[f]:frame_start[f+1]]``
    are the flipped bits of frame ``f``. Returns per-frame failure flags."""
    nf = frame_start.size - 1
    out = np.zeros(nf, dtype=np.uint8)
    y = ws[0]
    for f in range(nf):
        lo = frame_start[f]
        hi = frame_start[f + 1]
        if hi == lo:
            continue
        errs = positions[lo:hi]
        for j in range(hi - lo):
            y[errs[j]] = 1
        zero = _zero_syndrome(check_ptr, edge_var, y)
        for j in range(hi - lo):
            y[errs[j]] = 0
        if zero:
            out[f] = 1
        else:
            out[f] = _gb_sparse_frame_error(check_ptr, edge_var, var_ptr, var_edges, var_checks,
                                            errs, hi - lo, max_iter, ws)
    return out


@nb.njit(cache=True, nogil=True)
def _llr_block_failures(check_ptr, edge_var, var_ptr, var_edges, llr, max_iter):
    nf = llr.shape[0]
    out = np.zeros(nf, dtype=np.uint8)
    for f in range(nf):
        out[f] = ms_frame_error(check_ptr, edge_var, var_ptr, var_edges, llr[f], max_iter)
    return out


def _block_rng(seed: int, point: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, block])))


def bsc_block_errors(rng: np.random.Generator, n: int, frames: int, alpha: float):
    """Error positions of ``frames`` BSC frames: (frame_start, positions)."""
    total = n * frames
    expected = total * alpha
    cap = int(expected + 10 * math.sqrt(expected + 1) + 16)
    pos = np.cumsum(rng.geometric(alpha, size=cap)) - 1
    while pos[-1] < total:
        more = np.cumsum(rng.geometric(alpha, size=cap)) + pos[-1]
        pos = np.concatenate([pos, more])
    pos = pos[pos < total]
    frame = pos // n
    starts = np.searchsorted(frame, np.arange(frames + 1))
    return starts.astype(np.int64), (pos % n).astype(np.int64)


def _decode_block(graph_arrays, n, channel, config, rng, frames, ws):
    if isinstance(channel, Bsc):
        starts, pos = bsc_block_errors(rng, n, frames, channel.alpha)
        if isinstance(config, GallagerBConfig):
            return _bsc_block_failures(*graph_arrays, n, starts, pos, config.max_iterations, ws)
        y = np.zeros((frames, n), dtype=np.uint8)
        y[np.repeat(np.arange(frames), np.diff(starts)), pos] = 1
        L = math.log((1 - channel.alpha) / channel.alpha)
        llr = L * (1.0 - 2.0 * y)
        return _llr_block_failures(*graph_arrays[:4], llr, config.max_iterations)
    # AWGN, BPSK 0 -> +1
    sigma = channel.sigma
    received = 1.0 + sigma * rng.standard_normal((frames, n))
    if isinstance(config, MinSumConfig):
        llr = 2.0 * received / sigma ** 2
        return _llr_block_failures(*graph_arrays[:4], llr, config.max_iterations)
    # Gallager B on hard decisions
    hard = received < 0
    starts = np.zeros(frames + 1, dtype=np.int64)
    np.cumsum(hard.sum(axis=1), out=starts[1:])
    pos = np.nonzero(hard)[1].astype(np.int64)
    return _bsc_block_failures(*graph_arrays, n, starts, pos, config.max_iterations, ws)


def simulate_point(graph: TannerGraph, channel: ChannelSpec, config: DecoderConfig = GallagerBConfig(),
                   stop: StopRule = StopRule(), seed: int = 0, point_index: int = 0,
                   block_frames: int = 4096, workers: int = 1, code_id: str = "") -> FerPoint:
    ka = kernel_arrays(graph)
    n = graph.n
    nblocks = max(1, math.ceil(stop.max_frames / block_frames))

    def run(block: int, ws):
        frames = min(block_frames, stop.max_frames - block * block_frames)
        rng = _block_rng(seed, point_index, block)
        flags = _decode_block(ka, n, channel, config, rng, frames, ws)
        return frames, int(flags.sum())

    frames_done = failures = 0
    workers = max(1, workers)
    spaces = [gb_workspace(graph) for _ in range(workers)]
    block = 0
    with ThreadPoolExecutor(workers) as ex:
        while block < nblocks and failures < stop.target_failures:
            batch = list(range(block, min(nblocks, block + workers)))
            results = list(ex.map(run, batch, spaces[:len(batch)]))
            for fr, fa in results:
                # stop rule in block order, later blocks of the batch are discarded
                if failures >= stop.target_failures:
                    break
                frames_done += fr
                failures += fa
            block += len(batch)
    return FerPoint(channel, frames_done, failures, seed, config.name, code_id)


def simulate_fer(graph: TannerGraph, channels: Sequence[ChannelSpec], config: DecoderConfig = GallagerBConfig(),
                 stop: StopRule = StopRule(), seed: int = 0, workers: int = 1,
                 block_frames: int = 4096, code_id: str = "") -> list[FerPoint]:
    return [simulate_point(graph, ch, config, stop, seed, i, block_frames, workers, code_id)
            for i, ch in enumerate(channels)]


# ---------------------------------------------------------------------------
# exact FER by enumeration


@dataclass(frozen=True)
class ExactFer:
    n: int
    counts: tuple[int, ...]  # counts[k] = failing patterns of weight k, k <= cap

    @property
    def cap(self) -> int:
        return len(self.counts) - 1

    @property
    def instanton_size(self) -> Optional[int]:
        for k, c in enumerate(self.counts):
            if c:
                return k
        return None

    def fer(self, alpha):
        """Sum of c_k alpha^k (1 - alpha)^(n - k) over k <= cap; exact when cap == n,
        a lower bound otherwise."""
        a = np.asarray(alpha, dtype=np.float64)
        total = np.zeros_like(a)
        for k, c in enumerate(self.counts):
            if c:
                total = total + c * a ** k * (1 - a) ** (self.n - k)
        return total if total.ndim else float(total)


def exact_fer_bsc(graph: TannerGraph, config: DecoderConfig = GallagerBConfig(), weight_cap: Optional[int] = None,
                  budget: int = 10 ** 8) -> ExactFer:
    """Count failing error patterns of every weight up to ``weight_cap``."""
    n = graph.n
    cap = n if weight_cap is None else min(weight_cap, n)
    total = sum(math.comb(n, k) for k in range(cap + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} patterns up to weight {cap} exceed the budget of {budget}")
    pool = np.arange(n, dtype=np.int64)
    counts = [0]
    for k in range(1, cap + 1):
        counts.append(len(_failing_patterns(graph, pool, k, config)))
    return ExactFer(n, tuple(counts))


# ---------------------------------------------------------------------------
# slopes


class InsufficientPoints(ValueError):
    pass


@dataclass(frozen=True)
class SlopeEstimate:
    domain: str  # "bsc-loglog" or "awgn-linear"
    points_used: int
    slope: float
    intercept: float
    residual: float  # RMS of the fit in natural-log FER
    x: tuple = field(default=(), repr=False)
    y: tuple = field(default=(), repr=False)

    @property
    def instanton_size(self) -> Optional[float]:
        return self.slope if self.domain == "bsc-loglog" else None

    @property
    def omega_in(self) -> Optional[float]:
        return -2.0 * self.slope if self.domain == "awgn-linear" else None

    def as_dict(self) -> dict:
        d = {"domain": self.domain, "points_used": self.points_used, "slope": self.slope,
             "intercept": self.intercept, "residual": self.residual}
        if self.domain == "bsc-loglog":
            d["instanton_size"] = self.slope
        else:
            d["omega_in"] = -2.0 * self.slope
        return d

    def to_json(self, **meta) -> str:
        return json.dumps({**meta, **self.as_dict()}, indent=1)


def fit_slope(points: Sequence[FerPoint], domain: str = "bsc-loglog",
              max_ci_log_width: float = 0.5) -> SlopeEstimate:
    """Least-squares line through ln(FER) against ln(alpha) ("bsc-loglog")
    or against linear Eb/N0 ("awgn-linear").

    Points without failures, or whose Wilson interval spans more than
    ``max_ci_log_width`` in natural log, are left out.
    """
    if domain not in ("bsc-loglog", "awgn-linear"):
        raise ValueError(f"unknown domain {domain!r}")
    xs, ys = [], []
    for p in points:
        if p.failures <= 0:
            continue
        lo, hi = p.ci95
        if lo <= 0 or math.log(hi) - math.log(lo) > max_ci_log_width:
            continue
        x = math.log(p.channel.param) if domain == "bsc-loglog" else p.channel.param
        xs.append(x)
        ys.append(math.log(p.fer))
    if len(xs) < 2:
        raise InsufficientPoints(f"need at least 2 usable points with failures, got {len(xs)}")
    x, y = np.array(xs), np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeEstimate(domain, len(xs), float(slope), float(intercept), resid, tuple(xs), tuple(ys))
