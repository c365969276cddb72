"""Trapping-set elimination for LDPC codes by graph covers."""

from ._version import __version__

from .code import (AlistError, BudgetExceeded, CodeProfile, SparseBitMatrix, TannerGraph, code_profile,
                   gf2_rank, girth, min_distance_bruteforce, parse_alist, read_alist, save_alist,
                   write_alist)
from .cover import (CoverCode, SwapPlan, build_cover, eliminate_trapping_sets, set_survives,
                    unwrap_convolutional, verify_distance_theorem, verify_elimination,
                    verify_rate_theorem)
from .data import bundled_codes, load_code
from .decoders import (DecodeTrace, GallagerBConfig, MinSumConfig, Outcome, gallager_b_decode,
                       min_sum_decode)
from .sim import Awgn, Bsc, FerPoint, StopRule, exact_fer_bsc, fit_slope, simulate_fer
from .trapping import (TrappingSetRecord, critical_number, instanton_search,
                       restricted_instanton_search, topological_ts_scan)
