import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from conftest import column_regular, fig1a_graph
from test_decoders import gallager_b_reference
from tscover.code import BudgetExceeded
from tscover.decoders import GallagerBConfig, MinSumConfig
from tscover.sim import (CSV_COLUMNS, Awgn, Bsc, FerPoint, InsufficientPoints, StopRule, _block_rng,
                         bsc_block_errors, exact_fer_bsc, fit_slope, points_from_csv, points_to_csv,
                         simulate_fer, simulate_point, wilson_interval)


@given(st.integers(1, 10 ** 6), st.data())
def test_wilson_matches_statsmodels(frames, data):
    failures = data.draw(st.integers(0, frames))
    lo, hi = wilson_interval(failures, frames)
    elo, ehi = proportion_confint(failures, frames, alpha=0.05, method="wilson")
    assert lo == pytest.approx(elo, abs=1e-12) and hi == pytest.approx(ehi, abs=1e-12)


def test_channel_parameters():
    ch = Awgn.from_db(3.0, 0.5)
    assert ch.snr == pytest.approx(10 ** 0.3)
    assert ch.sigma ** 2 == pytest.approx(1 / (2 * 0.5 * 10 ** 0.3))
    assert ch.snr_db == pytest.approx(3.0)
    with pytest.raises(ValueError):
        Bsc(0.7)
    with pytest.raises(ValueError):
        Awgn(-1.0)


def test_bsc_error_process_is_bernoulli():
    n, frames, alpha = 31, 20000, 0.05
    starts, pos = bsc_block_errors(_block_rng(7, 0, 0), n, frames, alpha)
    weights = np.diff(starts)
    # per-frame weight ~ Binomial(n, alpha)
    ks = np.arange(6)
    observed = np.array([np.sum(weights == k) for k in ks[:-1]] + [np.sum(weights >= 5)])
    pmf = stats.binom.pmf(ks[:-1], n, alpha)
    expected = frames * np.append(pmf, 1 - pmf.sum())
    assert stats.chisquare(observed, expected).pvalue > 1e-3
    # positions uniform and strictly increasing within a frame
    assert stats.chisquare(np.bincount(pos, minlength=n)).pvalue > 1e-3
    for f in range(100):
        seg = pos[starts[f]:starts[f + 1]]
        assert np.all(np.diff(seg) > 0)


def test_results_do_not_depend_on_workers(tanner):
    g = tanner.graph
    stop = StopRule(200000, 30)
    one = simulate_point(g, Bsc(0.02), stop=stop, seed=5, block_frames=1024, workers=1)
    three = simulate_point(g, Bsc(0.02), stop=stop, seed=5, block_frames=1024, workers=3)
    assert (one.frames, one.failures) == (three.frames, three.failures)
    assert one.failures >= 30 and one.frames % 1024 == 0


def test_stop_rule_caps_frames(tanner):
    p = simulate_point(tanner.graph, Bsc(0.001), stop=StopRule(5000, 100), block_frames=1024)
    assert p.frames == 5000


def test_other_decoder_channel_pairs(tanner):
    g = tanner.graph
    rate = 64 / 155
    for ch, cfg in [(Bsc(0.03), MinSumConfig(30)), (Awgn.from_db(2.0, rate), GallagerBConfig()),
                    (Awgn.from_db(2.0, rate), MinSumConfig(30))]:
        p = simulate_point(g, ch, cfg, StopRule(2048, 10), block_frames=512)
        assert 0 < p.frames <= 2048 and p.decoder == cfg.name


def test_min_sum_beats_hard_decision_on_awgn(tanner):
    ch = Awgn.from_db(3.0, 64 / 155)
    stop = StopRule(4096, 10 ** 6)
    gb = simulate_point(tanner.graph, ch, GallagerBConfig(), stop, seed=1)
    ms = simulate_point(tanner.graph, ch, MinSumConfig(50), stop, seed=1)
    assert ms.ci95[1] < gb.ci95[0]


# ---------------------------------------------------------------------------
# exact FER


@settings(max_examples=20)
@given(column_regular(n_min=6, n_max=11))
def test_exact_counts_match_enumeration(H):
    counts = [0] * (H.n + 1)
    for bits in itertools.product((0, 1), repeat=H.n):
        hist, conv = gallager_b_reference(H, bits, 50)
        if not conv or any(hist[-1]):
            counts[sum(bits)] += 1
    assert list(exact_fer_bsc(H.graph).counts) == counts


def test_exact_fer_polynomial():
    ex = exact_fer_bsc(fig1a_graph().graph)
    a = 0.1
    direct = sum(c * a ** k * (1 - a) ** (5 - k) for k, c in enumerate(ex.counts))
    assert ex.fer(a) == pytest.approx(direct)
    assert ex.fer(np.array([a, a])).tolist() == pytest.approx([direct, direct])
    # only the diagonal triple fails at weight 3
    assert ex.counts[:4] == (0, 0, 0, 1) and ex.instanton_size == 3


def test_exact_budget(tanner):
    with pytest.raises(BudgetExceeded):
        exact_fer_bsc(tanner.graph, budget=10 ** 6)
    assert exact_fer_bsc(tanner.graph, weight_cap=3).instanton_size == 3


# ---------------------------------------------------------------------------
# slopes and export


def synthetic_bsc(i, c, alphas, frames=10 ** 13):
    return [FerPoint(Bsc(a), frames, round(c * a ** i * frames), 0, "gallager-b") for a in alphas]


@pytest.mark.parametrize("i", [3, 4, 5])
def test_fit_slope_recovers_power_law(i):
    est = fit_slope(synthetic_bsc(i, 155.0, [1e-3, 2e-3, 4e-3, 8e-3]))
    assert est.slope == pytest.approx(i, rel=0.01)
    assert est.instanton_size == est.slope and est.residual < 1e-3


def test_fit_slope_awgn_linear():
    omega = 14.0
    snrs = [2.0, 2.5, 3.0, 3.5]
    frames = 10 ** 13
    pts = [FerPoint(Awgn(s), frames, round(0.5 * math.exp(-omega * s / 2) * frames), 0, "min-sum")
           for s in snrs]
    est = fit_slope(pts, "awgn-linear")
    assert est.omega_in == pytest.approx(omega, rel=0.01)
    assert est.as_dict()["omega_in"] == est.omega_in


def test_fit_slope_filters_noisy_points():
    pts = synthetic_bsc(3, 155.0, [1e-3, 2e-3])
    pts.append(FerPoint(Bsc(4e-3), 1000, 3, 0, "gallager-b"))  # wide interval, dropped
    pts.append(FerPoint(Bsc(5e-3), 1000, 0, 0, "gallager-b"))  # no failures, dropped
    assert fit_slope(pts).points_used == 2
    with pytest.raises(InsufficientPoints):
        fit_slope(pts[2:])
    with pytest.raises(ValueError):
        fit_slope(pts, "semilog")


def test_csv_round_trip():
    pts = [FerPoint(Bsc(0.01), 1000, 7, 3, "gallager-b", "tanner"),
           FerPoint(Bsc(0.005), 5000, 2, 3, "gallager-b", "tanner")]
    text = points_to_csv(pts)
    assert text.splitlines()[0].split(",") == CSV_COLUMNS
    assert points_from_csv(text) == pts


def test_simulate_fer_points_are_seeded(tanner):
    chans = [Bsc(0.03), Bsc(0.02)]
    a = simulate_fer(tanner.graph, chans, stop=StopRule(4096, 20), seed=9, block_frames=512)
    b = simulate_fer(tanner.graph, chans, stop=StopRule(4096, 20), seed=9, block_frames=512)
    assert points_to_csv(a) == points_to_csv(b)
