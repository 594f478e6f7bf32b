"""
Testes das estatísticas de negação plausível e da varredura de ε
"""
import math

import numpy as np
import pytest
from scipy import stats

from src.models.data_models import DeniabilityStats, SweepResult
from src.models.errors import ConfigurationError
from src.services.calibration_service import (
    CalibrationService,
    entropy_proxies,
    eta_support,
    renyi_entropy,
    select_epsilon,
    worst_case_summary,
)
from src.services.noise_sampler import RandomStream


# ---------------------------------------------------------------------------
# Funções puras
# ---------------------------------------------------------------------------

def test_eta_support_examples():
    counts = np.array([50, 30, 15, 5])
    assert eta_support(counts, 0.0) == 4
    assert eta_support(counts, 0.05) == 3
    assert eta_support(counts, 0.2) == 2
    assert eta_support(counts, 0.5) == 1


def test_eta_support_single_output():
    assert eta_support(np.array([1000]), 0.01) == 1


def test_entropy_proxies():
    s = DeniabilityStats(word="a", epsilon=1.0, runs=100, unchanged_count=25, distinct_outputs=8)
    proxies = entropy_proxies(s)
    assert proxies.h0 == pytest.approx(math.log(8))
    assert proxies.h_inf == pytest.approx(math.log(4))
    assert proxies.clamped is False
    assert s.unchanged_frequency == pytest.approx(0.25)


def test_entropy_proxies_clamped_when_never_unchanged():
    s = DeniabilityStats(word="a", epsilon=1.0, runs=100, unchanged_count=0, distinct_outputs=40)
    proxies = entropy_proxies(s)
    assert proxies.clamped is True
    assert proxies.h_inf == pytest.approx(math.log(100))


def test_renyi_entropy_uniform_is_log_support():
    counts = [10, 10, 10, 10]
    for alpha in (0, 0.5, 1, 2, math.inf):
        assert renyi_entropy(counts, alpha) == pytest.approx(math.log(4))


def test_renyi_entropy_is_non_increasing_in_alpha():
    counts = [70, 20, 5, 5]
    values = [renyi_entropy(counts, alpha) for alpha in (0, 0.5, 1, 2, 5, math.inf)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(-math.log(0.7))


def test_renyi_entropy_rejects_empty():
    with pytest.raises(ConfigurationError):
        renyi_entropy([0, 0], 1)


def test_stats_invariants_enforced():
    with pytest.raises(ConfigurationError):
        DeniabilityStats(word="a", epsilon=1.0, runs=10, unchanged_count=11, distinct_outputs=1)
    with pytest.raises(ConfigurationError):
        DeniabilityStats(word="a", epsilon=1.0, runs=10, unchanged_count=1, distinct_outputs=0)


def test_stats_dict_roundtrip():
    s = DeniabilityStats(
        word="a", epsilon=2.0, runs=10, unchanged_count=4, distinct_outputs=3,
        eta_support=2, eta=0.1, top_outputs=[("a", 4), ("b", 3)],
    )
    assert DeniabilityStats.from_dict(s.to_dict()) == s


# ---------------------------------------------------------------------------
# Estimativas
# ---------------------------------------------------------------------------

def test_estimate_stats_bounds(toy3_model):
    service = CalibrationService(toy3_model)
    s = service.estimate_stats(1.0, "a", 500, RandomStream(4))
    assert 0 <= s.unchanged_count <= 500
    assert 1 <= s.distinct_outputs <= 3
    assert s.eta_support <= s.distinct_outputs
    assert sum(c for _, c in s.top_outputs) == 500


def test_estimate_stats_far_words_never_move(far_pair_model):
    s = CalibrationService(far_pair_model).estimate_stats(100.0, "a", 1000, RandomStream(0))
    assert s.unchanged_count == 1000
    assert s.distinct_outputs == 1
    assert entropy_proxies(s).h0 == 0.0


def test_tiny_epsilon_reaches_every_word(circle_model):
    s = CalibrationService(circle_model).estimate_stats(0.001, "c0", 1000, RandomStream(17))
    assert s.distinct_outputs == 5
    assert entropy_proxies(s).h0 == pytest.approx(math.log(5))
    assert 100 <= s.unchanged_count <= 300


def test_more_runs_extend_the_same_sequence(toy3_model):
    # Com a mesma seed, R' > R execuções contêm as R primeiras
    service = CalibrationService(toy3_model)
    small = service.estimate_stats(0.5, "a", 300, RandomStream(10, (0, 0)))
    large = service.estimate_stats(0.5, "a", 900, RandomStream(10, (0, 0)))
    assert large.unchanged_count >= small.unchanged_count
    assert large.distinct_outputs >= small.distinct_outputs


def test_sweep_single_point(toy3_model):
    sweep = CalibrationService(toy3_model).sweep([2.0], ["a"], runs=10, seed=0)
    assert len(sweep.stats) == 1
    assert sweep.stats[0].runs == 10
    assert sweep.sample_size == 1


def test_sweep_skips_unknown_words(toy3_model):
    sweep = CalibrationService(toy3_model).sweep([1.0, 2.0], ["a", "zzz"], runs=50, seed=0)
    assert sweep.words == ["a"]
    assert len(sweep.stats) == 2


def test_sweep_deterministic_and_worker_independent(toy3_model):
    serial = CalibrationService(toy3_model, workers=1).sweep([0.5, 2.0], ["a", "b", "c"], runs=200, seed=5)
    parallel = CalibrationService(toy3_model, workers=3).sweep([0.5, 2.0], ["a", "b", "c"], runs=200, seed=5)
    assert [s.to_dict() for s in serial.stats] == [s.to_dict() for s in parallel.stats]


def test_sweep_histograms_cover_all_words(toy3_model):
    sweep = CalibrationService(toy3_model).sweep([1.0], ["a", "b", "c"], runs=100, seed=1, bins=5)
    hist = sweep.histograms[1.0]['unchanged_count']
    assert hist.total == 3
    assert len(hist.edges) == 6


def test_sweep_rejects_bad_grid(toy3_model):
    with pytest.raises(ConfigurationError):
        CalibrationService(toy3_model).sweep([], ["a"], runs=10, seed=0)
    with pytest.raises(ConfigurationError):
        CalibrationService(toy3_model).sweep([0.0], ["a"], runs=10, seed=0)


def test_sample_words_is_reproducible(random_model):
    service = CalibrationService(random_model)
    first = service.sample_words(50, seed=3)
    assert first == service.sample_words(50, seed=3)
    assert len(set(first)) == 50
    assert service.sample_words(1000, seed=3) == list(random_model.words)


def test_worst_case_summary_and_selection():
    stats_list = [
        DeniabilityStats("a", 1.0, 100, 5, 60),
        DeniabilityStats("b", 1.0, 100, 10, 40),
        DeniabilityStats("a", 5.0, 100, 50, 12),
        DeniabilityStats("b", 5.0, 100, 70, 8),
    ]
    sweep = SweepResult(epsilons=[1.0, 5.0], stats=stats_list, runs=100, sample_size=2, seed=0)
    summaries = worst_case_summary(sweep)

    assert summaries[0].min_distinct == 40
    assert summaries[0].max_unchanged == 10
    assert summaries[1].max_unchanged_frequency == pytest.approx(0.7)
    assert summaries[1].mean_distinct == pytest.approx(10.0)

    assert select_epsilon(summaries, min_support=10) == 1.0
    assert select_epsilon(summaries, min_support=5, max_unchanged=80) == 5.0
    assert select_epsilon(summaries, min_support=100) is None


def test_deniability_trade_off_is_monotone(grid_model):
    service = CalibrationService(grid_model)
    words = service.sample_words(50, seed=17)
    epsilons = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0]
    sweep = service.sweep(epsilons, words, runs=1000, seed=17)
    summaries = worst_case_summary(sweep)

    mean_unchanged = [s.mean_unchanged_frequency for s in summaries]
    mean_distinct = [s.mean_distinct for s in summaries]

    assert stats.spearmanr(epsilons, mean_unchanged).correlation >= 0.9
    assert stats.spearmanr(epsilons, mean_distinct).correlation <= -0.9


@pytest.mark.network
@pytest.mark.slow
def test_glove_worst_case_at_epsilon_five(glove_path):
    from src.services.embedding_store import load_text_embeddings

    model = load_text_embeddings(glove_path)
    service = CalibrationService(model, workers=4)
    words = service.sample_words(1000, seed=0)
    summary = worst_case_summary(service.sweep([5.0], words, runs=1000, seed=0))[0]

    assert summary.min_distinct >= 300
    assert summary.max_unchanged <= 500
