from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from corpus_io import LANG_AR, LANG_EN, Token
from generator import CSCandidate
from sampler import (DEFAULT_SPF_TARGET, SamplerConfig, bucket_of, filter_constraints, load_spf_target,
                     normalize_spf_target, sample, sample_random, sample_spf, spf_quotas, violations)


def candidate(langs, pair_id='1'):
    return CSCandidate(tuple(Token(f"w{k}", lang) for k, lang in enumerate(langs)), pair_id)


def with_switches(switches, pair_id='1'):
    """Arabic-initial sentence with the given number of switches, two Arabic words per Arabic run"""
    langs = []
    for run in range(switches + 1):
        langs.extend([LANG_AR, LANG_AR] if run % 2 == 0 else [LANG_EN])
    return candidate(langs, pair_id)


def synthetic_pool(size, seed):
    rng = np.random.default_rng(seed)
    return [with_switches(int(s), str(k)) for k, s in enumerate(rng.integers(1, 7, size=size))]


def test_violations_in_check_order():
    cfg = SamplerConfig()
    assert violations(candidate([LANG_EN, LANG_AR, LANG_AR]), cfg) == ['not_arabic_initial']
    assert violations(candidate([LANG_AR, LANG_EN]), cfg) == ['too_much_english']
    assert violations(candidate([LANG_AR, LANG_AR]), cfg) == ['monolingual']
    assert violations(with_switches(3), cfg) == []


def test_en_fraction_bound_is_inclusive():
    # 9 of 20 tokens English is exactly 0.45
    langs = [LANG_AR] * 11 + [LANG_EN] * 9
    assert violations(candidate(langs), SamplerConfig()) == []
    assert violations(candidate([LANG_AR] * 10 + [LANG_EN] * 10), SamplerConfig()) == ['too_much_english']


def test_filter_counts_first_violation():
    stats = Counter()
    pool = [candidate([LANG_EN, LANG_EN]), candidate([LANG_AR]), with_switches(1)]
    kept = filter_constraints(pool, SamplerConfig(), stats)
    assert kept == [pool[2]]
    assert stats == Counter({'not_arabic_initial': 1, 'monolingual': 1})


def test_random_sampling_is_seeded_and_ordered():
    pool = synthetic_pool(200, 1)
    first = sample_random(pool, SamplerConfig(method='random', k=20, seed=5))
    again = sample_random(pool, SamplerConfig(method='random', k=20, seed=5))
    other = sample_random(pool, SamplerConfig(method='random', k=20, seed=6))
    assert first == again
    assert first != other
    positions = [pool.index(c) for c in first]
    assert positions == sorted(positions)
    assert sample_random(pool[:5], SamplerConfig(method='random', k=20)) == pool[:5]


def test_random_sampling_is_uniform_over_candidates():
    pool = [with_switches(1, str(k)) for k in range(100)]
    picks = Counter()
    for seed in range(10000):
        (chosen,) = sample_random(pool, SamplerConfig(method='random', k=1, seed=seed))
        picks[chosen.source_pair_id] += 1
    assert len(picks) == 100
    for count in picks.values():
        assert 0.005 <= count / 10000 <= 0.015


def test_random_sampling_keeps_everything_when_k_covers_the_pool():
    pool = synthetic_pool(30, 7)
    assert sample_random(pool, SamplerConfig(method='random', k=30, seed=2)) == pool
    assert sample_random(pool, SamplerConfig(method='random', k=1000, seed=2)) == pool


def test_bucket_of_open_ended_bucket():
    assert bucket_of(1, DEFAULT_SPF_TARGET) == '1'
    assert bucket_of(4, DEFAULT_SPF_TARGET) == '4+'
    assert bucket_of(9, DEFAULT_SPF_TARGET) == '4+'
    assert bucket_of(0, DEFAULT_SPF_TARGET) is None


def test_quotas_follow_target_when_capacity_allows():
    quotas, deficit = spf_quotas(1000, DEFAULT_SPF_TARGET, {'1': 5000, '2': 5000, '3': 5000, '4+': 5000})
    assert quotas == {'1': 450, '2': 300, '3': 150, '4+': 100}
    assert deficit == 0


def test_quota_shortfall_moves_to_buckets_with_spare_capacity():
    quotas, deficit = spf_quotas(100, DEFAULT_SPF_TARGET, {'1': 10, '2': 1000, '3': 1000, '4+': 0})
    assert deficit == 0
    assert sum(quotas.values()) == 100
    assert quotas['1'] == 10 and quotas['4+'] == 0
    assert quotas['2'] > 30 and quotas['3'] > 15


def test_quota_shortfall_follows_target_weights():
    quotas, deficit = spf_quotas(200, DEFAULT_SPF_TARGET, {'1': 1000, '2': 100, '3': 0, '4+': 100})
    # 30 missing from bucket 3, split 0.45 : 0.30 : 0.10
    assert quotas == {'1': 106, '2': 71, '3': 0, '4+': 23}
    assert deficit == 0


def test_quota_shortfall_respects_spare_capacity():
    quotas, deficit = spf_quotas(200, DEFAULT_SPF_TARGET, {'1': 1000, '2': 62, '3': 0, '4+': 100})
    assert quotas['2'] == 62
    assert sum(quotas.values()) == 200
    assert deficit == 0


def test_quota_deficit_when_pool_too_small():
    quotas, deficit = spf_quotas(100, DEFAULT_SPF_TARGET, {'1': 5, '2': 5, '3': 5, '4+': 5})
    assert quotas == {'1': 5, '2': 5, '3': 5, '4+': 5}
    assert deficit == 80


def test_zero_weight_bucket_never_sampled():
    target = {'1': 0.5, '2': 0.5, '3': 0.0}
    quotas, _ = spf_quotas(10, target, {'1': 2, '2': 2, '3': 100})
    assert quotas['3'] == 0


def test_spf_sample_tags_buckets_and_reports_shortfall():
    pool = synthetic_pool(300, 2)
    stats = Counter()
    out = sample_spf(pool, SamplerConfig(k=100, seed=3), stats)
    assert len(out) == 100
    assert all(c.bucket == bucket_of(c.switch_points, DEFAULT_SPF_TARGET) for c in out)
    assert stats['spf_shortfall'] == 0

    small = Counter()
    assert len(sample_spf(pool[:10], SamplerConfig(k=100), small)) == 10
    assert small['spf_shortfall'] == 90


def test_spf_histogram_matches_target_across_seeds():
    pool = synthetic_pool(50000, 11)
    target = DEFAULT_SPF_TARGET
    order = ['1', '2', '3', '4+']
    passing = 0
    for seed in range(20):
        out, _ = sample(pool, SamplerConfig(method='spf', k=1000, seed=seed))
        observed = Counter(bucket_of(c.switch_points, target) for c in out)
        _, p_value = chisquare([observed[b] for b in order], [1000 * target[b] for b in order])
        if p_value > 0.01:
            passing += 1
    assert passing >= 18


def test_sampled_output_always_satisfies_constraints():
    rng = np.random.default_rng(4)
    pool = []
    for k in range(3000):
        langs = [LANG_AR if rng.random() < 0.6 else LANG_EN for _ in range(int(rng.integers(1, 10)))]
        pool.append(candidate(langs, str(k)))
    for method in ('random', 'spf'):
        out, stats = sample(pool, SamplerConfig(method=method, k=500, seed=1))
        assert out
        for c in out:
            assert c.tokens[0].lang == LANG_AR
            assert sum(t.lang == LANG_EN for t in c.tokens) / len(c.tokens) <= 0.45
        dropped = stats['not_arabic_initial'] + stats['too_much_english'] + stats['monolingual']
        assert stats['candidates_in'] == 3000
        assert stats['candidates_kept'] == 3000 - dropped


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(k=0)
    with pytest.raises(ValueError):
        SamplerConfig(method='greedy')
    with pytest.raises(ValueError, match='sum to 1'):
        normalize_spf_target({'1': 0.5})
    with pytest.raises(ValueError):
        normalize_spf_target({'one': 1.0})
    with pytest.raises(ValueError, match="at most one 'N\\+'"):
        normalize_spf_target({'1+': 0.5, '2+': 0.5})


def test_default_target_file():
    assert load_spf_target() == DEFAULT_SPF_TARGET
