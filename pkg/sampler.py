#!/usr/bin/env python3
"""
Acceptability filtering and corpus sampling of generated candidates.

Two constraints are applied before sampling: the sentence must start with
an Arabic token and at most max_en_fraction of its tokens may be English.
Candidates without any switch point are dropped as well.

Sampling is either uniform ("random") or stratified by switch-point count
("spf") against a target histogram such as {"1": 0.45, "2": 0.3, "3": 0.15, "4+": 0.1};
a "N+" key collects every count >= N.
"""

import io
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from corpus_io import LANG_AR
import cs_metrics

logger = logging.getLogger(__name__)

SAMPLING_METHODS = ('random', 'spf')
DEFAULT_SPF_TARGET = {'1': 0.45, '2': 0.30, '3': 0.15, '4+': 0.10}
DEFAULT_SPF_TARGET_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config', 'spf_target.json')


def _parse_bucket_key(key):
    """'3' -> (3, False); '4+' -> (4, True)."""
    text = str(key).strip()
    open_ended = text.endswith('+')
    number = text[:-1] if open_ended else text
    if not number.isdigit():
        raise ValueError(f"Invalid switch-point bucket {key!r}, expected an integer or 'N+'")
    return int(number), open_ended


def normalize_spf_target(target):
    """Validate a histogram and return it with string keys."""
    if not target:
        raise ValueError("spf_target must not be empty")
    out = {}
    for key, weight in target.items():
        _parse_bucket_key(key)
        weight = float(weight)
        if weight < 0 or math.isnan(weight):
            raise ValueError(f"spf_target weight for {key!r} must be non-negative, got {weight}")
        out[str(key).strip()] = weight
    total = math.fsum(out.values())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"spf_target weights must sum to 1, got {total}")
    open_ended = [k for k in out if k.endswith('+')]
    if len(open_ended) > 1:
        raise ValueError(f"spf_target may have at most one 'N+' bucket, got {open_ended}")
    return out


def load_spf_target(path=DEFAULT_SPF_TARGET_PATH):
    with io.open(path, 'r', encoding='utf-8') as f:
        return normalize_spf_target(json.load(f))


@dataclass(frozen=True)
class SamplerConfig:
    method: str = 'spf'
    k: int = 1000
    seed: int = 0
    max_en_fraction: float = 0.45
    require_ar_initial: bool = True
    spf_target: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPF_TARGET))

    def __post_init__(self):
        if self.method not in SAMPLING_METHODS:
            raise ValueError(f"Unknown sampling method {self.method!r}, expected one of {SAMPLING_METHODS}")
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not 0 < self.max_en_fraction < 1:
            raise ValueError(f"max_en_fraction must be in (0, 1), got {self.max_en_fraction}")
        object.__setattr__(self, 'spf_target', normalize_spf_target(self.spf_target))


def violations(candidate, cfg):
    """Names of the constraints a candidate breaks, in check order."""
    out = []
    if cfg.require_ar_initial and candidate.tokens[0].lang != LANG_AR:
        out.append('not_arabic_initial')
    if cs_metrics.en_fraction(candidate.tokens) > cfg.max_en_fraction:
        out.append('too_much_english')
    if candidate.switch_points == 0:
        out.append('monolingual')
    return out


def filter_constraints(candidates, cfg, stats=None):
    """Keep acceptable candidates in input order; stats (a Counter) receives one count per dropped candidate."""
    kept = []
    for candidate in candidates:
        broken = violations(candidate, cfg)
        if broken:
            if stats is not None:
                stats[broken[0]] += 1
            continue
        kept.append(candidate)
    return kept


def sample_random(candidates, cfg):
    candidates = list(candidates)
    if cfg.k >= len(candidates):
        return candidates
    rng = np.random.default_rng(cfg.seed)
    chosen = np.sort(rng.choice(len(candidates), size=cfg.k, replace=False))
    return [candidates[i] for i in chosen]


def bucket_of(switch_points, target):
    """Target bucket for a switch-point count, or None when the target does not cover it."""
    key = str(switch_points)
    if key in target:
        return key
    for bucket in target:
        number, open_ended = _parse_bucket_key(bucket)
        if open_ended and switch_points >= number:
            return bucket
    return None


def _largest_remainder(total, weights):
    """Split an integer total by weights; ties on the remainder go to the earlier key."""
    weight_sum = math.fsum(weights.values())
    if total <= 0 or weight_sum <= 0:
        return {key: 0 for key in weights}
    exact = {key: total * w / weight_sum for key, w in weights.items()}
    quotas = {key: int(math.floor(v)) for key, v in exact.items()}
    left = total - sum(quotas.values())
    order = sorted(weights, key=lambda key: (-(exact[key] - quotas[key]), list(weights).index(key)))
    for key in order[:left]:
        quotas[key] += 1
    return quotas


def spf_quotas(k, target, capacity):
    """Per-bucket sample sizes.

    The first split follows the target weights; whatever a bucket cannot supply
    is handed to the buckets that still have spare capacity, in proportion to
    their target weights and never past what a bucket holds.
    """
    quotas = {key: min(n, capacity.get(key, 0)) for key, n in _largest_remainder(k, target).items()}
    deficit = k - sum(quotas.values())
    while deficit > 0:
        spare = {key: capacity.get(key, 0) - quotas[key] for key in quotas
                 if target[key] > 0 and capacity.get(key, 0) > quotas[key]}
        if not spare:
            break
        extra = _largest_remainder(deficit, {key: target[key] for key in spare})
        for key, n in extra.items():
            quotas[key] += min(n, spare[key])
        deficit = k - sum(quotas.values())
    return quotas, deficit


def sample_spf(candidates, cfg, stats=None):
    """Stratified sample; every returned candidate carries its bucket id."""
    candidates = list(candidates)
    target = cfg.spf_target
    buckets = {key: [] for key in target}
    uncovered = 0
    for index, candidate in enumerate(candidates):
        key = bucket_of(candidate.switch_points, target)
        if key is None:
            uncovered += 1
            continue
        buckets[key].append(index)

    capacity = {key: len(members) for key, members in buckets.items()}
    quotas, shortfall = spf_quotas(cfg.k, target, capacity)
    if shortfall:
        logger.warning(f"SPF sampling: {shortfall} of {cfg.k} requested candidates could not be supplied")
    if stats is not None:
        stats['spf_shortfall'] += shortfall
        stats['spf_uncovered'] += uncovered

    rng = np.random.default_rng(cfg.seed)
    chosen = []
    for key in sorted(target, key=_parse_bucket_key):
        members = buckets[key]
        quota = quotas[key]
        if quota == 0:
            continue
        picks = rng.choice(len(members), size=quota, replace=False)
        chosen.extend((members[i], key) for i in picks)

    chosen.sort()
    return [candidates[index].with_bucket(key) for index, key in chosen]


def sample(candidates, cfg, stats=None):
    """Filter and then sample with cfg.method. Returns (sample, stats Counter)."""
    candidates = list(candidates)
    stats = stats if stats is not None else Counter()
    kept = filter_constraints(candidates, cfg, stats)
    stats['candidates_in'] += len(candidates)
    stats['candidates_kept'] += len(kept)
    if cfg.method == 'random':
        out = sample_random(kept, cfg)
    else:
        out = sample_spf(kept, cfg, stats)
    stats['sampled'] += len(out)
    for candidate in out:
        if violations(candidate, cfg):
            raise RuntimeError(f"Sampled candidate from pair {candidate.source_pair_id} breaks a constraint")
    return out, stats
