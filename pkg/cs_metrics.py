"""
Code-switching metrics over language-tagged token sequences.

A sequence may be given as Tokens, as tag strings ("AR", "EN"), or as a
whitespace-separated tag string.
"""

import math
from collections import Counter
from statistics import StatisticsError, mean, pstdev

from corpus_io import LANG_EN, LANGS


def _tags(x):
    if isinstance(x, str):
        x = x.split()
    return [getattr(i, 'lang', i) for i in x if getattr(i, 'lang', i) in LANGS]


def switch_points(x):
    """Number of adjacent pairs whose languages differ."""
    tags = _tags(x)
    return sum(1 for l_i, l_j in zip(tags, tags[1:]) if l_i != l_j)


def i_index(x):
    """Switch points per token boundary (the switch point fraction)."""
    tags = _tags(x)
    return switch_points(tags) / max(1, len(tags) - 1)


def en_fraction(x):
    tags = _tags(x)
    if not tags:
        return 0.0
    return sum(1 for t in tags if t == LANG_EN) / len(tags)


def cmi(x):
    """Code-mixing index in [0, 50] for two languages: 100 * (1 - max_lang / n)."""
    tags = _tags(x)
    c = Counter(tags)
    if len(c) <= 1:
        return 0.0
    max_wi = c.most_common(1)[0][1]
    return 100.0 * (1.0 - max_wi / len(tags))


def m_index(x, k=len(LANGS)):
    tags = _tags(x)
    c = Counter(tags)
    total = sum(c.values())
    if total == 0:
        return 0.0
    term = sum((v / total) ** 2 for v in c.values())
    return (1 - term) / ((k - 1) * term)


def lang_entropy(x):
    tags = _tags(x)
    c = Counter(tags)
    total = sum(c.values())
    return -sum((v / total) * math.log2(v / total) for v in c.values()) if total else 0.0


def burstiness(x):
    """(sigma - mu) / (sigma + mu) over same-language span lengths; None for fewer than two spans."""
    tags = _tags(x)
    if not tags:
        return None
    spans = []
    cnt = 1
    for prev, cur in zip(tags, tags[1:]):
        if cur == prev:
            cnt += 1
        else:
            spans.append(cnt)
            cnt = 1
    spans.append(cnt)
    if len(spans) < 2:
        return None
    try:
        span_std = pstdev(spans)
        span_mean = mean(spans)
    except StatisticsError:
        return None
    return (span_std - span_mean) / (span_std + span_mean)


def sentence_metrics(tokens):
    return {
        'tokens': len(tokens),
        'switch_points': switch_points(tokens),
        'i_index': i_index(tokens),
        'en_fraction': en_fraction(tokens),
        'cmi': cmi(tokens),
    }


def corpus_summary(sentences):
    """Aggregate metrics over an iterable of token sequences.

    Returns a JSON-ready dict; the switch point histogram is keyed by the count as a string.
    """
    sentences = list(sentences)
    if not sentences:
        return {'sentences': 0, 'tokens': 0, 'switch_point_histogram': {},
                'mean_switch_points': 0.0, 'mean_i_index': 0.0, 'mean_cmi': 0.0, 'mean_en_fraction': 0.0,
                'code_switched_sentences': 0}
    rows = [sentence_metrics(s) for s in sentences]
    histogram = Counter(r['switch_points'] for r in rows)
    return {
        'sentences': len(rows),
        'tokens': sum(r['tokens'] for r in rows),
        'switch_point_histogram': {str(k): histogram[k] for k in sorted(histogram)},
        'mean_switch_points': mean(r['switch_points'] for r in rows),
        'mean_i_index': mean(r['i_index'] for r in rows),
        'mean_cmi': mean(r['cmi'] for r in rows),
        'mean_en_fraction': mean(r['en_fraction'] for r in rows),
        'code_switched_sentences': sum(1 for r in rows if r['switch_points'] > 0),
    }
