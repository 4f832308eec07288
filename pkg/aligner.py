#!/usr/bin/env python3
"""
Unsupervised word alignment: IBM Model 2 with a diagonal-preference prior.

For target position j (1..m) and source position i (1..n) the alignment prior is

    p(a_j = i) = (1 - p0) * exp(-tension * |i/n - j/m|) / Z(j, m, n)
    p(a_j = 0) = p0                                   (null word)

and the model is trained with EM from a uniform translation table (seed 0)
or from a seeded random perturbation of it. The tension is fixed by
configuration. Each direction is trained separately; the two Viterbi
alignments are combined by symmetrize().
"""

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from corpus_io import AlignmentLink

logger = logging.getLogger(__name__)

NULL_WORD = '<null>'
UNKNOWN_FLOOR = 1e-9
SYMMETRIZATION_METHODS = ('forward', 'reverse', 'intersection', 'union', 'grow_diag_final')
TSV_HEADER = '# translation-table v1: src tgt prob'


@dataclass(frozen=True)
class AlignerConfig:
    iterations: int = 5
    tension: float = 4.0
    p_null: float = 0.08
    symmetrization: str = 'grow_diag_final'
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.tension > 0:
            raise ValueError(f"tension must be > 0, got {self.tension}")
        if not 0 <= self.p_null < 1:
            raise ValueError(f"p_null must be in [0, 1), got {self.p_null}")
        if self.symmetrization not in SYMMETRIZATION_METHODS:
            raise ValueError(f"Unknown symmetrization {self.symmetrization!r}, expected one of {SYMMETRIZATION_METHODS}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass
class TranslationTable:
    """t(tgt_word | src_word), stored as table[src_word][tgt_word]."""
    table: Dict[str, Dict[str, float]] = field(default_factory=dict)
    log_likelihoods: List[float] = field(default_factory=list)

    def prob(self, src_word, tgt_word):
        row = self.table.get(src_word)
        if row is None:
            return UNKNOWN_FLOOR
        return row.get(tgt_word, UNKNOWN_FLOOR)

    def row_sums(self):
        return {e: math.fsum(row.values()) for e, row in self.table.items()}

    def dump_tsv(self, stream):
        stream.write(TSV_HEADER + '\n')
        for e in sorted(self.table):
            row = self.table[e]
            for f in sorted(row):
                stream.write(f"{e}\t{f}\t{float(row[f])!r}\n")

    @classmethod
    def load_tsv(cls, stream):
        table = defaultdict(dict)
        for line_no, raw in enumerate(stream.read().splitlines(), start=1):
            if not raw.strip() or raw.startswith('#'):
                continue
            parts = raw.split('\t')
            if len(parts) != 3:
                raise ValueError(f"Malformed translation table line {line_no}: {raw!r}")
            table[parts[0]][parts[1]] = float(parts[2])
        return cls(dict(table))


def swap_pair(pair):
    """(src, tgt) -> (tgt, src) word lists, for training the reverse direction."""
    return pair[1], pair[0]


def _as_words(pair):
    """Accept SentencePair or a (src_words, tgt_words) tuple."""
    if hasattr(pair, 'src_tokens'):
        return [t.surface for t in pair.src_tokens], [t.surface for t in pair.tgt_tokens]
    return list(pair[0]), list(pair[1])


class _DiagonalPrior:
    """Caches the prior matrix per (n, m); row j holds p(a_j = i) for i = 0..n."""

    def __init__(self, tension, p_null):
        self.tension = tension
        self.p_null = p_null
        self._cache = {}

    def matrix(self, n, m):
        key = (n, m)
        if key not in self._cache:
            i = np.arange(1, n + 1, dtype=float)
            j = np.arange(1, m + 1, dtype=float)
            h = -np.abs(i[None, :] / n - j[:, None] / m)
            weights = np.exp(self.tension * h)
            weights = (1.0 - self.p_null) * weights / weights.sum(axis=1, keepdims=True)
            prior = np.empty((m, n + 1))
            prior[:, 0] = self.p_null
            prior[:, 1:] = weights
            self._cache[key] = prior
        return self._cache[key]


def _translation_matrix(table, src_words, tgt_words):
    rows = [table.get(e, {}) for e in [NULL_WORD] + src_words]
    return np.array([[row.get(f, UNKNOWN_FLOOR) for row in rows] for f in tgt_words])


def _expected_counts(table, prior, corpus):
    """E-step over one chunk: returns (counts[e][f], log-likelihood)."""
    counts = defaultdict(lambda: defaultdict(float))
    log_likelihood = 0.0
    for src_words, tgt_words in corpus:
        n, m = len(src_words), len(tgt_words)
        joint = _translation_matrix(table, src_words, tgt_words) * prior.matrix(n, m)
        z = joint.sum(axis=1)
        log_likelihood += float(np.log(z).sum())
        posterior = joint / z[:, None]
        sources = [NULL_WORD] + src_words
        for j, f in enumerate(tgt_words):
            for i, e in enumerate(sources):
                counts[e][f] += float(posterior[j, i])
    return counts, log_likelihood


def _jitter(table, rng):
    """Scale every entry by a factor in [0.5, 1.5); sorted walk keeps the draw order fixed."""
    for e in sorted(table):
        row = table[e]
        targets = sorted(row)
        for f, factor in zip(targets, rng.uniform(0.5, 1.5, size=len(targets))):
            row[f] *= float(factor)


def _chunks(items, n_chunks):
    size = max(1, math.ceil(len(items) / n_chunks))
    return [items[k:k + size] for k in range(0, len(items), size)]


def train(pairs, cfg=None):
    """Train t(f|e) by EM.

    Args:
        pairs: SentencePairs or (src_words, tgt_words) tuples
        cfg (AlignerConfig): training parameters

    Returns:
        TranslationTable with log_likelihoods[k] = corpus log-likelihood seen in iteration k+1
    """
    cfg = cfg or AlignerConfig()
    corpus = [_as_words(p) for p in pairs]
    if not corpus:
        raise ValueError("Cannot train an aligner on an empty corpus")
    for k, (src_words, tgt_words) in enumerate(corpus):
        if not src_words or not tgt_words:
            raise ValueError(f"Sentence pair {k + 1} has an empty side")

    tgt_vocab = {f for _, tgt_words in corpus for f in tgt_words}
    uniform = 1.0 / len(tgt_vocab)
    table = defaultdict(dict)
    for src_words, tgt_words in corpus:
        for e in [NULL_WORD] + src_words:
            row = table[e]
            for f in tgt_words:
                row[f] = uniform
    table = dict(table)
    if cfg.seed:
        _jitter(table, np.random.default_rng(cfg.seed))

    prior = _DiagonalPrior(cfg.tension, cfg.p_null)
    chunks = _chunks(corpus, cfg.workers)
    history = []

    for iteration in range(1, cfg.iterations + 1):
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
                results = list(executor.map(lambda chunk: _expected_counts(table, prior, chunk), chunks))
        else:
            results = [_expected_counts(table, prior, chunk) for chunk in chunks]

        # merge in chunk order so the float sums do not depend on scheduling
        counts = defaultdict(lambda: defaultdict(float))
        log_likelihood = 0.0
        for chunk_counts, chunk_ll in results:
            log_likelihood += chunk_ll
            for e, row in chunk_counts.items():
                merged = counts[e]
                for f, c in row.items():
                    merged[f] += c

        new_table = {}
        for e, row in counts.items():
            total = math.fsum(row.values())
            new_table[e] = {f: float(c / total) for f, c in row.items()}
        table = new_table
        history.append(log_likelihood)
        logger.info(f"EM iteration {iteration}/{cfg.iterations}: log-likelihood {log_likelihood:.4f}")

    return TranslationTable(table, history)


def viterbi_align(table, cfg, pair):
    """Best source position for every target position; null-aligned positions give no link."""
    cfg = cfg or AlignerConfig()
    src_words, tgt_words = _as_words(pair)
    if not src_words or not tgt_words:
        return frozenset()
    prior = _DiagonalPrior(cfg.tension, cfg.p_null).matrix(len(src_words), len(tgt_words))
    scores = _translation_matrix(table.table, src_words, tgt_words) * prior
    links = set()
    for j in range(len(tgt_words)):
        best = int(np.argmax(scores[j]))  # first maximum -> smallest i on ties
        if best > 0:
            links.add(AlignmentLink(best - 1, j))
    return frozenset(links)


def transpose(links):
    return frozenset(AlignmentLink(t, s) for s, t in links)


def _neighbors(link):
    s, t = link
    for ds in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if ds or dt:
                yield (s + ds, t + dt)


def _grow_diag_final(fwd, rev):
    union = fwd | rev
    alignment = set(fwd & rev)
    aligned_src = {s for s, _ in alignment}
    aligned_tgt = {t for _, t in alignment}

    def add(link):
        alignment.add(link)
        aligned_src.add(link[0])
        aligned_tgt.add(link[1])

    added = True
    while added:
        added = False
        for link in sorted(alignment):
            for s, t in _neighbors(link):
                if (s, t) in union and (s, t) not in alignment and (s not in aligned_src or t not in aligned_tgt):
                    add(AlignmentLink(s, t))
                    added = True

    for s, t in sorted(union):
        if (s, t) not in alignment and (s not in aligned_src or t not in aligned_tgt):
            add(AlignmentLink(s, t))
    return alignment


def symmetrize(fwd, rev, method='grow_diag_final'):
    """Combine a forward (src->tgt) and a reverse alignment already transposed to (src, tgt) indices."""
    fwd = {AlignmentLink(s, t) for s, t in fwd}
    rev = {AlignmentLink(s, t) for s, t in rev}
    if method == 'forward':
        result = fwd
    elif method == 'reverse':
        result = rev
    elif method == 'intersection':
        result = fwd & rev
    elif method == 'union':
        result = fwd | rev
    elif method == 'grow_diag_final':
        result = _grow_diag_final(fwd, rev)
    else:
        raise ValueError(f"Unknown symmetrization method: {method}")
    return frozenset(result)


class BidirectionalAligner:
    """Trains both directions and produces symmetrized links per sentence pair."""

    def __init__(self, cfg=None):
        self.cfg = cfg or AlignerConfig()
        self.forward_table = None
        self.reverse_table = None

    def fit(self, pairs):
        corpus = [_as_words(p) for p in pairs]
        logger.info(f"Training forward direction on {len(corpus)} pairs")
        self.forward_table = train(corpus, self.cfg)
        logger.info("Training reverse direction")
        self.reverse_table = train([swap_pair(p) for p in corpus], self.cfg)
        return self

    def align(self, pair):
        words = _as_words(pair)
        fwd = viterbi_align(self.forward_table, self.cfg, words)
        rev = transpose(viterbi_align(self.reverse_table, self.cfg, swap_pair(words)))
        return symmetrize(fwd, rev, self.cfg.symmetrization)


def fanout_stats(links):
    """Count link groups by shape: one_to_one, one_to_many (one src word, several tgt) and many_to_one."""
    src_fanout = defaultdict(set)
    tgt_fanout = defaultdict(set)
    for s, t in links:
        src_fanout[s].add(t)
        tgt_fanout[t].add(s)
    stats = {'one_to_one': 0, 'one_to_many': 0, 'many_to_one': 0}
    for s, targets in src_fanout.items():
        if len(targets) > 1:
            stats['one_to_many'] += 1
        elif len(tgt_fanout[next(iter(targets))]) == 1:
            stats['one_to_one'] += 1
    stats['many_to_one'] = sum(1 for sources in tgt_fanout.values() if len(sources) > 1)
    return stats


def alignment_scores(predicted, gold):
    """Precision, recall and AER (all gold links treated as sure)."""
    predicted = set(map(tuple, predicted))
    gold = set(map(tuple, gold))
    hits = len(predicted & gold)
    precision = hits / len(predicted) if predicted else 0.0
    recall = hits / len(gold) if gold else 0.0
    denominator = len(predicted) + len(gold)
    aer = 1.0 - (2.0 * hits / denominator) if denominator else 0.0
    return {'precision': precision, 'recall': recall, 'aer': aer}
