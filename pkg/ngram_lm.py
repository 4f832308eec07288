#!/usr/bin/env python3
"""
Interpolated Kneser-Ney n-gram language model, perplexity evaluation and ARPA I/O.

    p_kn(w|h) = max(c(h w) - D_n, 0) / c(h) + D_n * |{w: c(h w) > 0}| / c(h) * p_kn(w|h')

The highest order uses raw counts, every lower order uses continuation counts
(number of distinct left extensions), and the unigram level interpolates with
the uniform distribution over the vocabulary, which holds the training types,
</s> and <unk>. One discount per order: D_n = n1 / (n1 + 2 n2).

Sentences are padded with order-1 <s> symbols and closed with </s>; </s> is
trained but not scored, so a test set's token count is its word count.
"""

import io
import logging
import math
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

logger = logging.getLogger(__name__)

BOS = '<s>'
EOS = '</s>'
UNK = '<unk>'
UNK_POLICIES = ('map_to_unk', 'exclude')
DEGENERATE_DISCOUNT = 0.5
ARPA_LOG_ZERO = -99.0


@dataclass(frozen=True)
class LMConfig:
    order: int = 3
    unk_policy: str = 'map_to_unk'
    workers: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.unk_policy not in UNK_POLICIES:
            raise ValueError(f"Unknown unk_policy {self.unk_policy!r}, expected one of {UNK_POLICIES}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass
class EvalReport:
    testset_id: str
    unk_policy: str
    ppl: float
    oov_count: int
    total_tokens: int
    log_prob_sum: float

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in ('testset_id', 'unk_policy', 'ppl', 'oov_count', 'total_tokens', 'log_prob_sum')})


class _Scorer:
    """Shared evaluation surface: order, vocabulary test and prob(word, context)."""

    def is_oov(self, word):
        raise NotImplementedError

    def prob(self, word, context=()):
        raise NotImplementedError

    def start_context(self):
        return (BOS,) * (self.order - 1)


@dataclass
class NGramModel(_Scorer):
    order: int
    vocab: frozenset
    counts: Dict[int, Dict[Tuple[str, ...], int]]
    discounts: Dict[int, float]
    context_totals: Dict[int, Dict[Tuple[str, ...], int]] = field(default_factory=dict)
    context_types: Dict[int, Dict[Tuple[str, ...], int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.context_totals:
            for k, table in self.counts.items():
                totals = defaultdict(int)
                types = defaultdict(int)
                for gram, c in table.items():
                    totals[gram[:-1]] += c
                    types[gram[:-1]] += 1
                self.context_totals[k] = dict(totals)
                self.context_types[k] = dict(types)

    def is_oov(self, word):
        return word not in self.vocab or word == UNK

    def prob(self, word, context=()):
        """p(word | last order-1 tokens of context); unknown words are scored as <unk>."""
        if word not in self.vocab:
            word = UNK
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        return self._prob(word, context)

    def _prob(self, word, context):
        k = len(context) + 1
        if k == 1:
            lower = 1.0 / len(self.vocab)
        else:
            lower = self._prob(word, context[1:])
        total = self.context_totals[k].get(context, 0)
        if not total:
            return lower
        d = self.discounts[k]
        c = self.counts[k].get(context + (word,), 0)
        return max(c - d, 0.0) / total + d * self.context_types[k][context] / total * lower

    def backoff_weight(self, context):
        """Interpolation weight given to the lower order after context, 1.0 when context was never seen."""
        k = len(context) + 1
        total = self.context_totals.get(k, {}).get(context, 0)
        if not total:
            return 1.0
        return self.discounts[k] * self.context_types[k][context] / total


class UniformModel(_Scorer):
    """p(w) = 1/|vocab| for every word, known or not."""

    order = 1

    def __init__(self, vocab):
        self.vocab = frozenset(vocab)
        if not self.vocab:
            raise ValueError("UniformModel needs a non-empty vocabulary")

    def is_oov(self, word):
        return word not in self.vocab

    def prob(self, word, context=()):
        return 1.0 / len(self.vocab)


def _padded(sentence, order):
    return [BOS] * (order - 1) + list(sentence) + [EOS]


def _count_chunk(sentences, order):
    counts = Counter()
    for sentence in sentences:
        padded = _padded(sentence, order)
        for i in range(order - 1, len(padded)):
            counts[tuple(padded[i - order + 1:i + 1])] += 1
    return counts


def _discount(order, table):
    counts_of_counts = Counter(table.values())
    n1, n2 = counts_of_counts.get(1, 0), counts_of_counts.get(2, 0)
    if n1 == 0 or n2 == 0:
        logger.warning(f"Degenerate counts-of-counts at order {order} (n1={n1}, n2={n2}), using D={DEGENERATE_DISCOUNT}")
        return DEGENERATE_DISCOUNT
    return n1 / (n1 + 2.0 * n2)


def train_lm(corpus, cfg=None):
    """Train an interpolated KN model on token sequences.

    Raises:
        ValueError: empty corpus
    """
    cfg = cfg or LMConfig()
    sentences = [list(s) for s in corpus if len(s)]
    if not sentences:
        raise ValueError("Cannot train a language model on an empty corpus")
    order = cfg.order

    size = max(1, math.ceil(len(sentences) / cfg.workers))
    chunks = [sentences[i:i + size] for i in range(0, len(sentences), size)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            partial = list(executor.map(lambda chunk: _count_chunk(chunk, order), chunks))
    else:
        partial = [_count_chunk(chunk, order) for chunk in chunks]
    top = Counter()
    for chunk_counts in partial:
        top.update(chunk_counts)

    counts = {order: dict(top)}
    for k in range(order - 1, 0, -1):
        continuation = Counter(gram[1:] for gram in counts[k + 1])
        counts[k] = dict(continuation)

    discounts = {k: _discount(k, counts[k]) for k in range(1, order + 1)}
    vocab = frozenset({w for s in sentences for w in s} | {EOS, UNK})
    logger.info(f"Trained order-{order} KN model: {len(sentences)} sentences, |V|={len(vocab)}, "
                f"discounts {[round(discounts[k], 4) for k in sorted(discounts)]}")
    return NGramModel(order, vocab, counts, discounts)


def _score_sentence(model, sentence, unk_policy):
    """Returns (log-prob terms, scored tokens, oov count) for one sentence."""
    context = list(model.start_context())
    terms = []
    oov = 0
    for word in sentence:
        unknown = model.is_oov(word)
        token = UNK if unknown else word
        if unknown:
            oov += 1
        if not (unknown and unk_policy == 'exclude'):
            terms.append(math.log(model.prob(token, tuple(context))))
        if model.order > 1:
            context = (context + [token])[-(model.order - 1):]
    return terms, len(terms), oov


def evaluate(model, testset, unk_policy='map_to_unk', testset_id='test', workers=1):
    """Perplexity over the words of testset (</s> is not scored).

    Raises:
        ValueError: empty testset, or no scoreable tokens under the policy
    """
    if unk_policy not in UNK_POLICIES:
        raise ValueError(f"Unknown unk_policy {unk_policy!r}")
    sentences = [list(s) for s in testset if len(s)]
    if not sentences:
        raise ValueError("Cannot evaluate on an empty testset")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda s: _score_sentence(model, s, unk_policy), sentences))
    else:
        results = [_score_sentence(model, s, unk_policy) for s in sentences]

    log_prob_sum = math.fsum(term for terms, _, _ in results for term in terms)
    total = sum(n for _, n, _ in results)
    oov = sum(o for _, _, o in results)
    if total == 0:
        raise ValueError("no scoreable tokens")
    ppl = math.exp(-log_prob_sum / total)
    return EvalReport(testset_id, unk_policy, ppl, oov, total, log_prob_sum)


def compare_runs(baseline, augmented):
    """Relative perplexity gain and OOV change of augmented over baseline."""
    if baseline.testset_id != augmented.testset_id:
        raise ValueError(f"Reports are for different testsets: {baseline.testset_id!r} vs {augmented.testset_id!r}")
    if baseline.unk_policy != augmented.unk_policy:
        raise ValueError(f"Reports use different unk policies: {baseline.unk_policy} vs {augmented.unk_policy}")
    return {
        'testset_id': baseline.testset_id,
        'ppl_baseline': baseline.ppl,
        'ppl_augmented': augmented.ppl,
        'relative_gain': (baseline.ppl - augmented.ppl) / baseline.ppl,
        'oov_baseline': baseline.oov_count,
        'oov_augmented': augmented.oov_count,
        'oov_delta': augmented.oov_count - baseline.oov_count,
    }


def _log10(p):
    return math.log10(p) if p > 0 else ARPA_LOG_ZERO


def write_arpa(model, stream):
    """Dump in ARPA format: log10 p(w|h) and log10 backoff weight per n-gram."""
    order = model.order
    sections = {}
    unigrams = {(w,) for w in model.vocab} | {(BOS,)}
    sections[1] = unigrams
    for k in range(2, order + 1):
        sections[k] = set(model.counts[k])
    # every context must exist one order down so its backoff weight can be stored
    for k in range(order, 1, -1):
        for gram in list(sections[k]):
            sections[k - 1].add(gram[:-1])

    stream.write('\n\\data\\\n')
    for k in range(1, order + 1):
        stream.write(f"ngram {k}={len(sections[k])}\n")
    for k in range(1, order + 1):
        stream.write(f"\n\\{k}-grams:\n")
        for gram in sorted(sections[k]):
            if gram[-1] == BOS:
                logp = ARPA_LOG_ZERO
            else:
                logp = _log10(model._prob(gram[-1], gram[:-1]))
            line = f"{logp:.12g}\t{' '.join(gram)}"
            if k < order:
                line += f"\t{math.log10(model.backoff_weight(gram)):.12g}"
            stream.write(line + '\n')
    stream.write('\n\\end\\\n')


class ArpaModel(_Scorer):
    """Back-off model read from an ARPA file."""

    def __init__(self, order, probs, backoffs):
        self.order = order
        self.probs = probs
        self.backoffs = backoffs
        self.vocab = frozenset(g[0] for g in probs if len(g) == 1 and g[0] != BOS)

    def is_oov(self, word):
        return word not in self.vocab or word == UNK

    def prob(self, word, context=()):
        if word not in self.vocab:
            word = UNK
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        return 10 ** self._log10_prob(word, context)

    def _log10_prob(self, word, context):
        gram = context + (word,)
        if gram in self.probs:
            return self.probs[gram]
        if not context:
            return self.probs.get((UNK,), ARPA_LOG_ZERO)
        return self.backoffs.get(context, 0.0) + self._log10_prob(word, context[1:])


def read_arpa(stream):
    probs = {}
    backoffs = {}
    order = 0
    current = None
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line in ('\\data\\', '\\end\\') or line.startswith('ngram '):
            continue
        if line.startswith('\\') and line.endswith('-grams:'):
            current = int(line[1:line.index('-')])
            order = max(order, current)
            continue
        if current is None:
            raise ValueError(f"ARPA line {line_no} outside of an n-gram section")
        parts = line.split('\t') if '\t' in line else line.split()
        try:
            logp = float(parts[0])
            if '\t' in line:
                words = tuple(parts[1].split())
                backoff = float(parts[2]) if len(parts) > 2 else None
            else:
                words = tuple(parts[1:1 + current])
                backoff = float(parts[1 + current]) if len(parts) > 1 + current else None
        except (IndexError, ValueError):
            raise ValueError(f"Malformed ARPA line {line_no}: {line!r}") from None
        if len(words) != current:
            raise ValueError(f"ARPA line {line_no} has {len(words)} words in the {current}-gram section")
        probs[words] = logp
        if backoff is not None:
            backoffs[words] = backoff
    if not order:
        raise ValueError("ARPA file has no n-gram sections")
    return ArpaModel(order, probs, backoffs)


def write_arpa_file(model, path):
    with io.open(path, 'w', encoding='utf-8') as f:
        write_arpa(model, f)


def read_arpa_file(path):
    with io.open(path, 'r', encoding='utf-8') as f:
        return read_arpa(f)
