#!/usr/bin/env python3
"""
Enumerate the code-switched renderings of a BilingualTree.

At every node the renderings are, in this order:
  - the all-Arabic rendering (always present)
  - if the node is internal and its English child order equals its Arabic
    child order, every combination of the children's renderings
  - the all-English rendering, when the node holds at least one English word

A node whose two child orders differ is therefore rendered in one language
only; so is a leaf holding a multi-word alignment block.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import cs_metrics
from corpus_io import Token
from segmenter import desegment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorConfig:
    max_candidates_per_sentence: int = 10000
    dedup: bool = True

    def __post_init__(self):
        if self.max_candidates_per_sentence < 1:
            raise ValueError(f"max_candidates_per_sentence must be >= 1, got {self.max_candidates_per_sentence}")


@dataclass(frozen=True)
class CSCandidate:
    tokens: Tuple[Token, ...]
    source_pair_id: str = ''
    bucket: Optional[str] = None
    switch_points: int = field(init=False)
    spf: float = field(init=False)

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("A candidate needs at least one token")
        object.__setattr__(self, 'tokens', tuple(self.tokens))
        object.__setattr__(self, 'switch_points', cs_metrics.switch_points(self.tokens))
        object.__setattr__(self, 'spf', cs_metrics.i_index(self.tokens))

    @property
    def key(self):
        return tuple((t.surface, t.lang) for t in self.tokens)

    def text(self):
        return ' '.join(t.surface for t in self.tokens)

    def with_bucket(self, bucket):
        return replace(self, bucket=bucket)


class _Truncation:
    flagged = False


def _unique(sequences):
    seen = set()
    for seq in sequences:
        if seq not in seen:
            seen.add(seq)
            yield seq


def _arabic(node):
    return tuple(node.tgt_tokens())


def _english(node):
    return tuple(node.src_tokens())


def _render(node, cap, truncation):
    yield _arabic(node)
    if not node.is_leaf and node.is_identity:
        options = []
        for child in node.children:
            child_options = list(itertools.islice(_unique(_render(child, cap, truncation)), cap + 1))
            if len(child_options) > cap:
                truncation.flagged = True
                child_options = child_options[:cap]
            options.append(child_options)
        for combination in itertools.product(*options):
            yield tuple(token for part in combination for token in part)
    if node.has_src():
        yield _english(node)


def renderings(node, cfg=None):
    """Lazy, Arabic-first stream of raw (still segmented) token sequences, without duplicates."""
    cfg = cfg or GeneratorConfig()
    return _unique(_render(node, cfg.max_candidates_per_sentence, _Truncation()))


def enumerate_candidates(bitree, cfg=None, source_pair_id=''):
    """Generate candidates for one tree.

    Returns:
        (list of CSCandidate, truncated flag)
    """
    cfg = cfg or GeneratorConfig()
    cap = cfg.max_candidates_per_sentence
    truncation = _Truncation()
    candidates = []
    seen = set()
    for raw in _unique(_render(bitree, cap, truncation)):
        tokens = tuple(desegment(list(raw)))
        if not tokens:
            continue
        candidate = CSCandidate(tokens, source_pair_id)
        if cfg.dedup:
            if candidate.key in seen:
                continue
            seen.add(candidate.key)
        if len(candidates) == cap:
            truncation.flagged = True
            break
        candidates.append(candidate)
    if truncation.flagged:
        logger.warning(f"Sentence {source_pair_id or '?'}: candidates truncated at {cap}")
    return candidates, truncation.flagged


def generate(bitree, cfg=None, source_pair_id=''):
    candidates, _ = enumerate_candidates(bitree, cfg, source_pair_id)
    return candidates
