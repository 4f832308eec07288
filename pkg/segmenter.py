#!/usr/bin/env python3
"""
Rule-based Arabic clitic segmentation.

Stands in for an external morphological segmenter: a word is split into at
most one prefix clitic, the stem and at most one suffix clitic, picking the
longest clitic from the lexicon that still leaves a stem of MIN_STEM_LENGTH
characters. Every boundary inside a word is marked on both facing sides:

    والكتاب  ->  وال+  +كتاب
    رأيها    ->  رأي+  +ها
    وكتابها  ->  و+  +كتاب+  +ها

Input that already carries '+' markers is passed through untouched, so output
of a real segmenter can be fed in directly.
"""

import io
import logging
from dataclasses import dataclass
from typing import Tuple

from corpus_io import LANG_AR, MORPHEME_MARKER, Token, looks_segmented

logger = logging.getLogger(__name__)

DEFAULT_PREFIXES = ('و', 'ف', 'ب', 'ك', 'ل', 'ال', 'وال', 'بال')
DEFAULT_SUFFIXES = ('ها', 'هم', 'هن', 'كم', 'كن', 'نا', 'ني', 'ه', 'ك', 'ي')
MIN_STEM_LENGTH = 2


@dataclass(frozen=True)
class CliticLexicon:
    prefixes: Tuple[str, ...] = DEFAULT_PREFIXES
    suffixes: Tuple[str, ...] = DEFAULT_SUFFIXES
    min_stem: int = MIN_STEM_LENGTH

    def __post_init__(self):
        if self.min_stem < 1:
            raise ValueError(f"min_stem must be >= 1, got {self.min_stem}")
        # longest first so the first hit is the greedy longest match
        object.__setattr__(self, 'prefixes', tuple(sorted(set(self.prefixes), key=lambda c: (-len(c), c))))
        object.__setattr__(self, 'suffixes', tuple(sorted(set(self.suffixes), key=lambda c: (-len(c), c))))


@dataclass(frozen=True)
class Segmentation:
    pieces: Tuple[str, ...]
    stem_index: int = 0

    @property
    def word(self):
        return ''.join(strip_markers(p) for p in self.pieces)

    @property
    def stem(self):
        return strip_markers(self.pieces[self.stem_index])


@dataclass(frozen=True)
class SegmenterConfig:
    enabled: bool = True
    lexicon_path: str = ''
    min_stem: int = MIN_STEM_LENGTH


def strip_markers(piece):
    """Remove one leading and one trailing '+' marker, never emptying the piece."""
    out = piece
    if len(out) > 1 and out.startswith(MORPHEME_MARKER):
        out = out[1:]
    if len(out) > 1 and out.endswith(MORPHEME_MARKER):
        out = out[:-1]
    return out


def load_lexicon(path, min_stem=MIN_STEM_LENGTH):
    """Read a clitic lexicon file with [prefixes] and [suffixes] sections."""
    sections = {'prefixes': [], 'suffixes': []}
    current = None
    with io.open(path, 'r', encoding='utf-8') as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if line.startswith('[') and line.endswith(']'):
                current = line[1:-1].strip().lower()
                if current not in sections:
                    raise ValueError(f"Unknown lexicon section [{current}] at line {line_no} of {path}")
                continue
            if current is None:
                raise ValueError(f"Clitic outside of a section at line {line_no} of {path}")
            sections[current].append(line)
    return CliticLexicon(tuple(sections['prefixes']), tuple(sections['suffixes']), min_stem)


def segment_word(word, lexicon=None):
    """Split one Arabic word into prefix / stem / suffix pieces.

    Returns:
        Segmentation whose marker-stripped pieces concatenate back to word.
    """
    if not word:
        raise ValueError("Cannot segment an empty word")
    lexicon = lexicon or CliticLexicon()
    if MORPHEME_MARKER in word:
        return Segmentation((word,))

    prefix = ''
    for candidate in lexicon.prefixes:
        if word.startswith(candidate) and len(word) - len(candidate) >= lexicon.min_stem:
            prefix = candidate
            break
    rest = word[len(prefix):]

    suffix = ''
    for candidate in lexicon.suffixes:
        if rest.endswith(candidate) and len(rest) - len(candidate) >= lexicon.min_stem:
            suffix = candidate
            break
    stem = rest[:len(rest) - len(suffix)]

    pieces = []
    if prefix:
        pieces.append(prefix + MORPHEME_MARKER)
    pieces.append((MORPHEME_MARKER if prefix else '') + stem + (MORPHEME_MARKER if suffix else ''))
    if suffix:
        pieces.append(MORPHEME_MARKER + suffix)
    return Segmentation(tuple(pieces), 1 if prefix else 0)


def segment_sentence(tokens, lexicon=None):
    """Replace every Arabic token by its pieces; other tokens pass through."""
    out = []
    for token in tokens:
        if token.lang != LANG_AR or token.is_morpheme or looks_segmented(token.surface):
            out.append(token)
            continue
        if MORPHEME_MARKER in token.surface:
            out.extend(Token(piece, token.lang, True) for piece in split_joined(token.surface))
            continue
        segmentation = segment_word(token.surface, lexicon)
        if len(segmentation.pieces) == 1:
            out.append(token)
        else:
            out.extend(Token(piece, token.lang, True) for piece in segmentation.pieces)
    return out


def desegment(tokens):
    """Re-attach '+'-joined morphemes.

    Two neighbours merge when the left one ends with '+', the right one starts
    with '+', both are morphemes and both have the same language. Any marker
    left over after merging is stripped, so a morpheme sitting next to a token
    of the other language is emitted on its own.
    """
    out = []
    pending = None
    for token in tokens:
        if pending is not None and pending.is_morpheme and token.is_morpheme and token.lang == pending.lang \
                and pending.surface.endswith(MORPHEME_MARKER) and token.surface.startswith(MORPHEME_MARKER):
            pending = Token(pending.surface[:-1] + token.surface[1:], token.lang, True)
            continue
        if pending is not None:
            out.append(_finish(pending))
        pending = token
    if pending is not None:
        out.append(_finish(pending))
    return out


def _finish(token):
    if not token.is_morpheme:
        return token
    return Token(strip_markers(token.surface), token.lang, False)


def split_joined(surface):
    """Split a one-token segmented word such as 'و+كتاب+ها' into marked pieces."""
    parts = [p for p in surface.split(MORPHEME_MARKER) if p]
    if len(parts) < 2:
        return [surface]
    pieces = []
    for i, part in enumerate(parts):
        left = MORPHEME_MARKER if i > 0 else ''
        right = MORPHEME_MARKER if i < len(parts) - 1 else ''
        pieces.append(left + part + right)
    return pieces
