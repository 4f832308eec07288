#!/usr/bin/env python3
"""
Readers and writers for every file the pipeline touches.

Formats:
  - parallel corpus: "src<TAB>tgt" lines (optionally "id<TAB>src<TAB>tgt"),
    or two line-aligned files
  - alignments: Pharaoh "i-j" pairs, one line per sentence
  - trees: one PTB bracketed tree per line
  - CS corpus: one sentence per line, tokens optionally tagged "/AR" "/EN"
  - reports: JSON

Tokenization is whitespace-only and text is passed through as UTF-8 without
normalization.
"""

import io
import os
import json
import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from nltk import Tree

logger = logging.getLogger(__name__)

LANG_AR = 'AR'
LANG_EN = 'EN'
LANGS = (LANG_AR, LANG_EN)
MORPHEME_MARKER = '+'


class CorpusFormatError(ValueError):
    """Malformed input file content. Messages carry the 1-based line number when known."""


def looks_segmented(surface):
    """True if the surface carries a '+' join marker on either edge."""
    return len(surface) > 1 and (surface.startswith(MORPHEME_MARKER) or surface.endswith(MORPHEME_MARKER))


@dataclass(frozen=True)
class Token:
    surface: str
    lang: str
    is_morpheme: bool = False

    def __post_init__(self):
        if not self.surface:
            raise ValueError("Token surface must be non-empty")
        if self.lang not in LANGS:
            raise ValueError(f"Token language must be one of {LANGS}, got {self.lang!r}")

    def tagged(self):
        return f"{self.surface}/{self.lang}"


class AlignmentLink(tuple):
    """(src_index, tgt_index) pair, 0-based."""

    __slots__ = ()

    def __new__(cls, src_index, tgt_index):
        if src_index < 0 or tgt_index < 0:
            raise ValueError(f"Alignment indices must be non-negative, got {src_index}-{tgt_index}")
        return super().__new__(cls, (int(src_index), int(tgt_index)))

    @property
    def src_index(self):
        return self[0]

    @property
    def tgt_index(self):
        return self[1]

    def __repr__(self):
        return f"{self[0]}-{self[1]}"


@dataclass(frozen=True)
class SentencePair:
    id: str
    src_tokens: Tuple[Token, ...]
    tgt_tokens: Tuple[Token, ...]
    alignment: Optional[FrozenSet[AlignmentLink]] = None

    def __post_init__(self):
        if not self.src_tokens or not self.tgt_tokens:
            raise ValueError(f"Sentence pair {self.id}: both sides must be non-empty")
        if self.alignment is not None:
            validate_alignment(self.alignment, len(self.src_tokens), len(self.tgt_tokens), self.id)

    @property
    def src_words(self):
        return [t.surface for t in self.src_tokens]

    @property
    def tgt_words(self):
        return [t.surface for t in self.tgt_tokens]

    def with_alignment(self, links):
        return SentencePair(self.id, self.src_tokens, self.tgt_tokens, frozenset(links))

    def with_tgt_tokens(self, tgt_tokens):
        """Copy with a new target side; the alignment is dropped because its indices no longer apply."""
        return SentencePair(self.id, self.src_tokens, tuple(tgt_tokens), None)


def validate_alignment(links, src_len, tgt_len, pair_id=None):
    """Raise CorpusFormatError if any link points outside either side."""
    for link in links:
        if link[0] >= src_len or link[1] >= tgt_len:
            where = f" in sentence {pair_id}" if pair_id is not None else ""
            raise CorpusFormatError(
                f"Alignment link {link[0]}-{link[1]} out of bounds{where} (src length {src_len}, tgt length {tgt_len})")


@dataclass(frozen=True)
class ParseTree:
    label: str
    children: Tuple['ParseTree', ...] = ()
    span: Tuple[int, int] = (0, 0)

    @property
    def is_leaf(self):
        return not self.children

    def leaves(self):
        if self.is_leaf:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def words(self):
        return [leaf.label for leaf in self.leaves()]

    def subtrees(self):
        yield self
        for child in self.children:
            yield from child.subtrees()

    def to_ptb(self):
        if self.is_leaf:
            return self.label
        inner = ' '.join(child.to_ptb() for child in self.children)
        if self.label:
            return f"({self.label} {inner})"
        return f"( {inner})"


@dataclass(frozen=True)
class ParallelFormat:
    """How a parallel corpus is laid out on disk."""
    mode: str = 'tsv'            # 'tsv' or 'paired'
    id_column: bool = False      # tsv only: first column is the sentence id

    def __post_init__(self):
        if self.mode not in ('tsv', 'paired'):
            raise ValueError(f"Unknown parallel format mode: {self.mode}")


def _tokens(text, lang):
    return tuple(Token(w, lang, lang == LANG_AR and looks_segmented(w)) for w in text.split())


def read_parallel(stream, format_config=None, tgt_stream=None):
    """Read a parallel corpus into SentencePairs.

    Args:
        stream: TSV stream, or the source-side stream when format_config.mode == 'paired'
        format_config (ParallelFormat): layout, defaults to plain TSV
        tgt_stream: target-side stream for the paired layout

    Returns:
        list of SentencePair, ids are 1-based line numbers unless an id column is configured
    """
    format_config = format_config or ParallelFormat()
    pairs = []

    if format_config.mode == 'paired':
        if tgt_stream is None:
            raise ValueError("Paired format requires a target stream")
        src_lines = stream.read().splitlines()
        tgt_lines = tgt_stream.read().splitlines()
        if len(src_lines) != len(tgt_lines):
            raise CorpusFormatError(f"line count mismatch at line {min(len(src_lines), len(tgt_lines)) + 1}")
        rows = [(str(i), src, tgt) for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1)]
    else:
        rows = []
        for line_no, raw in enumerate(stream.read().splitlines(), start=1):
            if not raw.strip():
                rows.append((str(line_no), '', ''))
                continue
            parts = raw.split('\t')
            expected = 3 if format_config.id_column else 2
            if len(parts) != expected:
                raise CorpusFormatError(f"expected {expected} tab-separated columns at line {line_no}, got {len(parts)}")
            if format_config.id_column:
                rows.append((parts[0].strip(), parts[1], parts[2]))
            else:
                rows.append((str(line_no), parts[0], parts[1]))

    for line_no, (pair_id, src, tgt) in enumerate(rows, start=1):
        if not src.strip() and not tgt.strip():
            continue
        if not src.strip() or not tgt.strip():
            side = 'source' if not src.strip() else 'target'
            raise CorpusFormatError(f"empty {side} side at line {line_no}")
        pairs.append(SentencePair(pair_id, _tokens(src, LANG_EN), _tokens(tgt, LANG_AR)))

    logger.info(f"Read {len(pairs)} sentence pairs")
    return pairs


def write_parallel(pairs, stream):
    """Write pairs as "id<TAB>src<TAB>tgt" lines, readable with ParallelFormat(id_column=True)."""
    for pair in pairs:
        src = ' '.join(pair.src_words)
        tgt = ' '.join(pair.tgt_words)
        stream.write(f"{pair.id}\t{src}\t{tgt}\n")


def read_pharaoh(line):
    """Parse one Pharaoh line ("0-0 1-2 ...") into a frozenset of AlignmentLink."""
    links = set()
    for item in line.split():
        parts = item.split('-')
        if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise CorpusFormatError(f"malformed alignment pair {item!r}, expected int-int")
        links.add(AlignmentLink(int(parts[0]), int(parts[1])))
    return frozenset(links)


def write_pharaoh(links):
    return ' '.join(f"{s}-{t}" for s, t in sorted(links))


def read_alignment_file(stream):
    """Read a Pharaoh file; error messages carry the line number."""
    result = []
    for line_no, raw in enumerate(stream.read().splitlines(), start=1):
        try:
            result.append(read_pharaoh(raw))
        except CorpusFormatError as e:
            raise CorpusFormatError(f"{e} at line {line_no}") from None
    return result


def _from_nltk(node, start):
    if isinstance(node, str):
        return ParseTree(node, (), (start, start + 1))
    if len(node) == 0:
        raise CorpusFormatError(f"empty constituent ({node.label()})")
    children = []
    pos = start
    for child in node:
        converted = _from_nltk(child, pos)
        children.append(converted)
        pos = converted.span[1]
    return ParseTree(node.label(), tuple(children), (start, pos))


def read_ptb(text):
    """Parse a single bracketed tree. Spans are half-open token intervals."""
    text = text.strip()
    if not text:
        raise CorpusFormatError("empty tree")
    if text.count('(') != text.count(')'):
        raise CorpusFormatError("unbalanced brackets")
    try:
        tree = Tree.fromstring(text)
    except ValueError as e:
        raise CorpusFormatError(f"unbalanced brackets: {e}") from None
    if isinstance(tree, str):
        raise CorpusFormatError("tree has no constituent")
    return _from_nltk(tree, 0)


def read_tree_file(stream):
    """One tree per line; blank lines give None so line alignment is kept."""
    trees = []
    for line_no, raw in enumerate(stream.read().splitlines(), start=1):
        if not raw.strip():
            trees.append(None)
            continue
        try:
            trees.append(read_ptb(raw))
        except CorpusFormatError as e:
            raise CorpusFormatError(f"{e} at line {line_no}") from None
    return trees


def format_candidate(candidate, tagged):
    if tagged:
        return ' '.join(token.tagged() for token in candidate.tokens)
    return ' '.join(token.surface for token in candidate.tokens)


def write_cs_corpus(candidates, stream, tagged, with_ids=False):
    """Write one candidate per line, in input order."""
    for candidate in candidates:
        line = format_candidate(candidate, tagged)
        if with_ids:
            line = f"{candidate.source_pair_id}\t{line}"
        stream.write(line + '\n')


def parse_tagged_line(line):
    """Split "w/AR w/EN" into Tokens. The tag is taken after the last '/'."""
    tokens = []
    for item in line.split():
        surface, sep, lang = item.rpartition('/')
        if not sep or lang not in LANGS or not surface:
            raise CorpusFormatError(f"token {item!r} has no /AR or /EN tag")
        tokens.append(Token(surface, lang, False))
    return tokens


def read_cs_corpus(stream):
    """Read a tagged candidate file back into (pair_id, tokens) rows."""
    rows = []
    for line_no, raw in enumerate(stream.read().splitlines(), start=1):
        if not raw.strip():
            continue
        pair_id, sep, text = raw.partition('\t')
        if not sep:
            pair_id, text = str(line_no), raw
        try:
            rows.append((pair_id, parse_tagged_line(text)))
        except CorpusFormatError as e:
            raise CorpusFormatError(f"{e} at line {line_no}") from None
    return rows


def read_token_corpus(stream):
    """Plain text corpus, one whitespace-tokenized sentence per line, blank lines skipped."""
    return [line.split() for line in stream.read().splitlines() if line.strip()]


def dump_json(obj):
    """Canonical JSON text used for every report and manifest."""
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + '\n'


def write_json_report(obj, path):
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(dump_json(obj))


def read_json_report(path):
    with io.open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _open_existing(path, what):
    if not path or not os.path.exists(path):
        raise FileNotFoundError(f"{what} not found: {path}")
    return io.open(path, 'r', encoding='utf-8')


def read_parallel_path(path, format_config=None, tgt_path=None):
    format_config = format_config or ParallelFormat()
    if format_config.mode == 'paired':
        with _open_existing(path, 'Corpus') as src, _open_existing(tgt_path, 'Target corpus') as tgt:
            return read_parallel(src, format_config, tgt)
    with _open_existing(path, 'Corpus') as f:
        return read_parallel(f, format_config)


def read_tree_path(path):
    with _open_existing(path, 'Tree file') as f:
        return read_tree_file(f)


def read_alignment_path(path):
    with _open_existing(path, 'Alignment file') as f:
        return read_alignment_file(f)


def read_token_path(path):
    with _open_existing(path, 'Corpus') as f:
        return read_token_corpus(f)


def read_cs_path(path):
    with _open_existing(path, 'Candidate file') as f:
        return read_cs_corpus(f)
