#!/usr/bin/env python3
"""
Project an English constituency tree onto the Arabic side of a sentence pair.

The result is a BilingualTree whose children are stored in Arabic token order
and whose src_perm gives the English order of the same children. Steps:

  1. alignment links are closed into blocks (connected components); unaligned
     words lying inside a block's span on either side are absorbed into it
  2. every block becomes one atomic leaf (multi-word collapse); English words
     outside all blocks become English-only leaves
  3. a constituent that holds only part of a block is flattened into its
     parent, and so is any node whose Arabic coverage ends up non-contiguous
  4. unaligned Arabic runs become Arabic-only leaves next to their neighbour
  5. children are sorted into Arabic order and src_perm is recorded

A sentence is unprojectable when a block's span contains a word of another
block on either side, or when there are no links at all.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from corpus_io import LANG_AR, LANG_EN, CorpusFormatError, Token, looks_segmented, validate_alignment

logger = logging.getLogger(__name__)

ARABIC_ONLY_LABEL = '-NONE-'


class UnprojectableError(ValueError):
    """Alignment cannot be reconciled with the tree."""


@dataclass(frozen=True)
class BilingualTree:
    label: str
    children: Tuple['BilingualTree', ...] = ()
    src_perm: Tuple[int, ...] = ()
    tgt_pieces: Tuple[Token, ...] = ()
    src_pieces: Tuple[Token, ...] = ()
    # token indices into the pair, leaves only
    tgt_positions: Tuple[int, ...] = ()
    src_positions: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.children:
            if not self.src_perm:
                object.__setattr__(self, 'src_perm', tuple(range(len(self.children))))
        elif not self.tgt_pieces and not self.src_pieces:
            raise ValueError(f"Leaf {self.label!r} has neither Arabic nor English pieces")

    @property
    def is_leaf(self):
        return not self.children

    @property
    def is_identity(self):
        return tuple(self.src_perm) == tuple(range(len(self.children)))

    def leaves(self):
        """Leaves in Arabic order."""
        if self.is_leaf:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def src_order_leaves(self):
        """Leaves in English order, following src_perm at every node."""
        if self.is_leaf:
            return [self]
        out = []
        for k in self.src_perm:
            out.extend(self.children[k].src_order_leaves())
        return out

    def tgt_tokens(self):
        return [piece for leaf in self.leaves() for piece in leaf.tgt_pieces]

    def src_tokens(self):
        return [piece for leaf in self.src_order_leaves() for piece in leaf.src_pieces]

    def has_src(self):
        return any(leaf.src_pieces for leaf in self.leaves())

    def to_debug_string(self):
        if self.is_leaf:
            tgt = '_'.join(t.surface for t in self.tgt_pieces)
            src = '_'.join(t.surface for t in self.src_pieces)
            return f"({self.label} {tgt}|{src})"
        label = self.label
        if not self.is_identity:
            label += '[' + ','.join(str(k) for k in self.src_perm) + ']'
        return f"({label} " + ' '.join(child.to_debug_string() for child in self.children) + ")"


def make_leaf(label, tgt, src):
    """Leaf from plain strings; Arabic pieces with an edge '+' are marked as morphemes."""
    tgt_pieces = tuple(Token(w, LANG_AR, looks_segmented(w)) for w in tgt)
    src_pieces = tuple(Token(w, LANG_EN) for w in src)
    return BilingualTree(label, tgt_pieces=tgt_pieces, src_pieces=src_pieces)


def make_node(label, children, src_perm=None):
    return BilingualTree(label, tuple(children), tuple(src_perm) if src_perm is not None else ())


class _UnionFind:

    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class _Block:
    src: set = field(default_factory=set)
    tgt: set = field(default_factory=set)


def _build_blocks(links, src_len, tgt_len):
    """Returns (blocks sorted by first Arabic index, src_block map, tgt_block map)."""
    uf = _UnionFind()
    for s, t in links:
        uf.union(('s', s), ('t', t))
    groups = {}
    for s, t in sorted(links):
        block = groups.setdefault(uf.find(('s', s)), _Block())
        block.src.add(s)
        block.tgt.add(t)
    blocks = sorted(groups.values(), key=lambda b: min(b.tgt))

    src_block = [None] * src_len
    tgt_block = [None] * tgt_len
    for b, block in enumerate(blocks):
        for s in block.src:
            src_block[s] = b
        for t in block.tgt:
            tgt_block[t] = b

    for b, block in enumerate(blocks):
        for side, owner, positions in (('English', src_block, block.src), ('Arabic', tgt_block, block.tgt)):
            for k in range(min(positions), max(positions) + 1):
                if owner[k] is None:
                    owner[k] = b
                    positions.add(k)
                elif owner[k] != b:
                    raise UnprojectableError(
                        f"{side} word {k} of one alignment block lies inside the span of another")
    return blocks, src_block, tgt_block


# Intermediate items produced while walking the English tree


@dataclass
class _Frag:
    block: int
    label: str


@dataclass
class _EnglishOnly:
    position: int
    label: str


@dataclass
class _Node:
    label: str
    children: list
    src_key: tuple = ()
    tgt_positions: Optional[List[int]] = None


class _Projection:

    def __init__(self, tree, src_tokens, tgt_tokens, links):
        self.tree = tree
        self.src_tokens = src_tokens
        self.tgt_tokens = tgt_tokens
        self.blocks, self.src_block, self.tgt_block = _build_blocks(links, len(src_tokens), len(tgt_tokens))
        self.pos_labels = self._pos_labels(tree)

    @staticmethod
    def _pos_labels(tree):
        labels = []

        def walk(node, parent_label):
            if node.is_leaf:
                labels.append(parent_label)
                return
            for child in node.children:
                walk(child, node.label)

        walk(tree, tree.label)
        return labels

    # step 1-3: English tree to items

    def _items(self, node):
        start, end = node.span
        owners = {self.src_block[p] for p in range(start, end)}
        if len(owners) == 1 and None not in owners:
            return [_Frag(owners.pop(), self.pos_labels[start])]
        if node.is_leaf:
            return [_EnglishOnly(start, self.pos_labels[start])]

        items = []
        for child in node.children:
            for item in self._items(child):
                if isinstance(item, _Frag) and items and isinstance(items[-1], _Frag) and items[-1].block == item.block:
                    continue
                items.append(item)

        partial = any(min(self.blocks[b].src) < start or max(self.blocks[b].src) >= end
                      for b in owners if b is not None)
        if partial:
            return items
        if len(items) == 1:
            return items
        return [_Node(node.label, items)]

    # step 2: items to trees with positions

    def _materialize(self, item):
        if isinstance(item, _Frag):
            block = self.blocks[item.block]
            src = sorted(block.src)
            tgt = sorted(block.tgt)
            return BilingualTree(item.label,
                                 tgt_pieces=tuple(self.tgt_tokens[t] for t in tgt),
                                 src_pieces=tuple(self.src_tokens[s] for s in src),
                                 tgt_positions=tuple(tgt), src_positions=tuple(src))
        if isinstance(item, _EnglishOnly):
            return BilingualTree(item.label, src_pieces=(self.src_tokens[item.position],),
                                 src_positions=(item.position,))
        return _Node(item.label, [self._materialize(child) for child in item.children])

    # step 4: Arabic-only runs

    def _unaligned_runs(self):
        runs = []
        t = 0
        m = len(self.tgt_tokens)
        while t < m:
            if self.tgt_block[t] is None:
                start = t
                while t < m and self.tgt_block[t] is None:
                    t += 1
                runs.append((start, t))
            else:
                t += 1
        return runs

    def _attach_arabic_runs(self, root):
        runs = self._unaligned_runs()
        if not runs:
            return root
        if not isinstance(root, _Node):
            root = _Node(root.label, [root])

        for k, (a, b) in enumerate(runs):
            positions = tuple(range(a, b))
            leaf = BilingualTree(ARABIC_ONLY_LABEL, tgt_pieces=tuple(self.tgt_tokens[t] for t in positions),
                                 tgt_positions=positions)
            if a > 0:
                anchor, after = a - 1, True
            else:
                anchor, after = b, False
            parent, index = self._find_host(root, anchor)
            host = parent.children[index]
            if after:
                key = (min(host.src_positions), 1, k)
                parent.children.insert(index + 1, (leaf, key))
            else:
                key = (min(host.src_positions), -1, k)
                parent.children.insert(index, (leaf, key))
        return root

    def _find_host(self, node, tgt_position):
        for index, child in enumerate(node.children):
            if isinstance(child, tuple):
                continue
            if isinstance(child, _Node):
                found = self._find_host(child, tgt_position)
                if found:
                    return found
            elif tgt_position in child.tgt_positions:
                return node, index
        return None

    # step 5: ordering

    def _src_key(self, child):
        if isinstance(child, tuple):
            return child[1]
        if isinstance(child, _Node):
            return child.src_key
        return (min(child.src_positions), 0, 0)

    def _tgt_positions(self, child):
        if isinstance(child, tuple):
            return list(child[0].tgt_positions)
        if isinstance(child, _Node):
            return child.tgt_positions
        return list(child.tgt_positions)

    def _finalize(self, node):
        """Flatten non-contiguous children, sort into Arabic order and return (BilingualTree, src_key, tgt)."""
        children = []
        for child in node.children:
            if isinstance(child, _Node):
                self._finalize(child)
                if not _contiguous(child.tgt_positions):
                    children.extend(child.children)
                    continue
            children.append(child)
        node.children = children
        node.tgt_positions = sorted(p for c in children for p in self._tgt_positions(c))
        node.src_key = min(self._src_key(c) for c in children)

    def _build(self, node):
        if isinstance(node, tuple):
            return node[0]
        if not isinstance(node, _Node):
            return node
        if len(node.children) == 1:
            return self._build(node.children[0])

        english = sorted(range(len(node.children)), key=lambda i: self._src_key(node.children[i]))
        tgt_keys = {}
        last_anchor = None
        pending = []
        for i in english:
            positions = self._tgt_positions(node.children[i])
            if positions:
                last_anchor = min(positions)
                tgt_keys[i] = (last_anchor, 1, len(tgt_keys))
                for j in pending:
                    tgt_keys[j] = (last_anchor, 0, english.index(j))
                pending = []
            elif last_anchor is not None:
                tgt_keys[i] = (last_anchor, 2, english.index(i))
            else:
                pending.append(i)
        for j in pending:
            tgt_keys[j] = (-1, 0, english.index(j))

        arabic = sorted(range(len(node.children)), key=lambda i: tgt_keys[i])
        where = {i: k for k, i in enumerate(arabic)}
        children = tuple(self._build(node.children[i]) for i in arabic)
        src_perm = tuple(where[i] for i in english)
        return BilingualTree(node.label, children, src_perm)

    def run(self):
        items = self._items(self.tree)
        if len(items) == 1:
            root = self._materialize(items[0])
        else:
            root = _Node(self.tree.label, [self._materialize(item) for item in items])
        root = self._attach_arabic_runs(root)
        if isinstance(root, _Node):
            self._finalize(root)
        return self._build(root)


def _contiguous(positions):
    return not positions or positions[-1] - positions[0] + 1 == len(positions)


def project(tree, alignment, tgt_tokens, src_tokens=None):
    """Build the BilingualTree for one sentence pair.

    A pair without a single link is rejected instead of being projected as
    Arabic-only leaves; the pipeline counts it as unprojectable.

    Args:
        tree (ParseTree): English constituency tree
        alignment: (src_index, tgt_index) links
        tgt_tokens: Arabic Tokens, possibly segmented
        src_tokens: English Tokens; taken from the tree leaves when omitted

    Raises:
        UnprojectableError: no links, or interleaved alignment blocks
        CorpusFormatError: tree leaves do not match the source tokens
    """
    words = tree.words()
    if src_tokens is None:
        src_tokens = [Token(w, LANG_EN) for w in words]
    src_tokens = list(src_tokens)
    tgt_tokens = list(tgt_tokens)
    if [t.surface for t in src_tokens] != words:
        raise CorpusFormatError(f"tree has {len(words)} leaves that do not match the {len(src_tokens)} source tokens")
    if not tgt_tokens:
        raise UnprojectableError("empty Arabic side")
    links = {(int(s), int(t)) for s, t in alignment}
    validate_alignment(links, len(src_tokens), len(tgt_tokens))
    if not links:
        raise UnprojectableError("no alignment links")
    return _Projection(tree, src_tokens, tgt_tokens, links).run()


def validate(bitree, pair=None):
    """Check the BilingualTree invariants; returns a list of problems (empty when valid)."""
    problems = []

    for node in _walk(bitree):
        if node.is_leaf:
            if not node.tgt_pieces and not node.src_pieces:
                problems.append(f"empty leaf {node.label!r}")
        elif sorted(node.src_perm) != list(range(len(node.children))):
            problems.append(f"invalid permutation {list(node.src_perm)} at node {node.label!r}")

    if any(p.startswith('invalid permutation') for p in problems):
        return problems

    if pair is not None:
        if [t.surface for t in bitree.tgt_tokens()] != pair.tgt_words:
            problems.append("target order violated")
        if [t.surface for t in bitree.src_tokens()] != pair.src_words:
            problems.append("source order violated")
        if pair.alignment:
            src_leaf = {}
            tgt_leaf = {}
            for k, leaf in enumerate(bitree.leaves()):
                for s in leaf.src_positions:
                    src_leaf[s] = k
                for t in leaf.tgt_positions:
                    tgt_leaf[t] = k
            for s, t in sorted(pair.alignment):
                if src_leaf.get(s) != tgt_leaf.get(t):
                    problems.append(f"link {s}-{t} crosses a leaf boundary")
    else:
        tgt_positions = [p for leaf in bitree.leaves() for p in leaf.tgt_positions]
        if tgt_positions != sorted(tgt_positions):
            problems.append("target order violated")
        src_positions = [p for leaf in bitree.src_order_leaves() for p in leaf.src_positions]
        if src_positions != sorted(src_positions):
            problems.append("source order violated")
    return problems


def _walk(node):
    yield node
    for child in node.children:
        yield from _walk(child)


def write_debug_trees(trees, stream):
    """One bracketed bilingual tree per line; unprojectable sentences are written as '()'."""
    for bitree in trees:
        stream.write((bitree.to_debug_string() if bitree is not None else '()') + '\n')


@dataclass(frozen=True)
class ProjectionResult:
    pair: object
    bitree: Optional[BilingualTree]
    error: str = ''


def _project_one(pair, tree, links):
    if tree is None:
        return ProjectionResult(pair, None, 'missing tree')
    try:
        return ProjectionResult(pair, project(tree, links, pair.tgt_tokens, pair.src_tokens))
    except UnprojectableError as e:
        logger.warning(f"Sentence {pair.id} is unprojectable: {e}")
        return ProjectionResult(pair, None, str(e))
    except CorpusFormatError as e:
        raise CorpusFormatError(f"sentence {pair.id}: {e}") from None


def project_corpus(pairs, trees, alignments, workers=1):
    """Project every pair; results keep input order and unprojectable pairs carry their reason.

    Raises:
        CorpusFormatError: the three inputs differ in length, or a tree does not match its sentence
    """
    if not len(pairs) == len(trees) == len(alignments):
        raise CorpusFormatError(
            f"line count mismatch: {len(pairs)} sentence pairs, {len(trees)} trees, {len(alignments)} alignment lines")
    jobs = list(zip(pairs, trees, alignments))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda job: _project_one(*job), jobs))
    return [_project_one(*job) for job in jobs]
