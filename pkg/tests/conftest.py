import os
import sys
import tempfile
import importlib.util

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

import local_config

# stage scripts create their loggers at import time
local_config.LOGS_DIRECTORY = tempfile.mkdtemp(prefix='cs-pipeline-logs-')

from corpus_io import LANG_AR, LANG_EN, SentencePair, Token, read_ptb

FIXTURE_DIR = os.path.join(ROOT, 'fixtures', 'toy')


def load_stage(filename):
    """Import a numbered stage script (e.g. '04.generate_cs_text.py')"""
    spec = importlib.util.spec_from_file_location(filename.replace('.', '_'), os.path.join(ROOT, filename))
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def ar(*words):
    return tuple(Token(w, LANG_AR, w.startswith('+') or w.endswith('+')) for w in words)


def en(*words):
    return tuple(Token(w, LANG_EN) for w in words)


def make_pair(src, tgt, pair_id='1', links=None):
    pair = SentencePair(pair_id, en(*src.split()), ar(*tgt.split()))
    return pair.with_alignment(links) if links is not None else pair


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture
def two_word_case(tmp_path):
    """One projectable sentence whose tree has four renderings"""
    corpus = tmp_path / 'corpus.tsv'
    corpus.write_text('s1\tjohn sleeps\tجون ينام\n', encoding='utf-8')
    trees = tmp_path / 'trees.ptb'
    trees.write_text('(S (NP (NNP john)) (VP (VBZ sleeps)))\n', encoding='utf-8')
    alignments = tmp_path / 'alignments.txt'
    alignments.write_text('0-0 1-1\n', encoding='utf-8')
    return str(corpus), str(trees), str(alignments)


@pytest.fixture
def reordered_tree():
    return read_ptb('(S (NP (DT the) (NN boy)) (VP (VBZ reads) (NP (DT the) (NN book))))')
