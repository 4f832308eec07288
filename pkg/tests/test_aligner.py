import io

import numpy as np
import pytest

from aligner import (AlignerConfig, BidirectionalAligner, TranslationTable, alignment_scores, fanout_stats, swap_pair,
                     symmetrize, train, transpose, viterbi_align)
from corpus_io import AlignmentLink


def dictionary_corpus(n_pairs=2000, n_types=20, seed=3):
    """Monotone word-for-word translations over a fixed dictionary, with gold links"""
    rng = np.random.default_rng(seed)
    pairs = []
    gold = []
    for _ in range(n_pairs):
        length = int(rng.integers(3, 9))
        ids = rng.integers(n_types, size=length)
        pairs.append(([f"e{i}" for i in ids], [f"f{i}" for i in ids]))
        gold.append({(k, k) for k in range(length)})
    return pairs, gold


def test_config_validation():
    with pytest.raises(ValueError):
        AlignerConfig(iterations=0)
    with pytest.raises(ValueError):
        AlignerConfig(symmetrization='grow')
    with pytest.raises(ValueError):
        AlignerConfig(p_null=1.0)


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train([])
    with pytest.raises(ValueError, match='pair 1'):
        train([([], ['f'])])


def test_translation_rows_are_distributions():
    pairs, _ = dictionary_corpus(200)
    table = train(pairs, AlignerConfig(iterations=3))
    for total in table.row_sums().values():
        assert total == pytest.approx(1.0, abs=1e-9)


def test_log_likelihood_non_decreasing():
    pairs, _ = dictionary_corpus(300)
    table = train(pairs, AlignerConfig(iterations=5))
    history = table.log_likelihoods
    assert len(history) == 5
    for before, after in zip(history, history[1:]):
        assert after >= before - 1e-9


def test_recovers_dictionary_alignment():
    pairs, gold = dictionary_corpus()
    aligner = BidirectionalAligner(AlignerConfig(iterations=5)).fit(pairs)
    predicted = {(k, s, t) for k, pair in enumerate(pairs) for s, t in aligner.align(pair)}
    reference = {(k, s, t) for k, links in enumerate(gold) for s, t in links}
    scores = alignment_scores(predicted, reference)
    assert scores['precision'] >= 0.90
    assert scores['recall'] >= 0.85


def test_chunked_training_matches_single_worker():
    pairs, _ = dictionary_corpus(120)
    single = train(pairs, AlignerConfig(iterations=2, workers=1))
    threaded = train(pairs, AlignerConfig(iterations=2, workers=4))
    assert threaded.log_likelihoods == pytest.approx(single.log_likelihoods, rel=1e-12)
    assert threaded.prob('e1', 'f1') == pytest.approx(single.prob('e1', 'f1'), rel=1e-12)


def test_viterbi_ties_go_to_the_smaller_source_index():
    table = TranslationTable({'<null>': {'f': 1e-9}, 'a': {'f': 0.5}, 'b': {'f': 0.5}})
    # target position 2 of 4 is equally far from both source positions
    links = viterbi_align(table, AlignerConfig(), (['a', 'b'], ['f', 'f', 'f', 'f']))
    assert AlignmentLink(0, 2) in links
    assert AlignmentLink(1, 2) not in links


def test_symmetrization_methods():
    fwd = {(0, 0), (1, 1), (2, 1)}
    rev = {(0, 0), (1, 1), (2, 2)}
    assert symmetrize(fwd, rev, 'intersection') == {(0, 0), (1, 1)}
    assert symmetrize(fwd, rev, 'union') == {(0, 0), (1, 1), (2, 1), (2, 2)}
    grown = symmetrize(fwd, rev, 'grow_diag_final')
    assert {(0, 0), (1, 1)} <= grown <= symmetrize(fwd, rev, 'union')
    assert (2, 2) in grown or (2, 1) in grown
    with pytest.raises(ValueError):
        symmetrize(fwd, rev, 'sideways')


def test_transpose():
    assert transpose({(0, 2), (1, 0)}) == {(2, 0), (0, 1)}


def test_fanout_stats():
    links = {(0, 0), (1, 1), (1, 2), (2, 3), (3, 3)}
    assert fanout_stats(links) == {'one_to_one': 1, 'one_to_many': 1, 'many_to_one': 1}


def test_alignment_scores():
    scores = alignment_scores({(0, 0), (1, 2)}, {(0, 0), (1, 1)})
    assert scores == {'precision': 0.5, 'recall': 0.5, 'aer': 0.5}
    assert alignment_scores(set(), set())['aer'] == 0.0


def test_translation_table_tsv_round_trip():
    pairs, _ = dictionary_corpus(50)
    table = train(pairs, AlignerConfig(iterations=1))
    out = io.StringIO()
    table.dump_tsv(out)
    loaded = TranslationTable.load_tsv(io.StringIO(out.getvalue()))
    assert loaded.table == table.table


def test_translation_table_tsv_holds_plain_floats():
    pairs, _ = dictionary_corpus(30)
    table = train(pairs, AlignerConfig(iterations=2))
    assert all(type(p) is float for row in table.table.values() for p in row.values())
    out = io.StringIO()
    table.dump_tsv(out)
    text = out.getvalue()
    assert 'np.' not in text
    for line in text.splitlines()[1:]:
        float(line.split('\t')[2])


def test_single_word_corpus_is_certain():
    table = train([(['a'], ['x'])] * 100, AlignerConfig(iterations=5))
    assert table.prob('a', 'x') == 1.0


def test_unknown_words_align_on_the_diagonal():
    empty = TranslationTable()
    assert viterbi_align(empty, AlignerConfig(), (['a', 'b'], ['x', 'y'])) == {(0, 0), (1, 1)}
    assert viterbi_align(empty, AlignerConfig(), (['a', 'b', 'c'], ['x', 'y', 'z'])) == {(0, 0), (1, 1), (2, 2)}


def test_swap_pair_trains_the_reverse_direction():
    pairs, _ = dictionary_corpus(100)
    assert swap_pair(pairs[0]) == (pairs[0][1], pairs[0][0])
    reverse = train([swap_pair(p) for p in pairs], AlignerConfig(iterations=5))
    row = reverse.table['f1']
    assert max(row, key=row.get) == 'e1'


def test_seed_perturbs_the_starting_table():
    pairs, _ = dictionary_corpus(100)
    uniform = train(pairs, AlignerConfig(iterations=1))
    seeded = train(pairs, AlignerConfig(iterations=1, seed=7))
    assert seeded.table == train(pairs, AlignerConfig(iterations=1, seed=7)).table
    assert seeded.prob('e1', 'f1') != uniform.prob('e1', 'f1')
    for total in seeded.row_sums().values():
        assert total == pytest.approx(1.0, abs=1e-9)
