import pytest

from corpus_io import LANG_AR, LANG_EN, Token
from cs_metrics import (burstiness, cmi, corpus_summary, en_fraction, i_index, lang_entropy, m_index,
                        sentence_metrics, switch_points)


def test_tag_string_and_tokens_agree():
    tokens = [Token('س', LANG_AR), Token('b', LANG_EN), Token('ص', LANG_AR)]
    assert switch_points(tokens) == switch_points('AR EN AR') == 2
    assert i_index(tokens) == pytest.approx(1.0)


def test_proportions():
    assert en_fraction('AR EN AR') == pytest.approx(1 / 3)
    assert en_fraction('') == 0.0
    assert cmi('AR EN AR') == pytest.approx(100 / 3)
    assert cmi('AR AR') == 0.0
    assert m_index('AR EN') == pytest.approx(1.0)
    assert m_index('AR AR') == 0.0
    assert lang_entropy('AR EN') == pytest.approx(1.0)
    assert lang_entropy('EN EN') == 0.0


def test_burstiness():
    # spans [2, 1]: sigma 0.5, mu 1.5
    assert burstiness('AR AR EN') == pytest.approx(-0.5)
    assert burstiness('AR AR') is None
    assert burstiness('') is None


def test_single_token_sentence():
    assert i_index('AR') == 0.0
    assert sentence_metrics([Token('س', LANG_AR)])['switch_points'] == 0


def test_corpus_summary():
    summary = corpus_summary(['AR EN AR'.split(), 'AR AR'.split(), 'AR EN'.split()])
    assert summary['sentences'] == 3
    assert summary['tokens'] == 7
    assert summary['switch_point_histogram'] == {'0': 1, '1': 1, '2': 1}
    assert summary['code_switched_sentences'] == 2
    assert summary['mean_switch_points'] == pytest.approx(1.0)


def test_empty_corpus_summary():
    summary = corpus_summary([])
    assert summary['sentences'] == 0
    assert summary['switch_point_histogram'] == {}
