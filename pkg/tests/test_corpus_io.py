import io

import pytest

from corpus_io import (LANG_AR, LANG_EN, AlignmentLink, CorpusFormatError, ParallelFormat, SentencePair, Token,
                       read_cs_corpus, read_parallel, read_parallel_path, read_pharaoh, read_ptb, read_tree_file,
                       write_cs_corpus, write_parallel, write_pharaoh)
from generator import CSCandidate


def test_read_parallel_tsv_assigns_line_ids():
    pairs = read_parallel(io.StringIO("the boy\tالولد\nhe reads\tيقرأ\n"))
    assert [p.id for p in pairs] == ['1', '2']
    assert pairs[0].src_words == ['the', 'boy']
    assert pairs[0].tgt_tokens[0].lang == LANG_AR


def test_read_parallel_id_column_and_blank_lines():
    text = "a7\tthe boy\tالولد\n\nb9\the reads\tيقرأ\n"
    pairs = read_parallel(io.StringIO(text), ParallelFormat('tsv', id_column=True))
    assert [p.id for p in pairs] == ['a7', 'b9']


def test_read_parallel_paired_files_must_line_up():
    with pytest.raises(CorpusFormatError, match='line count mismatch at line 2'):
        read_parallel(io.StringIO("a\nb\n"), ParallelFormat('paired'), io.StringIO("ا\n"))


def test_read_parallel_reports_line_numbers():
    with pytest.raises(CorpusFormatError, match='at line 2'):
        read_parallel(io.StringIO("a\tا\nonly one column\n"))
    with pytest.raises(CorpusFormatError, match='empty target side at line 1'):
        read_parallel(io.StringIO("a\t \n"))


def test_pre_segmented_tokens_are_morphemes():
    pairs = read_parallel(io.StringIO("the book\tال+ +كتاب\n"))
    assert all(t.is_morpheme for t in pairs[0].tgt_tokens)


def test_write_parallel_reads_back():
    pairs = read_parallel(io.StringIO("the boy\tال+ +ولد\n"))
    out = io.StringIO()
    write_parallel(pairs, out)
    assert out.getvalue() == "1\tthe boy\tال+ +ولد\n"
    again = read_parallel(io.StringIO(out.getvalue()), ParallelFormat('tsv', id_column=True))
    assert again == pairs


def test_missing_corpus_names_the_path(tmp_path):
    missing = str(tmp_path / 'nope.tsv')
    with pytest.raises(FileNotFoundError, match='nope.tsv'):
        read_parallel_path(missing)


def test_pharaoh_parsing():
    assert read_pharaoh("0-1 2-0") == {AlignmentLink(0, 1), AlignmentLink(2, 0)}
    assert read_pharaoh("") == frozenset()
    assert write_pharaoh({(2, 0), (0, 1)}) == "0-1 2-0"
    with pytest.raises(CorpusFormatError):
        read_pharaoh("0:1")


def test_alignment_out_of_bounds_rejected():
    with pytest.raises(CorpusFormatError, match='out of bounds'):
        SentencePair('1', (Token('a', LANG_EN),), (Token('ا', LANG_AR),), frozenset({AlignmentLink(0, 3)}))


def test_read_ptb_spans():
    tree = read_ptb('(S (NP (DT the) (NN boy)) (VP (VBZ reads)))')
    assert tree.words() == ['the', 'boy', 'reads']
    assert tree.span == (0, 3)
    assert tree.children[1].span == (2, 3)
    assert tree.to_ptb() == '(S (NP (DT the) (NN boy)) (VP (VBZ reads)))'


def test_read_ptb_errors():
    with pytest.raises(CorpusFormatError, match='unbalanced'):
        read_ptb('(S (NP (DT the))')
    with pytest.raises(CorpusFormatError):
        read_ptb('   ')


def test_tree_file_keeps_blank_lines_and_line_numbers():
    trees = read_tree_file(io.StringIO("(S (NN a))\n\n(S (NN b))\n"))
    assert trees[1] is None and len(trees) == 3
    with pytest.raises(CorpusFormatError, match='at line 2'):
        read_tree_file(io.StringIO("(S (NN a))\n(S (NN b)\n"))


def test_cs_corpus_tagged_round_trip():
    candidate = CSCandidate((Token('الولد', LANG_AR), Token('reads', LANG_EN)), 's1')
    out = io.StringIO()
    write_cs_corpus([candidate], out, tagged=True, with_ids=True)
    assert out.getvalue() == "s1\tالولد/AR reads/EN\n"
    rows = read_cs_corpus(io.StringIO(out.getvalue()))
    assert rows == [('s1', [Token('الولد', LANG_AR), Token('reads', LANG_EN)])]

    plain = io.StringIO()
    write_cs_corpus([candidate], plain, tagged=False)
    assert plain.getvalue() == "الولد reads\n"


def test_untagged_token_in_cs_corpus_is_an_error():
    with pytest.raises(CorpusFormatError, match='at line 1'):
        read_cs_corpus(io.StringIO("الولد reads\n"))
