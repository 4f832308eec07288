import json
import os

import pytest

import cs_pipeline_all
from conftest import FIXTURE_DIR, load_stage
from cs_pipeline_all import EXIT_OK, EXIT_USAGE, main

TOY_CONFIG = os.path.join(FIXTURE_DIR, 'pipeline.json')


def read_lines(path):
    with open(path, encoding='utf-8') as f:
        return f.read().splitlines()


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def test_generate_two_word_sentence(two_word_case, tmp_path):
    corpus, trees, alignments = two_word_case
    out = tmp_path / 'candidates.txt'
    code = main(['generate', '--corpus', corpus, '--trees', trees, '--alignments', alignments, '--output', str(out)])
    assert code == EXIT_OK
    assert read_lines(out) == ['s1\tجون/AR ينام/AR', 's1\tجون/AR sleeps/EN',
                               's1\tjohn/EN ينام/AR', 's1\tjohn/EN sleeps/EN']
    stats = read_json(tmp_path / 'candidates.stats.json')
    assert stats['candidates_out'] == 4
    assert stats['metrics']['switch_point_histogram'] == {'0': 2, '1': 2}


def test_unprojectable_sentence_is_counted_not_fatal(two_word_case, tmp_path):
    corpus, trees, _ = two_word_case
    alignments = tmp_path / 'empty.txt'
    alignments.write_text('\n', encoding='utf-8')
    out = tmp_path / 'candidates.txt'
    code = main(['generate', '--corpus', corpus, '--trees', trees, '--alignments', str(alignments),
                 '--output', str(out)])
    assert code == EXIT_OK
    assert read_lines(out) == []
    stats = read_json(tmp_path / 'candidates.stats.json')
    assert stats['unprojectable'] == 1
    assert stats['candidates_out'] == 0


def test_line_count_mismatch_is_a_usage_error(two_word_case, tmp_path):
    corpus, _, alignments = two_word_case
    trees = tmp_path / 'trees.ptb'
    trees.write_text('(S (NNP john) (VBZ sleeps))\n(S (NNP mary) (VBZ sleeps))\n', encoding='utf-8')
    code = main(['generate', '--corpus', corpus, '--trees', str(trees), '--alignments', alignments,
                 '--output', str(tmp_path / 'out.txt')])
    assert code == EXIT_USAGE


def test_missing_input_file(two_word_case, tmp_path):
    _, trees, alignments = two_word_case
    code = main(['generate', '--corpus', str(tmp_path / 'nope.tsv'), '--trees', trees, '--alignments', alignments,
                 '--output', str(tmp_path / 'out.txt')])
    assert code == EXIT_USAGE


def test_unknown_config_key(tmp_path):
    config = tmp_path / 'bad.json'
    config.write_text(json.dumps({'sampler': {'kk': 3}}), encoding='utf-8')
    assert main(['--config', str(config), 'pipeline']) == EXIT_USAGE


def test_missing_required_flag(tmp_path):
    assert main(['--out', str(tmp_path), 'sample']) == EXIT_USAGE


def test_sample_command(tmp_path):
    candidates = tmp_path / 'candidates.txt'
    candidates.write_text('1\tالولد/AR يقرأ/AR the/EN book/EN\n'
                          '1\tthe/EN boy/EN يقرأ/AR الكتاب/AR\n'
                          '2\tالبنت/AR تكتب/AR a/EN letter/EN\n', encoding='utf-8')
    out = tmp_path / 'sampled.txt'
    code = main(['--seed', '3', 'sample', '--candidates', str(candidates), '--method', 'random', '--k', '5',
                 '--max-en-fraction', '0.5', '--output', str(out)])
    assert code == EXIT_OK
    assert read_lines(out) == ['الولد يقرأ the book', 'البنت تكتب a letter']
    stats = read_json(tmp_path / 'sampled.stats.json')
    assert stats['seed'] == 3
    assert stats['dropped']['not_arabic_initial'] == 1
    assert read_lines(tmp_path / 'sampled.tagged.txt')[0] == '1\tالولد/AR يقرأ/AR the/EN book/EN'


def test_align_iterations_do_not_lower_likelihood(tmp_path):
    stage = load_stage('02.align_corpus.py')
    from aligner import AlignerConfig
    result = stage.run_align(os.path.join(FIXTURE_DIR, 'corpus.tsv'), str(tmp_path / 'alignments.txt'),
                             AlignerConfig(iterations=5))
    assert result['success']
    for direction in ('forward', 'reverse'):
        history = result['stats']['log_likelihood'][direction]
        assert len(history) == 5
        assert all(after >= before - 1e-9 for before, after in zip(history, history[1:]))
    assert len(read_lines(tmp_path / 'alignments.txt')) == 20


def test_lm_train_then_eval(tmp_path):
    model = tmp_path / 'lm.arpa'
    mono = os.path.join(FIXTURE_DIR, 'mono_ar.txt')
    test = os.path.join(FIXTURE_DIR, 'test_cs.txt')
    assert main(['lm-train', '--train', mono, '--order', '2', '--output', str(model)]) == EXIT_OK
    assert read_json(tmp_path / 'lm.stats.json')['order'] == 2

    report = tmp_path / 'eval.json'
    assert main(['lm-eval', '--model', str(model), '--test', test, '--order', '2', '--output', str(report)]) == EXIT_OK
    data = read_json(report)
    assert data['reports'][0]['testset_id'] == 'test_cs.txt'
    assert data['reports'][0]['oov_count'] > 0


def test_lm_eval_needs_exactly_one_model_source(tmp_path):
    test = os.path.join(FIXTURE_DIR, 'test_cs.txt')
    assert main(['lm-eval', '--test', test, '--output', str(tmp_path / 'eval.json')]) == EXIT_USAGE


def test_lm_eval_baseline_with_other_policy_is_rejected(tmp_path):
    test = os.path.join(FIXTURE_DIR, 'test_cs.txt')
    baseline = tmp_path / 'baseline.json'
    baseline.write_text(json.dumps({'testset_id': 'test_cs.txt', 'unk_policy': 'exclude', 'ppl': 100.0,
                                    'oov_count': 0, 'total_tokens': 10, 'log_prob_sum': -46.0}), encoding='utf-8')
    code = main(['lm-eval', '--train', os.path.join(FIXTURE_DIR, 'mono_ar.txt'), '--test', test,
                 '--baseline', str(baseline), '--output', str(tmp_path / 'eval.json')])
    assert code == EXIT_USAGE

    other = tmp_path / 'other.json'
    other.write_text(json.dumps({'testset_id': 'elsewhere.txt', 'unk_policy': 'map_to_unk', 'ppl': 100.0,
                                 'oov_count': 0, 'total_tokens': 10, 'log_prob_sum': -46.0}), encoding='utf-8')
    code = main(['lm-eval', '--train', os.path.join(FIXTURE_DIR, 'mono_ar.txt'), '--test', test,
                 '--baseline', str(other), '--output', str(tmp_path / 'eval.json')])
    assert code == EXIT_USAGE


def test_config_overrides_reach_stage_configs():
    args = cs_pipeline_all.build_parser().parse_args(['--config', TOY_CONFIG, '--seed', '99', '--workers', '2',
                                                      'pipeline'])
    cfg = cs_pipeline_all.resolve_config(args)
    assert cfg.seed == cfg.sampler.seed == cfg.aligner.seed == 99
    assert cfg.workers == cfg.aligner.workers == cfg.lm.workers == 2
    assert cfg.corpus == os.path.join(FIXTURE_DIR, 'corpus.tsv')


@pytest.fixture(scope='module')
def two_toy_runs(tmp_path_factory):
    runs = []
    for name in ('run1', 'run2'):
        out = tmp_path_factory.mktemp(name)
        assert main(['--config', TOY_CONFIG, '--out', str(out), 'pipeline']) == EXIT_OK
        runs.append(out)
    return runs


def test_pipeline_writes_every_stage_output(two_toy_runs):
    out = two_toy_runs[0]
    for name in ('segmented.tsv', 'alignments.txt', 'bitrees.txt', 'candidates.txt', 'sampled.txt', 'lm.arpa',
                 'lm_eval.json', 'lm_eval.baseline.json', 'run_manifest.json', 'run_status.json'):
        assert (out / name).exists(), name
    manifest = read_json(out / 'run_manifest.json')
    assert set(manifest['stages']) == set(cs_pipeline_all.PIPELINE_STAGES)
    assert manifest['seed'] == 13
    assert len(read_lines(out / 'bitrees.txt')) == 20
    assert 'comparisons' in read_json(out / 'lm_eval.json')


def test_pipeline_is_reproducible(two_toy_runs):
    first, second = two_toy_runs
    for name in ('sampled.txt', 'candidates.txt', 'lm_eval.json'):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    assert read_json(first / 'run_manifest.json')['stages'] == read_json(second / 'run_manifest.json')['stages']
    assert (read_json(first / 'run_manifest.json')['config_hash'] !=
            read_json(second / 'run_manifest.json')['config_hash'])


def test_sampled_lines_satisfy_constraints(two_toy_runs):
    for line in read_lines(two_toy_runs[0] / 'sampled.tagged.txt'):
        tags = [token.rsplit('/', 1)[1] for token in line.split('\t', 1)[1].split()]
        assert tags[0] == 'AR'
        assert tags.count('EN') / len(tags) <= 0.45
        assert 'EN' in tags


def test_failing_stage_aborts_and_keeps_partial_outputs(tmp_path):
    from run_state import RunManifest, RunState
    trees = tmp_path / 'trees.ptb'
    trees.write_text('\n'.join(read_lines(os.path.join(FIXTURE_DIR, 'trees.ptb'))[:19]) + '\n', encoding='utf-8')
    config = tmp_path / 'pipeline.json'
    config.write_text(json.dumps({
        'inputs': {'corpus': os.path.join(FIXTURE_DIR, 'corpus.tsv'), 'id_column': True, 'trees': 'trees.ptb'},
        'out_dir': 'run',
        'aligner': {'iterations': 2},
    }), encoding='utf-8')
    assert main(['--config', str(config), 'pipeline']) == EXIT_USAGE

    out = str(tmp_path / 'run')
    state = RunState(out)
    assert state.failed_stage() == 'project'
    assert state.stage_succeeded('segment') and state.stage_succeeded('align')
    assert not state.stage_succeeded('project')
    assert set(RunManifest.load(out).data['stages']) == {'segment', 'align'}
    assert os.path.exists(os.path.join(out, 'alignments.txt'))
    assert not os.path.exists(os.path.join(out, 'candidates.txt'))
