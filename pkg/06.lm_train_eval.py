#!/usr/bin/env python3

"""
LM Train / Eval - Kneser-Ney n-gram model over the training corpora, perplexity on test sets

train: concatenates the training corpora (e.g. monolingual text plus the
       sampled CS corpus), trains the model and writes it as ARPA together
       with a small JSON stats file.
eval:  scores every test set with a trained ARPA model, or with a model
       trained on the fly from --train corpora, and writes one JSON report
       holding an EvalReport per test set. With --baseline (a report written
       by an earlier eval run) the relative perplexity gain and OOV change
       are added per test set.

Usage:
    python3 06.lm_train_eval.py train --train mono.txt sampled.txt --out lm.arpa [--order 3]
    python3 06.lm_train_eval.py eval --model lm.arpa --test test.txt --out report.json [--baseline base.json]
"""

import os
import sys
import datetime

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from corpus_io import read_json_report, read_token_path, write_json_report
from log_utils import get_stage_loggers
from ngram_lm import EvalReport, LMConfig, compare_runs, evaluate, read_arpa_file, train_lm, write_arpa_file

info_logger, error_logger = get_stage_loggers()


def testset_id(path):
    return os.path.basename(path)


def load_corpora(paths):
    """Token sequences of every corpus, concatenated in the given order"""
    sentences = []
    for path in paths:
        sentences.extend(read_token_path(path))
    return sentences


def _ensure_parent(path):
    out_dir = os.path.dirname(path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)


def run_lm_train(train_paths, out_path, lm_cfg=None):
    """Train on the concatenated corpora and write the ARPA model

    Returns:
        dict: {"success", "message", "stats"}
    """
    lm_cfg = lm_cfg or LMConfig(config.LM_ORDER, config.LM_UNK_POLICY, config.MAX_WORKERS)
    if not train_paths:
        raise ValueError("No training corpora given")
    sentences = load_corpora(train_paths)
    model = train_lm(sentences, lm_cfg)

    _ensure_parent(out_path)
    write_arpa_file(model, out_path)
    stats = {
        'train': [testset_id(p) for p in train_paths],
        'order': model.order,
        'sentences': len([s for s in sentences if s]),
        'tokens': sum(len(s) for s in sentences),
        'vocab_size': len(model.vocab),
        'discounts': {str(k): model.discounts[k] for k in sorted(model.discounts)},
    }
    root, _ = os.path.splitext(out_path)
    write_json_report(stats, root + '.stats.json')

    message = f"Trained order-{model.order} LM on {stats['sentences']} sentences, |V|={stats['vocab_size']}"
    info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": True, "message": message, "stats": stats}


def load_baseline_reports(path):
    """EvalReports keyed by testset id, from a full eval report or a single EvalReport JSON"""
    data = read_json_report(path)
    rows = data['reports'] if 'reports' in data else [data]
    try:
        reports = [EvalReport.from_dict(row) for row in rows]
    except TypeError as e:
        raise ValueError(f"Baseline report {path} is malformed: {e}") from None
    return {r.testset_id: r for r in reports}


def run_lm_eval(test_paths, out_path, model_path=None, train_paths=None, lm_cfg=None, baseline_path=None):
    """Score every test set and write the combined report

    Exactly one of model_path and train_paths must be given.

    Raises:
        ValueError: no model source, empty test set, or a baseline that does
            not cover a test set / uses another unk policy
    """
    lm_cfg = lm_cfg or LMConfig(config.LM_ORDER, config.LM_UNK_POLICY, config.MAX_WORKERS)
    if bool(model_path) == bool(train_paths):
        raise ValueError("Give either a trained model or training corpora, not both or neither")
    if not test_paths:
        raise ValueError("No test sets given")

    if model_path:
        if not os.path.exists(model_path):
            raise FileNotFoundError(f"Model not found: {model_path}")
        model = read_arpa_file(model_path)
        source = {'model': testset_id(model_path)}
    else:
        model = train_lm(load_corpora(train_paths), lm_cfg)
        source = {'train': [testset_id(p) for p in train_paths]}

    baseline = load_baseline_reports(baseline_path) if baseline_path else None

    reports = []
    comparisons = []
    for path in test_paths:
        report = evaluate(model, read_token_path(path), lm_cfg.unk_policy, testset_id(path), lm_cfg.workers)
        reports.append(report)
        print(f"[{datetime.datetime.now()}] {report.testset_id}: PPL {report.ppl:.4f}, "
              f"OOV {report.oov_count}, tokens {report.total_tokens}")
        if baseline is not None:
            if report.testset_id not in baseline:
                raise ValueError(f"Baseline report {baseline_path} has no entry for testset {report.testset_id!r}")
            comparison = compare_runs(baseline[report.testset_id], report)
            comparisons.append(comparison)
            print(f"[{datetime.datetime.now()}] {report.testset_id}: relative gain "
                  f"{comparison['relative_gain'] * 100:.1f}% over baseline")

    result = dict(source, order=model.order, unk_policy=lm_cfg.unk_policy, reports=[r.to_dict() for r in reports])
    if baseline is not None:
        result['comparisons'] = comparisons
    _ensure_parent(out_path)
    write_json_report(result, out_path)

    message = f"Evaluated {len(reports)} test set(s) with an order-{model.order} model"
    info_logger.info(message)
    return {"success": True, "message": message, "stats": result}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Train and evaluate the n-gram language model')
    sub = parser.add_subparsers(dest='command', required=True)

    train = sub.add_parser('train', help='Train and write an ARPA model')
    train.add_argument('--train', nargs='+', required=True, help='Training corpora, one sentence per line')
    train.add_argument('--out', required=True, help='ARPA output path')
    train.add_argument('--order', type=int, default=config.LM_ORDER)

    ev = sub.add_parser('eval', help='Perplexity and OOV per test set')
    ev.add_argument('--model', help='ARPA model to score with')
    ev.add_argument('--train', nargs='+', help='Train a model on these corpora instead')
    ev.add_argument('--test', nargs='+', required=True, help='Test corpora')
    ev.add_argument('--out', required=True, help='JSON report path')
    ev.add_argument('--order', type=int, default=config.LM_ORDER)
    ev.add_argument('--unk-policy', choices=('map_to_unk', 'exclude'), default=config.LM_UNK_POLICY)
    ev.add_argument('--baseline', help='Earlier report to compare against')

    args = parser.parse_args()

    try:
        if args.command == 'train':
            result = run_lm_train(args.train, args.out, LMConfig(args.order, config.LM_UNK_POLICY, config.MAX_WORKERS))
        else:
            cfg = LMConfig(args.order, args.unk_policy, config.MAX_WORKERS)
            result = run_lm_eval(args.test, args.out, args.model, args.train, cfg, args.baseline)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"LM stage failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
