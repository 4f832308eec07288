#!/usr/bin/env python3

"""
Sample CS Text - filter the candidate corpus and draw the final sample

Drops candidates that do not start with an Arabic token, that are more than
max_en_fraction English or that contain no switch, then samples k of the rest
either uniformly ("random") or against a switch-point histogram ("spf").

Outputs:
    <out>              untagged surface text, one sentence per line
    <out>.tagged.txt   the same sentences with /AR /EN tags and pair ids
    <out>.stats.json   seed, method, drop counts, bucket histogram and metrics

Usage:
    python3 05.sample_cs_text.py --candidates candidates.txt --out sampled.txt [--method spf] [--k 1000] [--seed 13]
"""

import io
import os
import sys
import datetime
from collections import Counter

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from corpus_io import read_cs_path, write_cs_corpus, write_json_report
from cs_metrics import corpus_summary
from generator import CSCandidate
from log_utils import get_stage_loggers
from sampler import SamplerConfig, load_spf_target, sample

info_logger, error_logger = get_stage_loggers()

DROP_REASONS = ('not_arabic_initial', 'too_much_english', 'monolingual')


def sidecar_paths(out_path):
    root, _ = os.path.splitext(out_path)
    return root + '.tagged.txt', root + '.stats.json'


def load_candidates(path):
    return [CSCandidate(tuple(tokens), pair_id) for pair_id, tokens in read_cs_path(path)]


def run_sample(candidates_path, out_path, sampler_cfg=None):
    """Filter and sample a tagged candidate corpus

    Returns:
        dict: {"success", "message", "stats"}
    """
    sampler_cfg = sampler_cfg or SamplerConfig(config.SAMPLING_METHOD, config.SAMPLE_SIZE, config.DEFAULT_SEED,
                                               config.MAX_EN_FRACTION, config.REQUIRE_AR_INITIAL,
                                               load_spf_target(config.SPF_TARGET_PATH))
    candidates = load_candidates(candidates_path)
    counts = Counter()
    sampled, counts = sample(candidates, sampler_cfg, counts)

    tagged_path, stats_path = sidecar_paths(out_path)
    out_dir = os.path.dirname(out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        write_cs_corpus(sampled, f, tagged=False)
    with io.open(tagged_path, 'w', encoding='utf-8') as f:
        write_cs_corpus(sampled, f, tagged=True, with_ids=True)

    stats = {
        'seed': sampler_cfg.seed,
        'method': sampler_cfg.method,
        'k': sampler_cfg.k,
        'max_en_fraction': sampler_cfg.max_en_fraction,
        'candidates_in': counts['candidates_in'],
        'candidates_kept': counts['candidates_kept'],
        'sampled': counts['sampled'],
        'dropped': {reason: counts[reason] for reason in DROP_REASONS},
        'metrics': corpus_summary([c.tokens for c in sampled]),
    }
    if sampler_cfg.method == 'spf':
        stats['spf_target'] = sampler_cfg.spf_target
        stats['spf_shortfall'] = counts['spf_shortfall']
        stats['spf_uncovered'] = counts['spf_uncovered']
        stats['bucket_histogram'] = dict(sorted(Counter(c.bucket for c in sampled).items()))
    write_json_report(stats, stats_path)

    message = (f"Sampled {stats['sampled']} of {stats['candidates_kept']} acceptable candidates "
               f"({stats['candidates_in']} in, method {sampler_cfg.method}, seed {sampler_cfg.seed})")
    if stats['sampled'] < sampler_cfg.k:
        info_logger.warning(f"{message}; fewer than k={sampler_cfg.k}")
    else:
        info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": True, "message": message, "stats": stats}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Filter and sample generated code-switched text')
    parser.add_argument('--candidates', required=True, help='Tagged candidate corpus from the generate stage')
    parser.add_argument('--out', required=True, help='Sampled corpus (untagged)')
    parser.add_argument('--method', choices=('random', 'spf'), default=config.SAMPLING_METHOD)
    parser.add_argument('--k', type=int, default=config.SAMPLE_SIZE)
    parser.add_argument('--seed', type=int, default=config.DEFAULT_SEED)
    parser.add_argument('--max-en-fraction', type=float, default=config.MAX_EN_FRACTION)
    parser.add_argument('--spf-target', default=config.SPF_TARGET_PATH, help='JSON switch-point histogram')

    args = parser.parse_args()

    try:
        cfg = SamplerConfig(args.method, args.k, args.seed, args.max_en_fraction, config.REQUIRE_AR_INITIAL,
                            load_spf_target(args.spf_target))
        result = run_sample(args.candidates, args.out, cfg)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"Sampling failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
