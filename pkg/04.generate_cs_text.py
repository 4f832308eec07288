#!/usr/bin/env python3

"""
Generate CS Text - enumerate code-switched renderings for every sentence

Projects each (segmented) sentence pair onto its English tree, enumerates the
renderings allowed by the equivalence constraint and writes them as a tagged
candidate corpus ("pair_id<TAB>word/AR word/EN ..."). A JSON stats file is
written next to the corpus.

Usage:
    python3 04.generate_cs_text.py --corpus segmented.tsv --trees trees.ptb --alignments alignments.txt --out candidates.txt
"""

import io
import os
import sys
import datetime
from concurrent.futures import ThreadPoolExecutor

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from corpus_io import ParallelFormat, read_alignment_path, read_parallel_path, read_tree_path, write_cs_corpus, write_json_report
from cs_metrics import corpus_summary
from generator import GeneratorConfig, enumerate_candidates
from log_utils import get_stage_loggers
from projector import project_corpus

info_logger, error_logger = get_stage_loggers()


def stats_path_for(out_path):
    root, _ = os.path.splitext(out_path)
    return root + '.stats.json'


def generate_all(results, generator_cfg, workers=1):
    """Candidates per projection result, in input order; returns (candidate lists, truncated flags)"""
    def one(result):
        if result.bitree is None:
            return [], False
        return enumerate_candidates(result.bitree, generator_cfg, result.pair.id)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outputs = list(executor.map(one, results))
    else:
        outputs = [one(r) for r in results]
    return [c for c, _ in outputs], [t for _, t in outputs]


def run_generate(corpus_path, trees_path, alignments_path, out_path, generator_cfg=None, workers=None):
    """Write the tagged candidate corpus and its stats

    Returns:
        dict: {"success", "message", "stats"}
    """
    generator_cfg = generator_cfg or GeneratorConfig(config.MAX_CANDIDATES_PER_SENTENCE, config.GENERATOR_DEDUP)
    workers = workers or config.MAX_WORKERS

    pairs = read_parallel_path(corpus_path, ParallelFormat('tsv', id_column=True))
    trees = read_tree_path(trees_path)
    alignments = read_alignment_path(alignments_path)
    results = project_corpus(pairs, trees, alignments, workers)

    per_sentence, truncated = generate_all(results, generator_cfg, workers)
    candidates = [c for sentence in per_sentence for c in sentence]

    out_dir = os.path.dirname(out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        write_cs_corpus(candidates, f, tagged=True, with_ids=True)

    stats = {
        'sentences_in': len(results),
        'unprojectable': sum(1 for r in results if r.bitree is None),
        'candidates_out': len(candidates),
        'truncated': sum(truncated),
        'max_candidates_per_sentence': generator_cfg.max_candidates_per_sentence,
        'metrics': corpus_summary([c.tokens for c in candidates]),
    }
    write_json_report(stats, stats_path_for(out_path))

    message = (f"Generated {stats['candidates_out']} candidates from {stats['sentences_in']} sentences "
               f"({stats['unprojectable']} unprojectable, {stats['truncated']} truncated)")
    info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": True, "message": message, "stats": stats}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Generate Arabic-English code-switched candidates')
    parser.add_argument('--corpus', required=True, help='"id<TAB>english<TAB>arabic" corpus')
    parser.add_argument('--trees', required=True, help='One English PTB tree per line')
    parser.add_argument('--alignments', required=True, help='Pharaoh alignments')
    parser.add_argument('--out', required=True, help='Tagged candidate corpus')
    parser.add_argument('--max-candidates', type=int, default=config.MAX_CANDIDATES_PER_SENTENCE)
    parser.add_argument('--no-dedup', action='store_true')
    parser.add_argument('--workers', type=int, default=config.MAX_WORKERS)

    args = parser.parse_args()

    try:
        cfg = GeneratorConfig(args.max_candidates, not args.no_dedup)
        result = run_generate(args.corpus, args.trees, args.alignments, args.out, cfg, args.workers)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"Generation failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
