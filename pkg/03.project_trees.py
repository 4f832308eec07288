#!/usr/bin/env python3

"""
Project Trees - carry English parse trees over to the Arabic side

Reads the segmented corpus, one English PTB tree per line and the Pharaoh
alignments, builds a bilingual tree per sentence and writes the debug dump
(one bracketed tree per line, leaves as "arabic|english", "()" for skipped
sentences). Unprojectable sentences are counted, not fixed.

Usage:
    python3 03.project_trees.py --corpus segmented.tsv --trees trees.ptb --alignments alignments.txt --out bitrees.txt
"""

import io
import os
import sys
import datetime
from collections import Counter

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from corpus_io import ParallelFormat, read_alignment_path, read_parallel_path, read_tree_path
from log_utils import get_stage_loggers
from projector import project_corpus, validate, write_debug_trees

info_logger, error_logger = get_stage_loggers()


def load_projections(corpus_path, trees_path, alignments_path, workers=1):
    """Read the three line-aligned inputs and project every sentence"""
    pairs = read_parallel_path(corpus_path, ParallelFormat('tsv', id_column=True))
    trees = read_tree_path(trees_path)
    alignments = read_alignment_path(alignments_path)
    return project_corpus(pairs, trees, alignments, workers), alignments


def projection_stats(results, alignments):
    reasons = Counter(r.error for r in results if r.bitree is None)
    projected = [r for r in results if r.bitree is not None]
    invalid = 0
    for r, links in zip(results, alignments):
        if r.bitree is None:
            continue
        problems = validate(r.bitree, r.pair.with_alignment(links))
        if problems:
            invalid += 1
            error_logger.error(f"Sentence {r.pair.id}: {'; '.join(problems)}")
    return {
        'sentences_in': len(results),
        'projected': len(projected),
        'unprojectable': len(results) - len(projected),
        'invalid': invalid,
        'leaves': sum(len(r.bitree.leaves()) for r in projected),
        'unprojectable_reasons': dict(sorted(reasons.items())),
    }


def run_project(corpus_path, trees_path, alignments_path, out_path, workers=None):
    """Project all sentences and write the bilingual tree dump

    Returns:
        dict: {"success", "message", "stats"}
    """
    workers = workers or config.MAX_WORKERS
    results, alignments = load_projections(corpus_path, trees_path, alignments_path, workers)
    stats = projection_stats(results, alignments)

    out_dir = os.path.dirname(out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        write_debug_trees([r.bitree for r in results], f)

    message = f"Projected {stats['projected']}/{stats['sentences_in']} sentences, {stats['unprojectable']} unprojectable"
    if stats['unprojectable']:
        info_logger.warning(message)
    else:
        info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": stats['invalid'] == 0, "message": message, "stats": stats}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Project English trees onto the Arabic side')
    parser.add_argument('--corpus', required=True, help='"id<TAB>english<TAB>arabic" corpus')
    parser.add_argument('--trees', required=True, help='One English PTB tree per line')
    parser.add_argument('--alignments', required=True, help='Pharaoh alignments')
    parser.add_argument('--out', required=True, help='Bilingual tree dump')
    parser.add_argument('--workers', type=int, default=config.MAX_WORKERS)

    args = parser.parse_args()

    try:
        result = run_project(args.corpus, args.trees, args.alignments, args.out, args.workers)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"Projection failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
