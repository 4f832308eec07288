#!/usr/bin/env python3

"""
Align Corpus - unsupervised word alignment of a (segmented) parallel corpus

Trains the diagonal IBM Model 2 aligner in both directions, symmetrizes the
Viterbi alignments and writes one Pharaoh line per sentence pair
("english_index-arabic_index" pairs). When an external alignment file is
given, training is skipped and that file is checked and copied instead.

Usage:
    python3 02.align_corpus.py --corpus segmented.tsv --out alignments.txt [--iterations 5]
"""

import io
import os
import sys
import datetime

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from aligner import AlignerConfig, BidirectionalAligner, alignment_scores, fanout_stats
from corpus_io import CorpusFormatError, ParallelFormat, read_alignment_path, read_parallel_path, validate_alignment, write_pharaoh
from log_utils import get_stage_loggers

info_logger, error_logger = get_stage_loggers()


def load_alignments(path, pairs):
    """Read a Pharaoh file that must line up with pairs"""
    alignments = read_alignment_path(path)
    if len(alignments) != len(pairs):
        raise CorpusFormatError(f"line count mismatch at line {min(len(alignments), len(pairs)) + 1}: "
                                f"{len(pairs)} sentence pairs, {len(alignments)} alignment lines")
    for line_no, (pair, links) in enumerate(zip(pairs, alignments), start=1):
        try:
            validate_alignment(links, len(pair.src_tokens), len(pair.tgt_tokens), pair.id)
        except CorpusFormatError as e:
            raise CorpusFormatError(f"{e} at line {line_no}") from None
    return alignments


def summarize_links(alignments):
    stats = {'one_to_one': 0, 'one_to_many': 0, 'many_to_one': 0, 'links': 0, 'unaligned_pairs': 0}
    for links in alignments:
        stats['links'] += len(links)
        if not links:
            stats['unaligned_pairs'] += 1
        for key, value in fanout_stats(links).items():
            stats[key] += value
    return stats


def run_align(corpus_path, out_path, aligner_cfg=None, external_alignments=None, ttable_path=None, gold_path=None):
    """Align the corpus and write Pharaoh lines to out_path

    Args:
        corpus_path (str): "id<TAB>english<TAB>arabic" corpus written by the segment stage
        out_path (str): alignment output
        aligner_cfg (AlignerConfig): EM and symmetrization settings
        external_alignments (str): use this Pharaoh file instead of training
        ttable_path (str): if set, dump the forward translation table here
        gold_path (str): optional gold Pharaoh file for precision / recall / AER

    Returns:
        dict: {"success", "message", "stats"}
    """
    aligner_cfg = aligner_cfg or AlignerConfig(config.ALIGNER_ITERATIONS, config.ALIGNER_TENSION,
                                               config.ALIGNER_P_NULL, config.ALIGNER_SYMMETRIZATION,
                                               seed=config.DEFAULT_SEED, workers=config.MAX_WORKERS)
    pairs = read_parallel_path(corpus_path, ParallelFormat('tsv', id_column=True))
    if not pairs:
        raise ValueError(f"Corpus {corpus_path} has no sentence pairs")

    stats = {'pairs': len(pairs)}
    if external_alignments:
        alignments = load_alignments(external_alignments, pairs)
        stats['source'] = 'external'
        print(f"[{datetime.datetime.now()}] Using external alignments from {external_alignments}")
    else:
        aligner = BidirectionalAligner(aligner_cfg).fit(pairs)
        for direction, table in (('forward', aligner.forward_table), ('reverse', aligner.reverse_table)):
            for iteration, log_likelihood in enumerate(table.log_likelihoods, start=1):
                print(f"[{datetime.datetime.now()}] {direction} EM iteration {iteration}: log-likelihood {log_likelihood:.4f}")
        alignments = [aligner.align(pair) for pair in pairs]
        stats['source'] = 'trained'
        stats['symmetrization'] = aligner_cfg.symmetrization
        stats['log_likelihood'] = {'forward': aligner.forward_table.log_likelihoods,
                                   'reverse': aligner.reverse_table.log_likelihoods}
        if ttable_path:
            with io.open(ttable_path, 'w', encoding='utf-8') as f:
                aligner.forward_table.dump_tsv(f)

    stats.update(summarize_links(alignments))

    if gold_path:
        gold = load_alignments(gold_path, pairs)
        predicted = {(k, s, t) for k, links in enumerate(alignments) for s, t in links}
        reference = {(k, s, t) for k, links in enumerate(gold) for s, t in links}
        stats['gold'] = alignment_scores(predicted, reference)

    out_dir = os.path.dirname(out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        for links in alignments:
            f.write(write_pharaoh(links) + '\n')

    message = f"Aligned {len(pairs)} pairs, {stats['links']} links ({stats['source']})"
    info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": True, "message": message, "stats": stats}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Word-align a parallel corpus (English -> Arabic)')
    parser.add_argument('--corpus', required=True, help='"id<TAB>english<TAB>arabic" corpus')
    parser.add_argument('--out', required=True, help='Pharaoh output path')
    parser.add_argument('--iterations', type=int, default=config.ALIGNER_ITERATIONS)
    parser.add_argument('--tension', type=float, default=config.ALIGNER_TENSION)
    parser.add_argument('--p-null', type=float, default=config.ALIGNER_P_NULL)
    parser.add_argument('--symmetrization', default=config.ALIGNER_SYMMETRIZATION)
    parser.add_argument('--workers', type=int, default=config.MAX_WORKERS)
    parser.add_argument('--external', help='Use this Pharaoh file instead of training')
    parser.add_argument('--ttable', help='Write the forward translation table here')
    parser.add_argument('--gold', help='Gold Pharaoh file to score against')

    args = parser.parse_args()

    try:
        cfg = AlignerConfig(args.iterations, args.tension, args.p_null, args.symmetrization,
                            seed=config.DEFAULT_SEED, workers=args.workers)
        result = run_align(args.corpus, args.out, cfg, args.external, args.ttable, args.gold)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"Alignment failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
