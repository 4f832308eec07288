#!/usr/bin/env python3

"""
Segment Corpus - split Arabic clitics on the target side of a parallel corpus

Reads a parallel corpus (TSV, TSV with id column, or two line-aligned files)
and writes "id<TAB>english<TAB>arabic" lines with the Arabic side segmented.
With segmentation disabled the corpus is normalized to the same layout and
passed through, so the later stages can run on unsegmented text.

Usage:
    python3 01.segment_corpus.py --corpus data.tsv --out segmented.tsv [--no-segment]
"""

import io
import os
import sys
import datetime

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config as config
from corpus_io import ParallelFormat, read_parallel_path, write_parallel
from log_utils import get_stage_loggers
from segmenter import CliticLexicon, SegmenterConfig, load_lexicon, segment_sentence

info_logger, error_logger = get_stage_loggers()


def segment_pairs(pairs, segmenter_cfg):
    """Return (segmented pairs, stats)"""
    if not segmenter_cfg.enabled:
        tokens = sum(len(p.tgt_tokens) for p in pairs)
        return list(pairs), {'enabled': False, 'pairs': len(pairs), 'tgt_tokens_in': tokens, 'tgt_tokens_out': tokens}

    if segmenter_cfg.lexicon_path:
        lexicon = load_lexicon(segmenter_cfg.lexicon_path, segmenter_cfg.min_stem)
    else:
        lexicon = CliticLexicon(min_stem=segmenter_cfg.min_stem)

    out = []
    tokens_in = 0
    tokens_out = 0
    for pair in pairs:
        tgt_tokens = segment_sentence(pair.tgt_tokens, lexicon)
        tokens_in += len(pair.tgt_tokens)
        tokens_out += len(tgt_tokens)
        out.append(pair.with_tgt_tokens(tgt_tokens))
    return out, {'enabled': True, 'pairs': len(pairs), 'tgt_tokens_in': tokens_in, 'tgt_tokens_out': tokens_out}


def run_segment(corpus_path, out_path, segmenter_cfg=None, id_column=False, tgt_path=None):
    """Segment the corpus and write it to out_path

    Returns:
        dict: {"success", "message", "stats"}
    """
    segmenter_cfg = segmenter_cfg or SegmenterConfig(config.SEGMENTATION_ENABLED, config.CLITIC_LEXICON_PATH,
                                                     config.SEGMENTER_MIN_STEM)
    layout = ParallelFormat('paired') if tgt_path else ParallelFormat('tsv', id_column)
    pairs = read_parallel_path(corpus_path, layout, tgt_path)
    if not pairs:
        raise ValueError(f"Corpus {corpus_path} has no sentence pairs")

    segmented, stats = segment_pairs(pairs, segmenter_cfg)

    out_dir = os.path.dirname(out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        write_parallel(segmented, f)

    message = (f"Segmented {stats['pairs']} pairs: {stats['tgt_tokens_in']} -> {stats['tgt_tokens_out']} Arabic tokens"
               if stats['enabled'] else f"Segmentation disabled, {stats['pairs']} pairs passed through")
    info_logger.info(message)
    print(f"[{datetime.datetime.now()}] {message}")
    return {"success": True, "message": message, "stats": stats}


def main():
    """Main function for command line usage"""
    import argparse

    parser = argparse.ArgumentParser(description='Segment the Arabic side of a parallel corpus')
    parser.add_argument('--corpus', required=True, help='TSV corpus "english<TAB>arabic", or the English file with --tgt')
    parser.add_argument('--tgt', help='Line-aligned Arabic file (two-file layout)')
    parser.add_argument('--id-column', action='store_true', help='First TSV column holds the sentence id')
    parser.add_argument('--out', required=True, help='Output TSV path')
    parser.add_argument('--lexicon', default=config.CLITIC_LEXICON_PATH, help='Clitic lexicon file')
    parser.add_argument('--min-stem', type=int, default=config.SEGMENTER_MIN_STEM)
    parser.add_argument('--no-segment', action='store_true', help='Pass the Arabic side through unsegmented')

    args = parser.parse_args()

    try:
        cfg = SegmenterConfig(not args.no_segment, args.lexicon, args.min_stem)
        result = run_segment(args.corpus, args.out, cfg, args.id_column, args.tgt)
        exit(0 if result["success"] else 1)
    except (ValueError, FileNotFoundError) as e:
        error_logger.error(f"Segmentation failed: {e}")
        print(f"Error: {e}")
        exit(2)


if __name__ == "__main__":
    main()
