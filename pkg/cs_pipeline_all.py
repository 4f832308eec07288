#!/usr/bin/env python3
"""
Arabic-English Code-Switching Text Pipeline
Runs the numbered stage scripts either one at a time or end to end:
- 01.segment_corpus        (segment)
- 02.align_corpus          (align)
- 03.project_trees         (project)
- 04.generate_cs_text      (generate)
- 05.sample_cs_text        (sample)
- 06.lm_train_eval         (lm-train, lm-eval)

"pipeline" runs segment -> align -> project -> generate -> sample -> lm-eval
inside one run directory and writes run_manifest.json there.

Exit status: 0 success, 2 usage or validation error, 1 runtime failure.
"""

import os
import sys
import datetime
import importlib.util

# Add current directory to path for local imports
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import local_config
from aligner import AlignerConfig
from generator import GeneratorConfig
from ngram_lm import LMConfig
from run_state import RunManifest, RunState
from sampler import SamplerConfig, load_spf_target
from segmenter import SegmenterConfig

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

STAGE_SCRIPTS = {
    'segment': '01.segment_corpus.py',
    'align': '02.align_corpus.py',
    'project': '03.project_trees.py',
    'generate': '04.generate_cs_text.py',
    'sample': '05.sample_cs_text.py',
    'lm': '06.lm_train_eval.py',
}
PIPELINE_STAGES = ('segment', 'align', 'project', 'generate', 'sample', 'lm')


def load_stage(stage):
    """Import a numbered stage script as a module"""
    filename = STAGE_SCRIPTS[stage]
    spec = importlib.util.spec_from_file_location(os.path.splitext(filename)[0].replace('.', '_'),
                                                  os.path.join(current_dir, filename))
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


class CSPipelineRunner:
    def __init__(self, pipeline_config):
        self.cfg = pipeline_config
        self.out_dir = pipeline_config.out_dir
        self.start_time = datetime.datetime.now()
        self.state = RunState(self.out_dir)
        self.state.begin_run()
        self.manifest = RunManifest(self.out_dir, pipeline_config)
        self.completed = []

    def path(self, filename):
        return os.path.join(self.out_dir, filename)

    def execute_segment(self):
        stage = load_stage('segment')
        return stage.run_segment(self.cfg.corpus, self.path(local_config.SEGMENTED_CORPUS_FILE),
                                 self.cfg.segmenter, self.cfg.id_column, self.cfg.corpus_tgt or None)

    def execute_align(self):
        stage = load_stage('align')
        return stage.run_align(self.path(local_config.SEGMENTED_CORPUS_FILE), self.path(local_config.ALIGNMENTS_FILE),
                               self.cfg.aligner, self.cfg.alignments or None,
                               None if self.cfg.alignments else self.path(local_config.TTABLE_FILE))

    def execute_project(self):
        stage = load_stage('project')
        return stage.run_project(self.path(local_config.SEGMENTED_CORPUS_FILE), self.cfg.trees,
                                 self.path(local_config.ALIGNMENTS_FILE), self.path(local_config.BITREES_FILE),
                                 self.cfg.workers)

    def execute_generate(self):
        stage = load_stage('generate')
        return stage.run_generate(self.path(local_config.SEGMENTED_CORPUS_FILE), self.cfg.trees,
                                  self.path(local_config.ALIGNMENTS_FILE), self.path(local_config.CANDIDATES_FILE),
                                  self.cfg.generator, self.cfg.workers)

    def execute_sample(self):
        stage = load_stage('sample')
        return stage.run_sample(self.path(local_config.CANDIDATES_FILE), self.path(local_config.SAMPLED_FILE),
                                self.cfg.sampler)

    def execute_lm(self):
        """Baseline (lm.train alone, or lm.baseline) against lm.train plus the sampled corpus"""
        if not self.cfg.lm_test:
            return {"success": True, "message": "No LM test sets configured, skipped", "stats": {'skipped': True}}
        stage = load_stage('lm')
        sampled = self.path(local_config.SAMPLED_FILE)
        baseline_report = self.cfg.lm_baseline or None
        stats = {}

        if not baseline_report and self.cfg.lm_train:
            baseline_model = self.path('baseline.' + local_config.LM_FILE)
            stats['baseline_train'] = stage.run_lm_train(list(self.cfg.lm_train), baseline_model, self.cfg.lm)['stats']
            baseline_report = self.path('lm_eval.baseline.json')
            stage.run_lm_eval(list(self.cfg.lm_test), baseline_report, model_path=baseline_model, lm_cfg=self.cfg.lm)

        model_path = self.path(local_config.LM_FILE)
        stats['train'] = stage.run_lm_train(list(self.cfg.lm_train) + [sampled], model_path, self.cfg.lm)['stats']
        result = stage.run_lm_eval(list(self.cfg.lm_test), self.path('lm_eval.json'), model_path=model_path,
                                   lm_cfg=self.cfg.lm, baseline_path=baseline_report)
        stats['eval'] = result['stats']
        return {"success": result['success'], "message": result['message'], "stats": stats}

    def run_stage(self, stage):
        """Run one stage, recording its status and stats; exceptions propagate after being recorded"""
        print(f"[{datetime.datetime.now()}] Stage {stage} started")
        self.state.start_stage(stage)
        try:
            result = getattr(self, f'execute_{stage}')()
        except Exception as e:
            self.state.finish_stage(stage, {"success": False, "message": str(e)})
            self.manifest.save()
            print(f"[{datetime.datetime.now()}] Stage {stage} failed: {e}")
            raise
        self.state.finish_stage(stage, result)
        self.manifest.record_stage(stage, result.get('stats', {}))
        if result['success']:
            self.completed.append(stage)
        return result

    def run(self, stages=PIPELINE_STAGES):
        """Run stages in order; the first failing stage aborts the run"""
        local_config.print_config_summary(self.cfg)
        for stage in stages:
            result = self.run_stage(stage)
            if not result['success']:
                print(f"[{datetime.datetime.now()}] Aborted at stage {stage}: {result['message']}")
                self.manifest.save()
                return {"success": False, "message": f"stage {stage}: {result['message']}",
                        "completed": list(self.completed)}
        manifest_path = self.manifest.save()
        runtime = datetime.datetime.now() - self.start_time
        print(f"[{datetime.datetime.now()}] Pipeline finished: stages={len(self.completed)}, runtime={runtime}")
        return {"success": True, "message": f"manifest written to {manifest_path}", "completed": list(self.completed)}


def resolve_config(args):
    """PipelineConfig from --config (or the defaults) with the global flag overrides applied"""
    if args.config:
        cfg = local_config.load_pipeline_config(args.config)
    else:
        cfg = local_config.default_pipeline_config()
    return local_config.override_pipeline_config(cfg, seed=args.seed, out_dir=args.out, workers=args.workers)


def _out_path(cfg, explicit, filename):
    return explicit or os.path.join(cfg.out_dir, filename)


def _require(value, flag):
    if not value:
        raise local_config.ConfigError(f"{flag} is required (or set it in --config)")
    return value


def command_segment(cfg, args):
    segmenter_cfg = cfg.segmenter
    if args.no_segment:
        segmenter_cfg = SegmenterConfig(False, segmenter_cfg.lexicon_path, segmenter_cfg.min_stem)
    tgt = args.tgt or cfg.corpus_tgt or None
    return load_stage('segment').run_segment(
        _require(args.corpus or cfg.corpus, '--corpus'), _out_path(cfg, args.output, local_config.SEGMENTED_CORPUS_FILE),
        segmenter_cfg, args.id_column or cfg.id_column, tgt)


def command_align(cfg, args):
    base = cfg.aligner
    aligner_cfg = AlignerConfig(args.iterations or base.iterations,
                                base.tension if args.tension is None else args.tension,
                                base.p_null if args.p_null is None else args.p_null,
                                args.symmetrization or base.symmetrization, seed=base.seed, workers=base.workers)
    return load_stage('align').run_align(
        _require(args.corpus, '--corpus'), _out_path(cfg, args.output, local_config.ALIGNMENTS_FILE), aligner_cfg,
        args.external or cfg.alignments or None, args.ttable, args.gold)


def command_project(cfg, args):
    return load_stage('project').run_project(
        _require(args.corpus, '--corpus'), _require(args.trees or cfg.trees, '--trees'),
        _require(args.alignments, '--alignments'), _out_path(cfg, args.output, local_config.BITREES_FILE), cfg.workers)


def command_generate(cfg, args):
    base = cfg.generator
    generator_cfg = GeneratorConfig(args.max_candidates or base.max_candidates_per_sentence,
                                    base.dedup and not args.no_dedup)
    return load_stage('generate').run_generate(
        _require(args.corpus, '--corpus'), _require(args.trees or cfg.trees, '--trees'),
        _require(args.alignments, '--alignments'), _out_path(cfg, args.output, local_config.CANDIDATES_FILE),
        generator_cfg, cfg.workers)


def command_sample(cfg, args):
    base = cfg.sampler
    target = load_spf_target(args.spf_target) if args.spf_target else base.spf_target
    sampler_cfg = SamplerConfig(args.method or base.method, base.k if args.k is None else args.k, base.seed,
                                args.max_en_fraction or base.max_en_fraction, base.require_ar_initial, target)
    return load_stage('sample').run_sample(
        _require(args.candidates, '--candidates'), _out_path(cfg, args.output, local_config.SAMPLED_FILE), sampler_cfg)


def command_lm_train(cfg, args):
    lm_cfg = LMConfig(args.order or cfg.lm.order, cfg.lm.unk_policy, cfg.lm.workers)
    train = args.train or list(cfg.lm_train)
    return load_stage('lm').run_lm_train(_require(train, '--train'),
                                         _out_path(cfg, args.output, local_config.LM_FILE), lm_cfg)


def command_lm_eval(cfg, args):
    lm_cfg = LMConfig(args.order or cfg.lm.order, args.unk_policy or cfg.lm.unk_policy, cfg.lm.workers)
    test = args.test or list(cfg.lm_test)
    return load_stage('lm').run_lm_eval(_require(test, '--test'), _out_path(cfg, args.output, 'lm_eval.json'),
                                        args.model, args.train, lm_cfg, args.baseline or cfg.lm_baseline or None)


def command_pipeline(cfg, args):
    local_config.validate_pipeline_config(cfg)
    return CSPipelineRunner(cfg).run()


COMMANDS = {
    'segment': command_segment,
    'align': command_align,
    'project': command_project,
    'generate': command_generate,
    'sample': command_sample,
    'lm-train': command_lm_train,
    'lm-eval': command_lm_eval,
    'pipeline': command_pipeline,
}


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(description='Arabic-English code-switched text generation pipeline')
    parser.add_argument('--config', help='JSON run config')
    parser.add_argument('--seed', type=int, help='Global seed (overrides the config)')
    parser.add_argument('--out', help='Run directory (overrides the config)')
    parser.add_argument('--workers', type=int, help='Worker threads for per-sentence work')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('segment', help='Segment the Arabic side of a parallel corpus')
    p.add_argument('--corpus')
    p.add_argument('--tgt', help='Line-aligned Arabic file (two-file layout)')
    p.add_argument('--id-column', action='store_true')
    p.add_argument('--no-segment', action='store_true')
    p.add_argument('--output')

    p = sub.add_parser('align', help='Word-align a segmented corpus')
    p.add_argument('--corpus', help='Segmented "id<TAB>english<TAB>arabic" corpus')
    p.add_argument('--iterations', type=int)
    p.add_argument('--tension', type=float)
    p.add_argument('--p-null', type=float)
    p.add_argument('--symmetrization')
    p.add_argument('--external', help='Use this Pharaoh file instead of training')
    p.add_argument('--ttable')
    p.add_argument('--gold')
    p.add_argument('--output')

    for name, help_text in (('project', 'Write the bilingual tree dump'), ('generate', 'Generate CS candidates')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--corpus')
        p.add_argument('--trees')
        p.add_argument('--alignments')
        p.add_argument('--output')
        if name == 'generate':
            p.add_argument('--max-candidates', type=int)
            p.add_argument('--no-dedup', action='store_true')

    p = sub.add_parser('sample', help='Filter and sample candidates')
    p.add_argument('--candidates')
    p.add_argument('--method', choices=('random', 'spf'))
    p.add_argument('--k', type=int)
    p.add_argument('--max-en-fraction', type=float)
    p.add_argument('--spf-target')
    p.add_argument('--output')

    p = sub.add_parser('lm-train', help='Train an ARPA model')
    p.add_argument('--train', nargs='+')
    p.add_argument('--order', type=int)
    p.add_argument('--output')

    p = sub.add_parser('lm-eval', help='Perplexity and OOV per test set')
    p.add_argument('--model')
    p.add_argument('--train', nargs='+')
    p.add_argument('--test', nargs='+')
    p.add_argument('--order', type=int)
    p.add_argument('--unk-policy', choices=('map_to_unk', 'exclude'))
    p.add_argument('--baseline')
    p.add_argument('--output')

    sub.add_parser('pipeline', help='Run every stage in one run directory')
    return parser


def main(argv=None):
    """Main entry point; returns the exit status"""
    args = build_parser().parse_args(argv)

    try:
        cfg = resolve_config(args)
        result = COMMANDS[args.command](cfg, args)
    except (ValueError, FileNotFoundError) as e:
        print(f"[{datetime.datetime.now()}] Error: {e}")
        return EXIT_USAGE
    except Exception as e:
        print(f"[{datetime.datetime.now()}] Runtime error: {e}")
        return EXIT_RUNTIME

    print(f"[{datetime.datetime.now()}] {result['message']}")
    return EXIT_OK if result['success'] else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
