import os
import json
import hashlib
import datetime
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Tuple

from aligner import AlignerConfig, SYMMETRIZATION_METHODS
from generator import GeneratorConfig
from ngram_lm import LMConfig, UNK_POLICIES
from sampler import DEFAULT_SPF_TARGET_PATH, SAMPLING_METHODS, SamplerConfig, load_spf_target, normalize_spf_target
from segmenter import MIN_STEM_LENGTH, SegmenterConfig

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))

# operational configs
LOGS_DIRECTORY = 'logs'  # logs of the stage scripts are stored in this directory
OUT_DIRECTORY = 'runs/default'  # run directory used when neither --out nor out_dir is given
MAX_WORKERS = 1  # threads for per-sentence work; results are merged in input order either way
DEFAULT_SEED = 13

# Log rotation configuration
LOG_FILE_MAX_BYTES = 10 * 1024 * 1024  # 10MB per log file
LOG_BACKUP_COUNT = 3

# segmenter
SEGMENTATION_ENABLED = True
CLITIC_LEXICON_PATH = os.path.join(PACKAGE_DIR, 'config', 'clitics.txt')
SEGMENTER_MIN_STEM = MIN_STEM_LENGTH

# aligner
ALIGNER_ITERATIONS = 5
ALIGNER_TENSION = 4.0  # fixed diagonal tension, not optimized
ALIGNER_P_NULL = 0.08
ALIGNER_SYMMETRIZATION = 'grow_diag_final'  # forward / reverse / intersection / union / grow_diag_final

# generator
MAX_CANDIDATES_PER_SENTENCE = 10000
GENERATOR_DEDUP = True

# sampler
SAMPLING_METHOD = 'spf'  # 'random' or 'spf'
SAMPLE_SIZE = 1000
MAX_EN_FRACTION = 0.45
REQUIRE_AR_INITIAL = True
SPF_TARGET_PATH = DEFAULT_SPF_TARGET_PATH

# language model
LM_ORDER = 3
LM_UNK_POLICY = 'map_to_unk'  # 'map_to_unk' or 'exclude'

# Run directory file names
CANDIDATES_FILE = 'candidates.txt'
SAMPLED_FILE = 'sampled.txt'
ALIGNMENTS_FILE = 'alignments.txt'
SEGMENTED_CORPUS_FILE = 'segmented.tsv'
BITREES_FILE = 'bitrees.txt'
TTABLE_FILE = 'ttable.tsv'
LM_FILE = 'lm.arpa'
MANIFEST_FILE = 'run_manifest.json'
RUN_STATUS_FILE = 'run_status.json'


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str = ''
    corpus_tgt: str = ''  # set for the two-file layout; corpus then holds the English side
    id_column: bool = False
    trees: str = ''
    alignments: str = ''  # external Pharaoh file; the align stage is skipped when set
    lm_train: Tuple[str, ...] = ()
    lm_test: Tuple[str, ...] = ()
    lm_baseline: str = ''
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    aligner: AlignerConfig = field(default_factory=AlignerConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    lm: LMConfig = field(default_factory=LMConfig)
    seed: int = DEFAULT_SEED
    out_dir: str = OUT_DIRECTORY
    workers: int = MAX_WORKERS
    config_path: Optional[str] = None

    def to_dict(self):
        """Canonical JSON-ready form; used for the manifest and the config hash."""
        data = asdict(self)
        data.pop('config_path')
        data['lm_train'] = list(self.lm_train)
        data['lm_test'] = list(self.lm_test)
        return data

    def config_hash(self):
        canonical = json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


INPUT_KEYS = ('corpus', 'corpus_tgt', 'id_column', 'trees', 'alignments')
SECTION_KEYS = {
    'segmenter': ('enabled', 'lexicon_path', 'min_stem'),
    'aligner': ('iterations', 'tension', 'p_null', 'symmetrization'),
    'generator': ('max_candidates_per_sentence', 'dedup'),
    'sampler': ('method', 'k', 'max_en_fraction', 'require_ar_initial', 'spf_target', 'spf_target_path'),
    'lm': ('order', 'unk_policy', 'train', 'test', 'baseline'),
}
TOP_LEVEL_KEYS = ('inputs', 'seed', 'out_dir', 'workers') + tuple(SECTION_KEYS)


def _check_keys(section_name, data, allowed):
    if not isinstance(data, dict):
        raise ConfigError(f"Config section '{section_name}' must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown key(s) in config section '{section_name}': {', '.join(unknown)}")


def _resolve(path, base_dir):
    if not path:
        return ''
    path = os.path.expanduser(path)
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def default_pipeline_config(**overrides):
    """PipelineConfig built from the module constants above."""
    seed = overrides.pop('seed', DEFAULT_SEED)
    workers = overrides.pop('workers', MAX_WORKERS)
    cfg = PipelineConfig(
        segmenter=SegmenterConfig(SEGMENTATION_ENABLED, CLITIC_LEXICON_PATH, SEGMENTER_MIN_STEM),
        aligner=AlignerConfig(ALIGNER_ITERATIONS, ALIGNER_TENSION, ALIGNER_P_NULL, ALIGNER_SYMMETRIZATION,
                              seed=seed, workers=workers),
        generator=GeneratorConfig(MAX_CANDIDATES_PER_SENTENCE, GENERATOR_DEDUP),
        sampler=SamplerConfig(SAMPLING_METHOD, SAMPLE_SIZE, seed, MAX_EN_FRACTION, REQUIRE_AR_INITIAL,
                              load_spf_target(SPF_TARGET_PATH)),
        lm=LMConfig(LM_ORDER, LM_UNK_POLICY, workers),
        seed=seed,
        workers=workers,
    )
    return cfg if not overrides else _replace(cfg, **overrides)


def _replace(cfg, **changes):
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    values.update(changes)
    return PipelineConfig(**values)


def override_pipeline_config(cfg, seed=None, out_dir=None, workers=None):
    """Apply command-line overrides; seed and workers reach the stage configs too."""
    changes = {}
    if seed is not None:
        changes.update(seed=seed, aligner=replace(cfg.aligner, seed=seed), sampler=replace(cfg.sampler, seed=seed))
    if workers is not None:
        if workers < 1:
            raise ConfigError(f"workers must be >= 1, got {workers}")
        changes.update(workers=workers,
                       aligner=replace(changes.get('aligner', cfg.aligner), workers=workers),
                       lm=replace(cfg.lm, workers=workers))
    if out_dir:
        changes['out_dir'] = out_dir
    return _replace(cfg, **changes) if changes else cfg


def parse_pipeline_config(data, base_dir='.', config_path=None):
    """Overlay a config dict on the defaults.

    Raises:
        ConfigError: unknown keys, wrong types or out-of-range values
    """
    _check_keys('top level', data, TOP_LEVEL_KEYS)
    inputs = data.get('inputs', {})
    _check_keys('inputs', inputs, INPUT_KEYS)
    for name, allowed in SECTION_KEYS.items():
        _check_keys(name, data.get(name, {}), allowed)

    try:
        seed = int(data.get('seed', DEFAULT_SEED))
        workers = int(data.get('workers', MAX_WORKERS))
        if workers < 1:
            raise ConfigError(f"workers must be >= 1, got {workers}")

        seg = data.get('segmenter', {})
        segmenter = SegmenterConfig(
            enabled=bool(seg.get('enabled', SEGMENTATION_ENABLED)),
            lexicon_path=_resolve(seg['lexicon_path'], base_dir) if seg.get('lexicon_path') else CLITIC_LEXICON_PATH,
            min_stem=int(seg.get('min_stem', SEGMENTER_MIN_STEM)))

        al = data.get('aligner', {})
        aligner = AlignerConfig(
            iterations=int(al.get('iterations', ALIGNER_ITERATIONS)),
            tension=float(al.get('tension', ALIGNER_TENSION)),
            p_null=float(al.get('p_null', ALIGNER_P_NULL)),
            symmetrization=al.get('symmetrization', ALIGNER_SYMMETRIZATION),
            seed=seed, workers=workers)

        gen = data.get('generator', {})
        generator = GeneratorConfig(
            max_candidates_per_sentence=int(gen.get('max_candidates_per_sentence', MAX_CANDIDATES_PER_SENTENCE)),
            dedup=bool(gen.get('dedup', GENERATOR_DEDUP)))

        sam = data.get('sampler', {})
        if 'spf_target' in sam and 'spf_target_path' in sam:
            raise ConfigError("Give either sampler.spf_target or sampler.spf_target_path, not both")
        if 'spf_target' in sam:
            spf_target = normalize_spf_target(sam['spf_target'])
        else:
            target_path = _resolve(sam['spf_target_path'], base_dir) if sam.get('spf_target_path') else SPF_TARGET_PATH
            if not os.path.exists(target_path):
                raise ConfigError(f"SPF target file not found: {target_path}")
            spf_target = load_spf_target(target_path)
        sampler = SamplerConfig(
            method=sam.get('method', SAMPLING_METHOD),
            k=int(sam.get('k', SAMPLE_SIZE)),
            seed=seed,
            max_en_fraction=float(sam.get('max_en_fraction', MAX_EN_FRACTION)),
            require_ar_initial=bool(sam.get('require_ar_initial', REQUIRE_AR_INITIAL)),
            spf_target=spf_target)

        lm_section = data.get('lm', {})
        lm = LMConfig(order=int(lm_section.get('order', LM_ORDER)),
                      unk_policy=lm_section.get('unk_policy', LM_UNK_POLICY),
                      workers=workers)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid config value: {e}") from None

    def path_list(key):
        value = lm_section.get(key, [])
        if isinstance(value, str):
            value = [value]
        return tuple(_resolve(p, base_dir) for p in value)

    return PipelineConfig(
        corpus=_resolve(inputs.get('corpus', ''), base_dir),
        corpus_tgt=_resolve(inputs.get('corpus_tgt', ''), base_dir),
        id_column=bool(inputs.get('id_column', False)),
        trees=_resolve(inputs.get('trees', ''), base_dir),
        alignments=_resolve(inputs.get('alignments', ''), base_dir),
        lm_train=path_list('train'),
        lm_test=path_list('test'),
        lm_baseline=_resolve(lm_section.get('baseline', ''), base_dir),
        segmenter=segmenter, aligner=aligner, generator=generator, sampler=sampler, lm=lm,
        seed=seed,
        out_dir=_resolve(data.get('out_dir', OUT_DIRECTORY), base_dir),
        workers=workers,
        config_path=config_path,
    )


def load_pipeline_config(path):
    """Read a JSON run config; relative paths inside it resolve against its directory."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from None
    base_dir = os.path.dirname(os.path.abspath(path))
    return parse_pipeline_config(data, base_dir, os.path.abspath(path))


def validate_pipeline_config(cfg, require=('corpus', 'trees')):
    """Check that every input the run needs exists before any stage starts."""
    for name in require:
        if not getattr(cfg, name):
            raise ConfigError(f"Config is missing inputs.{name}")
    for name in ('corpus', 'corpus_tgt', 'trees', 'alignments', 'lm_baseline'):
        path = getattr(cfg, name)
        if path and not os.path.exists(path):
            raise ConfigError(f"Input file for {name} not found: {path}")
    for path in cfg.lm_train + cfg.lm_test:
        if not os.path.exists(path):
            raise ConfigError(f"LM corpus not found: {path}")
    if cfg.segmenter.enabled and cfg.segmenter.lexicon_path and not os.path.exists(cfg.segmenter.lexicon_path):
        raise ConfigError(f"Clitic lexicon not found: {cfg.segmenter.lexicon_path}")
    return True


def validate_defaults():
    """Validate the module constants"""
    if ALIGNER_SYMMETRIZATION not in SYMMETRIZATION_METHODS:
        raise ValueError(f"Invalid ALIGNER_SYMMETRIZATION: {ALIGNER_SYMMETRIZATION}")
    if SAMPLING_METHOD not in SAMPLING_METHODS:
        raise ValueError(f"Invalid SAMPLING_METHOD: {SAMPLING_METHOD}")
    if LM_UNK_POLICY not in UNK_POLICIES:
        raise ValueError(f"Invalid LM_UNK_POLICY: {LM_UNK_POLICY}")
    if not 0 < MAX_EN_FRACTION < 1:
        raise ValueError(f"Invalid MAX_EN_FRACTION: {MAX_EN_FRACTION}")
    return True


def print_config_summary(cfg):
    print(f'\n------------------ START AT {datetime.datetime.now()} ------------------')
    print(f'- Corpus: {cfg.corpus}')
    print(f'- Trees: {cfg.trees}')
    print(f'- Alignments: {cfg.alignments or "trained"}')
    print(f'- Segmentation: {"on" if cfg.segmenter.enabled else "off"}')
    print(f'- Sampling: {cfg.sampler.method}, k={cfg.sampler.k}, seed={cfg.seed}')
    print(f'- Output directory: {cfg.out_dir}')
    print(f'- Logs directory: {LOGS_DIRECTORY}')
    print('------------------------------------------------------------------')


validate_defaults()
