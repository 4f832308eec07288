#!/usr/bin/env python3
"""
Per-run bookkeeping inside the run directory:

  - run_status.json   pickledb store with stage start/finish times and outcomes
  - run_manifest.json config, config hash, seed and per-stage stats, no timestamps,
                      so two runs of the same config produce identical manifests
"""

import os
import datetime

from pickledb import PickleDB

import local_config as config
from corpus_io import read_json_report, write_json_report


class RunState:
    """Stage status for one run directory"""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, config.RUN_STATUS_FILE)
        self.status = PickleDB(path)
        if os.path.exists(path):
            self.status.load()

    def begin_run(self):
        self.status.set('run_started', str(datetime.datetime.now()))
        self.status.set('failed_stage', None)
        self.status.save()

    def start_stage(self, stage):
        self.status.set(f'{stage}_started', str(datetime.datetime.now()))
        self.status.set(f'{stage}_finished', None)
        self.status.set(f'{stage}_success', None)
        self.status.save()

    def finish_stage(self, stage, result):
        self.status.set(f'{stage}_finished', str(datetime.datetime.now()))
        self.status.set(f'{stage}_success', bool(result.get('success')))
        self.status.set(f'{stage}_message', result.get('message', ''))
        if not result.get('success'):
            self.status.set('failed_stage', stage)
        self.status.save()

    def stage_succeeded(self, stage):
        return bool(self.status.get(f'{stage}_success'))

    def failed_stage(self):
        return self.status.get('failed_stage')


class RunManifest:
    """Deterministic record of what a run did"""

    def __init__(self, out_dir, pipeline_config=None):
        self.path = os.path.join(out_dir, config.MANIFEST_FILE)
        self.data = {'stages': {}}
        if pipeline_config is not None:
            self.data['config'] = pipeline_config.to_dict()
            self.data['config_hash'] = pipeline_config.config_hash()
            self.data['seed'] = pipeline_config.seed

    def record_stage(self, stage, stats):
        self.data['stages'][stage] = stats

    def save(self):
        write_json_report(self.data, self.path)
        return self.path

    @classmethod
    def load(cls, out_dir):
        manifest = cls(out_dir)
        manifest.data = read_json_report(manifest.path)
        return manifest
