"""
Logger setup shared by the stage scripts and the pipeline runner.

Every stage writes to two rotating files under LOGS_DIRECTORY:
  - logs.log   INFO and above
  - error.log  ERROR and above
"""

import os
import logging
from logging.handlers import RotatingFileHandler

import local_config as config

LIBRARY_LOGGERS = ('corpus_io', 'segmenter', 'aligner', 'projector', 'generator', 'sampler', 'ngram_lm')

def setup_logger(name, log_file, level=logging.INFO, formatter=None):

    if not formatter:
        formatter = logging.Formatter('%(asctime)s\t%(levelname)s\t%(message)s')

    # Use config from local_config.py (default: 10MB file, 3 backups)
    max_bytes = getattr(config, 'LOG_FILE_MAX_BYTES', 10 * 1024 * 1024)
    backup_count = getattr(config, 'LOG_BACKUP_COUNT', 3)

    log_dir = os.path.dirname(log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
    handler = RotatingFileHandler(log_file, maxBytes=max_bytes, backupCount=backup_count, encoding='utf-8')
    handler.setFormatter(formatter)

    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False  # Don't propagate to root logger
    if not logger.hasHandlers():
        logger.addHandler(handler)
    else:
        handler.close()

    return logger


def get_stage_loggers(logs_directory=None):
    """Return (info_logger, error_logger) writing into logs_directory.

    Library modules log through logging.getLogger(__name__); those records are
    routed into logs.log as well so warnings such as degenerate discounts end
    up next to the stage messages.
    """
    logs_directory = logs_directory or config.LOGS_DIRECTORY
    info_logger = setup_logger('info_logger', os.path.join(logs_directory, 'logs.log'))
    error_logger = setup_logger('error_logger', os.path.join(logs_directory, 'error.log'), logging.ERROR)

    for module_name in LIBRARY_LOGGERS:
        module_logger = logging.getLogger(module_name)
        if not module_logger.handlers:
            module_logger.setLevel(logging.INFO)
            for handler in info_logger.handlers:
                module_logger.addHandler(handler)
    return info_logger, error_logger
