"""Config-driven experiment harness and the ``blowup-lab`` command line."""

from .config import KINDS, SCHEMA, ConfigError, ExperimentConfig, load_config, validate
from .orchestrate import EXIT_CONTRACT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, RunManifest, orchestrate
