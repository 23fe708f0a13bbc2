"""
Configuration: verdict thresholds and scenario settings
"""

from .thresholds import VerdictThresholds
from .settings import OUTPUT_ENV_VAR, output_root, parse_config, parse_config_text

__all__ = ['OUTPUT_ENV_VAR', 'VerdictThresholds', 'output_root', 'parse_config', 'parse_config_text']
