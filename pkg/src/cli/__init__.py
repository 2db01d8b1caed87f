"""
Command-line interface
"""

from .main import main, build_parser, build_run_config, configure_logging
from .commands import COMMANDS, MODEL_FILE

__all__ = [
    "main",
    "build_parser",
    "build_run_config",
    "configure_logging",
    "COMMANDS",
    "MODEL_FILE",
]
