"""Logging setup for the CLI. Library modules only call logging.getLogger(__name__)."""

import logging

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "edgeroute"


def setup_logging(verbose: bool = False) -> logging.Logger:
    """Attach a RichHandler to the package logger (idempotent)."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    return logger
