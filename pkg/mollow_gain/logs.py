# pyright: reportMissingTypeStubs=false
"""
Console logging for the command-line runner
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from colorama import Fore, Style

if TYPE_CHECKING:
    from typing import TextIO

_LEVEL_COLORS = {
    logging.DEBUG: Style.DIM,
    logging.INFO: Fore.CYAN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class ColorFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        color = _LEVEL_COLORS.get(record.levelno, "")
        return f"{color}{message}{Style.RESET_ALL}" if color else message


def setup_logging(*, verbose: bool = False, stream: None | TextIO = None) -> None:
    """
    Route the package loggers to one colored stream handler.
    Args:
        verbose (bool)         : Show debug records
        stream  (None | TextIO): Target stream, stderr when not given
    """
    handler = logging.StreamHandler(stream)
    handler.setFormatter(ColorFormatter("%(levelname)-7s %(name)s: %(message)s"))
    package_logger = logging.getLogger("mollow_gain")
    package_logger.handlers.clear()
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    package_logger.propagate = False
