"""Logging setup.

"""

from __future__ import annotations

import logging
import pathlib

from freshcast.config import LoggingConfig


def configure_logging(config: LoggingConfig) -> None:
    """Apply a logging configuration to the root logger."""
    if not config.logging_enabled:
        logging.disable(logging.CRITICAL)
        return

    logging.disable(logging.NOTSET)

    if config.log_to_terminal is False:
        # Output the logs to a file
        log_path = pathlib.Path(config.log_file_path)

        logging.basicConfig(
            filename=log_path,
            encoding="utf-8",
            level=config.log_level,
            format="%(asctime)s %(name)s %(levelname)s %(message)s",
            force=True,
        )
    else:
        logging.basicConfig(
            level=config.log_level,
            format="%(name)s %(levelname)s %(message)s",
            force=True,
        )
