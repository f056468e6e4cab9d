"""Console and file logging of robfit.

All library modules log to children of the `robfit` logger (`logging.getLogger(__name__)`). The handlers are
only attached here: a colored console handler and, for command line runs, a plain file handler that keeps the
timestamps out of the primary outputs.
"""

#  Copyright (c) 2021 robfit

import logging
import os
from typing import Optional

import colorlog

ROOT_NAME = 'robfit'

CONSOLE_FORMAT = ("%(asctime)s - %(name)s | "
                  "%(log_color)s%(levelname)-8s%(reset)s | "
                  "%(log_color)s%(message)s%(reset)s")
FILE_FORMAT = "%(asctime)s - %(name)s | %(levelname)-8s | %(message)s"


def _qualified(name: str) -> str:
    if name == ROOT_NAME or name.startswith(ROOT_NAME + '.'):
        return name
    return f"{ROOT_NAME}.{name.rstrip('.')}"


def _console_handler(logger: logging.Logger) -> logging.Handler:
    for handler in logger.handlers:
        if type(handler) is logging.StreamHandler:
            return handler
    handler = logging.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(CONSOLE_FORMAT))
    logger.addHandler(handler)
    return handler


def _file_handler(logger: logging.Logger, file_name: Optional[str]) -> Optional[logging.FileHandler]:
    file_handlers = [handler for handler in logger.handlers if isinstance(handler, logging.FileHandler)]
    if file_name is None:
        return file_handlers[0] if file_handlers else None
    path = os.path.abspath(file_name)
    for handler in file_handlers:
        if handler.baseFilename == path:
            return handler
    handler = logging.FileHandler(path)
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    logger.addHandler(handler)
    return handler


def get_logger(name: str, stdout_level: Optional[int] = None, file_level: Optional[int] = None,
               file_name: Optional[str] = None) -> logging.Logger:
    """Configure the console and file output of a robfit logger.

    Calling it again with the same name changes the levels of the existing handlers.

    Args:
        name: Logger name, prefixed with `robfit.` unless it already is in the `robfit` hierarchy.
        stdout_level: Level of the console handler, WARNING if not given.
        file_level: Level of the file handler, WARNING if not given.
        file_name: Log file. Attaches a file handler unless one for this file exists already.

    Raises:
        ValueError: if `file_level` is given but the logger has no file handler.
    """
    logger = logging.getLogger(_qualified(name))
    stdout_level = logging.WARNING if stdout_level is None else stdout_level
    _console_handler(logger).setLevel(stdout_level)
    file_handler = _file_handler(logger, file_name)
    if file_handler is None:
        if file_level is not None:
            raise ValueError(f"Cannot set a file log level for {logger.name} without a log file.")
        logger.setLevel(stdout_level)
        return logger
    file_level = logging.WARNING if file_level is None else file_level
    file_handler.setLevel(file_level)
    logger.setLevel(min(stdout_level, file_level))
    return logger


def detach_file_handlers(name: str) -> None:
    """Close and remove all file handlers of the logger `name` (e.g. at the end of a command line run)."""
    logger = logging.getLogger(_qualified(name))
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            handler.close()
            logger.removeHandler(handler)
