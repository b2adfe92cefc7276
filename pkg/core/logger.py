"""
Logging for gibbssat.
One package logger; stdout is left to command output, so the console handler
writes to stderr.
"""

import logging
import os
import sys
from typing import Callable, Dict, Optional


LOGGER_NAME = 'gibbssat'
CONSOLE_FORMAT = '%(levelname)s %(name)s: %(message)s'
FILE_FORMAT = '%(asctime)s %(process)d %(levelname)s %(module)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

LEVELS: Dict[str, int] = {
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
}

LogCallback = Callable[[str, str], None]


class _StderrHandler(logging.StreamHandler):
    """Resolves sys.stderr on every record, so redirected streams are honoured."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


class _CallbackHandler(logging.Handler):
    def __init__(self, callback: LogCallback):
        super().__init__(logging.DEBUG)
        self.callback = callback

    def emit(self, record):
        try:
            self.callback(record.levelname, record.getMessage())
        except Exception:
            self.handleError(record)


class Logger:
    """Package-wide logger."""

    _instance: Optional['Logger'] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._initialized = True
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False

        self.console_handler = _StderrHandler()
        self.console_handler.setLevel(logging.INFO)
        self.console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        self.logger.addHandler(self.console_handler)

        self._file_handlers: Dict[str, logging.Handler] = {}
        self._callback_handler: Optional[_CallbackHandler] = None

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def info(self, message: str) -> None:
        self.logger.info(message)

    def warning(self, message: str) -> None:
        self.logger.warning(message)

    def error(self, message: str, exc_info: bool = False) -> None:
        self.logger.error(message, exc_info=exc_info)

    def set_level(self, level: str) -> None:
        """
        Set the console threshold; files and callbacks always receive DEBUG.

        Args:
            level: One of DEBUG, INFO, WARNING, ERROR (case-insensitive)
        """
        try:
            self.console_handler.setLevel(LEVELS[level.upper()])
        except KeyError:
            raise ValueError(f"unknown log level '{level}'") from None

    def add_file_handler(self, log_file: str) -> None:
        """
        Append every record to log_file (a path already attached is ignored).

        Raises:
            OSError: The file cannot be opened
        """
        key = os.path.abspath(log_file)
        if key in self._file_handlers:
            return
        handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        self.logger.addHandler(handler)
        self._file_handlers[key] = handler

    def set_progress_handler(self, callback: Optional[LogCallback]) -> None:
        """
        Also deliver every record as callback(level_name, message); None detaches.
        """
        if self._callback_handler is not None:
            self.logger.removeHandler(self._callback_handler)
            self._callback_handler = None
        if callback is not None:
            self._callback_handler = _CallbackHandler(callback)
            self.logger.addHandler(self._callback_handler)


_logger = Logger()


def get_logger() -> Logger:
    return _logger
