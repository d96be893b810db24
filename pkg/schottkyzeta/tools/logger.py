from typing import Any, Optional, Union

import csv
import logging
from logging.handlers import RotatingFileHandler

"""
Module Overview:

This module defines a custom logger class, `Logger`, that reports the progress of
long computations to the console and a log file, and traces selected attributes of
running objects (bin counters, refinement loops) to a CSV file.

Key Class:

- `Logger`: Extends `logging.Logger`. It supports different logging levels for
  the file and stream handlers and forwards every record emitted by the library's
  module loggers (`schottkyzeta.*`).

Usage Guide:

1. Create an instance of the `Logger` class, optionally with a `file_path`.
2. Optionally, set the logging levels for file and stream handlers using
   `set_file_level` and `set_stream_level` methods.
3. Add objects and attribute names to trace using the `add_attributes` method.
4. Write one CSV row of the traced attributes with the `update` method.
5. Close the trace file using the `close` method.

Note:

The CLI creates one Logger per invocation. Library code never instantiates it and
logs through `logging.getLogger(__name__)` instead.
"""

PACKAGE_LOGGER_NAME = "schottkyzeta"
DEFAULT_LOG_FORMAT = "[%(asctime)s] %(levelname)s: %(message)s"


class Logger(logging.Logger):
    """
    Logger class that logs run progress and traces object attributes to a csv file

    Args:
        file_path (str, optional): Path without extension. When given, `<file_path>.log`
            receives the log records and `<file_path>.csv` the attribute trace.
        log_format (str): Format shared by both handlers.
    """

    def __init__(
        self,
        file_path: Optional[str] = None,
        log_format: str = DEFAULT_LOG_FORMAT,
    ) -> None:

        super().__init__(PACKAGE_LOGGER_NAME)
        self.setLevel(logging.DEBUG)

        self._containers: list[Union[object, dict[Any, Any]]] = []
        self._attributes: list[list[str]] = []

        self._log_levels = {
            "DEBUG": logging.DEBUG,
            "INFO": logging.INFO,
            "WARNING": logging.WARNING,
            "ERROR": logging.ERROR,
            "CRITICAL": logging.CRITICAL,
        }

        self._std_formatter = logging.Formatter(log_format)

        self._stream_handler = logging.StreamHandler()
        self._stream_handler.setLevel(level=logging.INFO)
        self._stream_handler.setFormatter(fmt=self._std_formatter)
        self.addHandler(hdlr=self._stream_handler)

        self._file_handler: Optional[RotatingFileHandler] = None
        self._file = None
        self._writer = None

        if file_path is not None:
            self._file_handler = RotatingFileHandler(
                filename=file_path + ".log",
                mode="w",
                maxBytes=0,
                backupCount=10,
            )
            self._file_handler.setLevel(level=logging.DEBUG)
            self._file_handler.setFormatter(fmt=self._std_formatter)
            self.addHandler(hdlr=self._file_handler)

            self._file = open(file_path + ".csv", "w", newline="")
            self._writer = csv.writer(self._file)

        # module loggers under schottkyzeta.* propagate to the package logger
        self._package_logger = logging.getLogger(PACKAGE_LOGGER_NAME)
        self._package_logger.setLevel(logging.DEBUG)
        for handler in self.handlers:
            self._package_logger.addHandler(handler)

        self._is_logging = False
        self._header_data: list[str] = []
        self._data: list[Any] = []

    def __repr__(self) -> str:
        return f"Logger"

    def set_file_level(self, level: str = "DEBUG") -> None:
        """
        Sets the level of the file handler

        Args:
            level (str): Level of the logger
        """
        if level not in self._log_levels.keys():
            self.warning(msg=f"Invalid logging level: {level}")

        level_value = self._log_levels[level]
        if self._file_handler is not None:
            self._file_handler.setLevel(level=level_value)

    def set_stream_level(self, level: str = "INFO") -> None:
        """
        Sets the level of the stream handler

        Args:
            level (str): Level of the logger
        """
        if level not in self._log_levels.keys():
            self.warning(msg=f"Invalid logging level: {level}")

        self._stream_handler.setLevel(level=self._log_levels[level])

    def add_attributes(
        self, container: Union[object, dict[Any, Any]], attributes: list[str]
    ) -> None:
        """
        Adds an object (or dict) and the attributes to trace

        Args:
            container (object, dict): Object whose attributes are read, or a dict of values.
            attributes (list[str]): Names of the attributes to trace.
        """
        self._containers.append(container)
        self._attributes.append(attributes)

    def update(self) -> None:
        """
        Writes one row with the current values of the traced attributes
        """
        if not self._containers or self._writer is None:
            return

        if not self._is_logging:
            for container, attributes in zip(self._containers, self._attributes):
                for attribute in attributes:
                    if isinstance(container, dict):
                        self._header_data.append(f"{attribute}")
                    elif type(container).__repr__ is not object.__repr__:
                        self._header_data.append(f"{container!r}:{attribute}")
                    else:
                        self._header_data.append(f"{attribute}")

            self._writer.writerow(self._header_data)
            self._is_logging = True

        for container, attributes in zip(self._containers, self._attributes):
            if isinstance(container, dict):
                for attribute in attributes:
                    self._data.append(container.get(attribute))
            else:
                for attribute in attributes:
                    self._data.append(getattr(container, attribute))

        self._writer.writerow(self._data)

        self._data.clear()
        self._header_data.clear()
        self._file.flush()  # type: ignore

    def close(self) -> None:
        """
        Detaches the handlers from the package logger and closes the trace file
        """
        for handler in self.handlers:
            self._package_logger.removeHandler(handler)
            handler.close()

        if self._file is not None and not self._file.closed:
            self._file.close()

    def __del__(self) -> None:
        if self._file is not None and not self._file.closed:
            self._file.close()
