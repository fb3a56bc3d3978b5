"""Utilities for setting up loguru logging for the CLI and for experiments"""

import sys
import queue
import atexit
from typing import Optional
from pathlib import Path

import logging

import loguru
from loguru import logger


logging_levels = [
    {"name": "START_STOP", "no": logging.WARNING + 5, "color": "<blue>"},
    {"name": "VERDICT", "no": logging.INFO + 5, "color": "<magenta>"},
]


def register_levels():
    """Add the custom levels to the logger; safe to call more than once"""
    for level in logging_levels:
        try:
            logger.level(level["name"])
        except ValueError:
            logger.level(level["name"], no=level["no"], color=level["color"])


register_levels()

pre_setup_log_q = queue.Queue()
logger.add(lambda msg: pre_setup_log_q.put(msg.record), level="INFO")  # ensure thread/process safety


def setup_logger(
    project_name: str,
    project_version: str,
    log_file: Optional[Path] = None,
    level: str = "INFO",
):
    """Add handlers to the logger for console and file."""

    logger.remove()

    # Add console handler
    logger.add(
        sys.stderr,
        format=loguru._defaults.LOGURU_FORMAT + " | {extra}",  # include extra context in format
        colorize=True,
        level=level,
    )

    # Add log file
    if log_file:
        logger.add(log_file, format="{time} | {level} | {message} | {extra}", level="DEBUG")

    # Send start log, register stop log
    logger.log("START_STOP", "Action, Start", project=project_name, version=project_version)

    while not pre_setup_log_q.empty():
        record = pre_setup_log_q.get()
        logger.log(
            record["level"].name,
            record["message"],
            note="log re-emitted after setup",
            **record.get("extra", {}),
        )

    atexit.register(lambda: logger.log("START_STOP", "Action, Stop"))
