"""
Logging setup for the simulator and its command-line front end.

Text output for interactive runs, JSON lines for batch jobs whose logs are
collected. Logs go to stderr: stdout carries command output.
"""
import json
import logging
import os
import sys
from typing import Any, Dict, Optional, TextIO

# Same variables the CLI settings read, so library and CLI agree.
LEVEL_ENV = "LACKWALK_LOG_LEVEL"
FORMAT_ENV = "LACKWALK_LOG_FORMAT"


class JsonFormatter(logging.Formatter):
    """One JSON object per record, with `extra` payloads merged in."""

    def __init__(self, service_name: str):
        super().__init__()
        self.service_name = service_name

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "service": self.service_name,
            "message": record.getMessage(),
            "logger": record.name,
        }
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)
        if hasattr(record, "extra") and record.extra:
            log_data.update(record.extra)
        return json.dumps(log_data, default=str)


def setup_logging(
    service_name: str = "lackwalk",
    level: Optional[str] = None,
    json_format: Optional[bool] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        service_name: Logger name, also reported as `service` in JSON output
        level: Log level (default from LACKWALK_LOG_LEVEL env var or INFO)
        json_format: Whether to use JSON format (default from LACKWALK_LOG_FORMAT env var)
        stream: Output stream (default: stderr)

    Returns:
        Configured logger instance

    Example:
        logger = setup_logging("lackwalk", level="DEBUG")
        logger.info("Sweep started")
    """
    log_level: str = level if level is not None else os.getenv(LEVEL_ENV, "INFO") or "INFO"
    if json_format is None:
        json_format = os.getenv(FORMAT_ENV, "text").lower() == "json"

    resolved = logging.getLevelName(log_level.upper())
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level: {log_level}")

    logger = logging.getLogger(service_name)
    logger.setLevel(resolved)

    # Remove existing handlers to avoid duplicates
    logger.handlers = []

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    if json_format:
        handler.setFormatter(JsonFormatter(service_name))
    else:
        handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
    logger.addHandler(handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """Get a child logger.

    Args:
        name: Logger name (can be dotted for hierarchy)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
