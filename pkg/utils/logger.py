# utils/logger.py
import logging

from config import LOG_LEVEL

_PACKAGE_LOGGERS = set()


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.setLevel(LOG_LEVEL)
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.propagate = False
    _PACKAGE_LOGGERS.add(name)
    return logger


def set_level(level: str) -> None:
    """
    Reset the level of every logger handed out by get_logger.

    Args:
        level: A logging level name such as "DEBUG" or "WARNING"
    """
    level = level.upper()
    for name in _PACKAGE_LOGGERS:
        logging.getLogger(name).setLevel(level)
