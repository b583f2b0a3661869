"""loguru sinks that coexist with tqdm progress bars."""

import sys
from pathlib import Path
from typing import Iterable, Optional, TextIO, TypeVar, Union

from loguru import logger
from tqdm import tqdm

T = TypeVar("T")

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{extra[name]}</cyan> | "
    "<level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {extra[name]}:{function}:{line} | {message}"

_sinks_installed = False


def _console_sink(stream: TextIO):
    def write(message) -> None:
        # tqdm.write keeps an active bar on its own line
        tqdm.write(str(message), file=stream, end="")

    return write


def configure_logging(
    level: str = "INFO",
    log_file: Optional[Union[str, Path]] = None,
    rotation: str = "10 MB",
    retention: int = 5,
) -> None:
    """Replace every sink with a console sink and an optional rotating file.

    Args:
        level: Minimum level for both sinks
        log_file: File receiving the same records without colour
        rotation: Size at which the file rotates
        retention: Number of rotated files kept
    """
    global _sinks_installed

    logger.remove()
    logger.configure(extra={"name": "multichain_pma"})
    logger.add(
        _console_sink(sys.stderr), format=CONSOLE_FORMAT, level=level, colorize=sys.stderr.isatty(), diagnose=False
    )
    if log_file:
        logger.add(
            log_file, format=FILE_FORMAT, level=level, rotation=rotation, retention=retention, diagnose=False
        )
    _sinks_installed = True


def get_logger(name: Optional[str] = None, level: Optional[str] = None):
    """loguru logger bound to ``name``.

    The first call installs the sinks from ``settings``; passing ``level``
    reinstalls them.
    """
    if not _sinks_installed or level is not None:
        from ..config.settings import settings

        configure_logging(level=level or settings.log_level, log_file=settings.log_file)
    return logger.bind(name=name or "multichain_pma")


def progress(iterable: Iterable[T], desc: str, total: Optional[int] = None) -> Iterable[T]:
    """tqdm over ``iterable``, shown only when ``settings.show_progress`` is set."""
    from ..config.settings import settings

    return tqdm(iterable, desc=desc, total=total, disable=not settings.show_progress, leave=False)
