"""Common shape of the iterative policy solvers."""

import time
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterator, Optional

from ..config import settings
from ..logging import get_logger, progress


class BaseSolver(ABC):
    """Named solver with a bound logger, run options and a timed iteration loop.

    Subclasses implement ``run``; ``iterations`` yields k = 0..K under an
    optional progress bar and keeps ``elapsed`` current. ``log_every`` sets
    how often per-iterate debug lines are written.
    """

    def __init__(self, name: Optional[str] = None, **options: Any):
        self.name = name or type(self).__name__
        self.logger = get_logger(self.name)
        self.config: Dict[str, Any] = {"log_every": settings.log_every}
        self._started: Optional[float] = None
        self.configure(**options)

    @abstractmethod
    def run(self, iters: int, *args: Any, **kwargs: Any) -> Any:
        """Perform ``iters`` updates and return the solver's trace."""

    def iterations(self, iters: int) -> Iterator[int]:
        """Iterate indices 0..iters inclusive (the last one evaluates without updating)."""
        self._started = time.perf_counter()
        yield from progress(range(iters + 1), desc=self.name, total=iters + 1)

    @property
    def elapsed(self) -> float:
        """Seconds since the current ``iterations`` loop began, 0 before any run."""
        return 0.0 if self._started is None else time.perf_counter() - self._started

    def should_log(self, k: int, iters: int) -> bool:
        """True on every ``log_every``-th iterate and on the last one."""
        return k == iters or k % self.config["log_every"] == 0

    def configure(self, **options: Any) -> None:
        """Merge ``options`` into the solver configuration.

        ``None`` values leave the current entry unchanged.

        Raises:
            ValueError: ``log_every`` is below 1
        """
        options = {key: value for key, value in options.items() if value is not None}
        if "log_every" in options:
            options["log_every"] = int(options["log_every"])
            if options["log_every"] < 1:
                raise ValueError(f"log_every must be at least 1, got {options['log_every']}")
        self.config.update(options)
        self.logger.debug(f"{self.name} options now {self.config}")

    def get_config(self) -> Dict[str, Any]:
        """Copy of the solver configuration."""
        return dict(self.config)
