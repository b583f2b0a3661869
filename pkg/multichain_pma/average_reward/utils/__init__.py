"""Utilities: keyed random streams, fixture generators, exporters and property suites.

Only the stream helpers are re-exported here; ``fixtures``, ``exporters`` and
``checks`` depend on the numerical core and are imported by module path.
"""

from .streams import cumulative, keyed_generator, sample_index, sample_indices

__all__ = ["cumulative", "keyed_generator", "sample_index", "sample_indices"]
