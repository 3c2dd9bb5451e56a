"""Exact and approximate max-kernel search over kernel-space cover trees."""

try:
    from ._fastmks import (
        Hit,
        Index,
        QueryResult,
        expansion_constant,
        kernel_value,
        load_index,
        rank_sample_count,
    )
except ImportError:
    # Development layout: the extension lives in the CMake build tree and is
    # put on sys.path by the test harness.
    from _fastmks import (
        Hit,
        Index,
        QueryResult,
        expansion_constant,
        kernel_value,
        load_index,
        rank_sample_count,
    )

__all__ = [
    "Hit",
    "Index",
    "QueryResult",
    "expansion_constant",
    "kernel_value",
    "load_index",
    "rank_sample_count",
]

__version__ = "0.1.0"
