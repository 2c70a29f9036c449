"""Artificial-earthquake test generation and mutation analysis.

The heavy lifting happens in the compiled ``_core`` extension; this package
only re-exports it.
"""

from ._core import (
    AeqError,
    Policy,
    Schema,
    __version__,
    classify_shape,
    detect_ep,
    generate,
    mutate,
    profile,
    report,
)

__all__ = [
    "AeqError",
    "Policy",
    "Schema",
    "__version__",
    "classify_shape",
    "detect_ep",
    "generate",
    "mutate",
    "profile",
    "report",
]
