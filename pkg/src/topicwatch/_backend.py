"""Numerical backend selection.

The Gibbs sweep has two interchangeable implementations: a numba-compiled
kernel and a pure numpy/Python one with identical semantics. The active
backend is chosen once per process from the ``TOPICWATCH_BACKEND``
environment variable:

    auto   (default) use numba when importable, else numpy
    numba  require numba, fail if unavailable
    numpy  force the fallback path

Both paths produce bit-identical results; the numpy path exists for
environments without a working JIT and as a correctness reference.
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def backend_name() -> str:
    """Resolve the active backend name ("numba" or "numpy")."""
    requested = os.environ.get("TOPICWATCH_BACKEND", "auto").lower()
    if requested not in _VALID:
        raise ValueError(
            f"TOPICWATCH_BACKEND must be one of {_VALID}, got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not _numba_available():
            raise RuntimeError("TOPICWATCH_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if _numba_available() else "numpy"
