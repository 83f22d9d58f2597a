"""Selection of the compiled kernels.

The Cython extension ``antclust._speedups`` accelerates the meeting loops
and the descriptor Hamming matching. It is optional: when the import fails,
or when ``ANTCLUST_PURE=1`` is set, every caller falls back to the
pure-Python route. Both routes are engineered to produce bit-identical
results, so switching backends never changes an outcome, only its speed.
"""

from __future__ import annotations

import os

from .errors import ConfigError

try:
    from . import _speedups  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on how the package was built
    _speedups = None

HAVE_SPEEDUPS = _speedups is not None


def compiled_available() -> bool:
    return HAVE_SPEEDUPS


def use_compiled(backend: str | None = None) -> bool:
    """Resolve a backend request to a yes/no for the compiled kernels.

    ``backend`` may be "auto" (or None), "pure", or "compiled". "auto"
    honours the ANTCLUST_PURE environment variable.
    """
    if backend in (None, "auto"):
        if os.environ.get("ANTCLUST_PURE", "") == "1":
            return False
        return HAVE_SPEEDUPS
    if backend == "pure":
        return False
    if backend == "compiled":
        if not HAVE_SPEEDUPS:
            raise ConfigError("compiled backend requested but antclust._speedups is not built")
        return True
    raise ConfigError(f"unknown backend {backend!r}; use 'auto', 'pure' or 'compiled'")


def active_backend() -> str:
    """Name of the backend "auto" resolves to right now."""
    return "compiled" if use_compiled("auto") else "pure"


def kernels():
    """The compiled module, or None when unavailable."""
    return _speedups
