"""Kernel backend selection.

Prefers the compiled extension, falls back to the pure-Python twin.  Set
DACTK_KERNELS=python (or =cython) to force a backend; forcing cython when
the extension is missing is an import error rather than a silent fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("DACTK_KERNELS", "").strip().lower()

if _FORCED == "python":
    _impl = _kernels_py
elif _FORCED == "cython":
    from . import _kernels as _impl  # type: ignore[attr-defined]
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND_NAME

encode_bits = _impl.encode_bits
classify_batch = _impl.classify_batch
advance_batch = _impl.advance_batch
expand_level = _impl.expand_level


def available_backends() -> list[str]:
    names = []
    try:
        from . import _kernels  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names


def get_backend(name: str):
    """Return the named kernel module (for tests and benchmarks)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
