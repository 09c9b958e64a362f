"""Kernel backend selection.

Two interchangeable backends implement the per-cluster hot loops: a compiled
Cython extension (`_core`) and a pure-Python reference (`pyref`). They are
bitwise-equivalent by construction; the compiled one is simply faster. The
default prefers the extension when it importable and falls back to pure
Python otherwise. The HMVP_BACKEND environment variable ("auto", "python",
"compiled") overrides the default, and set_backend/using_backend switch at
runtime (mainly for benchmarks and parity tests).
"""
from __future__ import annotations

import os
from contextlib import contextmanager

from . import pyref

_DISPATCH = {"python": pyref}

try:
    from . import _core  # type: ignore[attr-defined]

    _DISPATCH["compiled"] = _core
except ImportError:
    _core = None

_DEFAULT = "compiled" if "compiled" in _DISPATCH else "python"


def _resolve(name: str) -> str:
    name = (name or "auto").strip().lower()
    if name == "auto":
        return _DEFAULT
    if name not in ("python", "compiled"):
        raise ValueError(f"unknown kernel backend {name!r} (use auto, python, or compiled)")
    if name not in _DISPATCH:
        raise ImportError("compiled kernel backend requested but the extension is not built")
    return name


_active = _resolve(os.environ.get("HMVP_BACKEND", "auto"))


def active_backend() -> str:
    """Name of the backend currently in use ("python" or "compiled")."""
    return _active


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_DISPATCH))


def impl():
    """The active backend module."""
    return _DISPATCH[_active]


def set_backend(name: str) -> str:
    """Switch backends; returns the previous backend name."""
    global _active
    previous = _active
    _active = _resolve(name)
    return previous


@contextmanager
def using_backend(name: str):
    """Temporarily switch backends within a with-block."""
    previous = set_backend(name)
    try:
        yield _DISPATCH[_active]
    finally:
        set_backend(previous)
