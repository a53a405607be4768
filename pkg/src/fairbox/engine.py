"""Refinement engine selection: the compiled Cython core when built, the
pure-Python twin otherwise.  FAIRBOX_ENGINE=python|compiled overrides."""

from __future__ import annotations

import os

from ._refine_py import PyRefiner

try:
    from ._refine_c import CRefiner  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    CRefiner = None
    HAVE_COMPILED = False


def available_engines() -> tuple[str, ...]:
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def get_refiner_class(name: str | None = None):
    """name: None/'auto' picks the compiled core when available."""
    if name is None:
        name = os.environ.get("FAIRBOX_ENGINE", "auto")
    if name in ("auto", ""):
        return CRefiner if HAVE_COMPILED else PyRefiner
    if name == "python":
        return PyRefiner
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "compiled engine requested but fairbox._refine_c is not built")
        return CRefiner
    raise ValueError(f"unknown engine {name!r}")
