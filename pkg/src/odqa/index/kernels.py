"""Selects the BM25 scoring backend at import time.

Prefers the compiled extension; falls back to the pure-Python twin when the
extension was not built. ODQA_SCORING_BACKEND=python|cython forces a choice,
and use_backend() switches at runtime (used by the benchmark and tests).
"""

import os

from . import _scoring_py

_BACKENDS = {"python": _scoring_py.accumulate}

try:
    from . import _scoring

    _BACKENDS["cython"] = _scoring.accumulate
except ImportError:
    pass


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _default_backend() -> str:
    return "cython" if "cython" in _BACKENDS else "python"


def use_backend(name: str | None = None) -> str:
    """Activate a backend by name ('python' or 'cython'); None picks the default."""
    global _active
    if name is None:
        name = _default_backend()
    if name not in _BACKENDS:
        raise ValueError(f"unknown scoring backend {name!r}; available: {available_backends()}")
    _active = name
    return _active


def active_backend() -> str:
    return _active


def accumulate(ids, tfs, idf, k1_plus_1, norms, scores, touched):
    _BACKENDS[_active](ids, tfs, idf, k1_plus_1, norms, scores, touched)


_active = _default_backend()
_env = os.environ.get("ODQA_SCORING_BACKEND")
if _env:
    use_backend(_env.strip().lower())
