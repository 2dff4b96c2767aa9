"""Backend selection for the trial loop.

The compiled Cython kernels are preferred when the extension imported
cleanly; otherwise the pure-Python loop is used. Set UMABSIM_BACKEND to
"python" or "compiled" to force a choice at import time, or pass
`backend=` to `run_trial`/`run_ensemble` per call. Both backends walk the
random stream identically, so the choice never changes results, only speed.
"""

from __future__ import annotations

import os

try:
    from . import _kernels
except ImportError:
    _kernels = None

_choice = os.environ.get("UMABSIM_BACKEND", "").strip().lower()
if _choice not in ("", "python", "compiled"):
    raise ValueError(
        f"UMABSIM_BACKEND must be 'python' or 'compiled', got {_choice!r}"
    )
if _choice == "compiled" and _kernels is None:
    raise ImportError(
        "UMABSIM_BACKEND=compiled but the compiled kernels are not available"
    )

DEFAULT_BACKEND = _choice or ("compiled" if _kernels is not None else "python")


def active_backend() -> str:
    """Backend used when no explicit override is passed."""
    return DEFAULT_BACKEND


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _kernels is not None else ("python",)


def resolve_backend(choice: str | None) -> str:
    if choice is None:
        return DEFAULT_BACKEND
    if choice not in ("python", "compiled"):
        raise ValueError(f"backend must be 'python' or 'compiled', got {choice!r}")
    if choice == "compiled" and _kernels is None:
        raise RuntimeError("compiled backend requested but the extension is not built")
    return choice


def get_kernels():
    return _kernels
