"""Backend selection for the Monte-Carlo kernels.

The compiled extension is preferred when it imported cleanly; otherwise the
NumPy twin takes over.  ``RELAYSEL_BACKEND=python|compiled`` forces a choice
(forcing ``compiled`` raises if the extension is unavailable).  Workers are
capped by ``RELAYSEL_THREADS``.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernel_py

__all__ = ["kernel", "backend_name", "available_backends", "get_backend", "resolve_workers"]

try:
    from . import _kernel as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _kernel_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def get_backend(name: str | None = None) -> tuple[str, ModuleType]:
    """Resolve a backend by name, env override, or availability."""
    if name is None:
        name = os.environ.get("RELAYSEL_BACKEND", "auto")
    if name == "auto":
        name = "compiled" if _compiled is not None else "python"
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(backends)}")
    return name, backends[name]


backend_name, kernel = get_backend()


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: requested (or cpu count), capped by RELAYSEL_THREADS."""
    cap_env = os.environ.get("RELAYSEL_THREADS")
    cap = int(cap_env) if cap_env else None
    if cap is not None and cap < 1:
        raise ValueError("RELAYSEL_THREADS must be >= 1")
    workers = requested if requested is not None else (os.cpu_count() or 1)
    if cap is not None:
        workers = min(workers, cap)
    return max(1, workers)
