"""Backend selection for the propagation chain.

Prefers the compiled extension; falls back to the vectorized numpy
implementation when the extension is absent or when the environment
variable TRANSMUTE_FORCE_PYTHON is set to a non-empty value other
than "0".
"""
from __future__ import annotations

import os
import warnings

BACKEND: str

if os.environ.get("TRANSMUTE_FORCE_PYTHON", "").strip() not in ("", "0"):
    from ._kernels_py import chain_2x2

    BACKEND = "python"
else:
    try:
        from ._kernels import chain_2x2  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import chain_2x2  # type: ignore[no-redef]

        BACKEND = "python"
        warnings.warn(
            "transmute: compiled extension not found, using the numpy "
            "fallback (slower, same results)",
            stacklevel=2,
        )

__all__ = ["chain_2x2", "BACKEND"]
