"""Backend switch for the compiled kernels.

Set ``FIXGEN_BACKEND=numpy`` to run every kernel as plain numpy code.  The
default is ``numba`` when it can be imported.
"""
import os

BACKEND = os.environ.get("FIXGEN_BACKEND", "numba").strip().lower()

if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"FIXGEN_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

if BACKEND == "numba":
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        BACKEND = "numpy"

def backend():
    """Name of the active kernel backend."""
    return BACKEND
