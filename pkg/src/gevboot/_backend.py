"""Kernel backend selection.

The hot per-observation loops exist twice: jit-compiled (numba) and pure
numpy. The GEVBOOT_BACKEND environment variable picks one at import time:

    auto   (default) jit kernels when numba imports, numpy otherwise
    numba  require the jit kernels, raise if numba is unavailable
    numpy  force the pure-numpy path

Both backends implement the same contract; tests/test_backend.py holds
them in lockstep. benchmarks/bench_backends.py compares their speed.
"""

import os
import warnings

_VALID = ("auto", "numba", "numpy")


def _select():
    choice = os.environ.get("GEVBOOT_BACKEND", "auto").strip().lower()
    if choice not in _VALID:
        raise ValueError(
            f"GEVBOOT_BACKEND must be one of {_VALID}, got {choice!r}"
        )
    if choice in ("auto", "numba"):
        try:
            from . import _kernels_numba

            return "numba", _kernels_numba
        except ImportError:
            if choice == "numba":
                raise
            warnings.warn(
                "numba unavailable, falling back to the numpy kernels",
                RuntimeWarning,
                stacklevel=2,
            )
    from . import _kernels_numpy

    return "numpy", _kernels_numpy


BACKEND, kernels = _select()


def active_backend() -> str:
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    return BACKEND
