"""Kernel backend selection.

The hot inner loops (r-matching augmentation, the candidate-pruning pass,
brute-force enumeration, envy audits) have two interchangeable
implementations: a compiled Cython extension and a NumPy/Python fallback.
The compiled one is preferred when present; set ENVYALLOC_BACKEND=python or
=cython to force a choice. Both follow the same traversal and summation
orders, so results are identical bit for bit (see tests/test_backends.py).
"""

import os

_requested = os.environ.get("ENVYALLOC_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as kernels

    BACKEND = "python"
elif _requested == "cython":
    from . import _kernels as kernels  # type: ignore[no-redef]

    BACKEND = "cython"
elif _requested == "":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "python"
else:
    raise ImportError(f"ENVYALLOC_BACKEND must be 'python' or 'cython', got {_requested!r}")
