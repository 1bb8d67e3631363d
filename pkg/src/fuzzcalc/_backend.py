"""Numerical backend selection.

The hot kernels in :mod:`fuzzcalc._kernels` exist in two flavours: a
numba-compiled one and a pure-numpy fallback.  Which flavour is bound at
import time is controlled by the ``FUZZCALC_BACKEND`` environment variable:

``auto``  (default) use numba when it imports cleanly, numpy otherwise
``numba`` require numba; warn and fall back to numpy if it is missing
``numpy`` force the pure-numpy path even when numba is available

``fuzzcalc.backend_name()`` reports the choice that won.
"""

from __future__ import annotations

import os
import warnings

_ENV_VAR = "FUZZCALC_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _resolve() -> str:
    want = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if want not in _CHOICES:
        warnings.warn(
            f"{_ENV_VAR}={want!r} is not one of {_CHOICES}; using 'auto'",
            stacklevel=2,
        )
        want = "auto"
    if want == "numpy":
        return "numpy"
    if _numba_available():
        return "numba"
    if want == "numba":
        warnings.warn(
            f"{_ENV_VAR}=numba requested but numba is not importable; "
            "falling back to the pure-numpy kernels",
            stacklevel=2,
        )
    return "numpy"


BACKEND: str = _resolve()
HAS_NUMBA: bool = BACKEND == "numba"


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND
