"""Backend selection for the hot kernels.

The compiled extension ``fracburgers._core`` is used when it is importable;
otherwise (or when ``FRACBURGERS_PURE_PYTHON=1``) the numpy fallback in
``fracburgers._core_py`` is used. Both expose the same three functions.
"""

import os

from . import _core_py

_force_pure = os.environ.get("FRACBURGERS_PURE_PYTHON", "").strip() not in ("", "0")

if _force_pure:
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

second_difference_sum = _impl.second_difference_sum
circular_convolve = _impl.circular_convolve
trig_eval = _impl.trig_eval


def backends():
    """Return the available backend modules keyed by name."""
    found = {"python": _core_py}
    try:
        from . import _core  # type: ignore[attr-defined]
        found["compiled"] = _core
    except ImportError:
        pass
    return found
