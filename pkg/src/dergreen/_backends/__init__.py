"""Evaluation backend selection.

The compiled Cython core is used when it was built; otherwise the numpy
implementation takes over.  ``DERGREEN_BACKEND=pure`` forces the fallback,
``DERGREEN_BACKEND=compiled`` makes a missing extension an error.
"""
import os

from . import pure

_requested = os.environ.get("DERGREEN_BACKEND", "").strip().lower()

if _requested == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _evalcore as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "DERGREEN_BACKEND=compiled but the extension is not built; "
                "reinstall with a C compiler available")
        _impl = pure
        BACKEND = "pure"

eval_exppoly = _impl.eval_exppoly
eval_bivariate = _impl.eval_bivariate


def backends():
    """Return the available backends as a name -> module mapping."""
    out = {"pure": pure}
    try:
        from . import _evalcore
        out["compiled"] = _evalcore
    except ImportError:
        pass
    return out
