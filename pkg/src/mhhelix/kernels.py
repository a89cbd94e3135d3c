"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when importable; otherwise,
or when the environment variable ``MHHELIX_PURE_PYTHON`` is set to a
non-empty value other than ``0``, the pure-Python ``_pykernels`` is used.
"""
import os

from . import _pykernels

_force_pure = os.environ.get("MHHELIX_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

KAPPA_MAX = _pykernels.KAPPA_MAX
ETA_MAX = _pykernels.ETA_MAX
log_norm_const = _impl.log_norm_const
circle_nll = _impl.circle_nll
fit_circle_nm = _impl.fit_circle_nm


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
