"""Dense numerical kernels with a compiled core and a numpy fallback.

The compiled module ``zplab._ckernels`` is preferred.  Setting the
environment variable ``ZPLAB_PURE=1`` forces the numpy implementation, as
does a missing or broken build.  Every kernel takes contiguous float64
arrays holding the *values* of aligned finitely supported sequences.
"""
import importlib
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_NAMES = ("lp_norm", "omega", "qnorm", "defect", "defect_ratios",
          "triangle_ratios", "lift_disjoint", "sphere_objective")


def available_backends():
    names = ["python"]
    try:
        importlib.import_module("zplab._ckernels")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get_backend(name):
    """Return the kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("zplab._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("ZPLAB_PURE", "") not in ("", "0"):
        return _pykernels
    try:
        return get_backend("cython")
    except ImportError:
        log.debug("compiled kernels unavailable, using numpy fallback")
        return _pykernels


_backend = _select()
BACKEND = _backend.NAME

lp_norm = _backend.lp_norm
omega = _backend.omega
qnorm = _backend.qnorm
defect = _backend.defect
defect_ratios = _backend.defect_ratios
triangle_ratios = _backend.triangle_ratios
lift_disjoint = _backend.lift_disjoint
sphere_objective = _backend.sphere_objective
