"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Set ``QBILLIARD_KERNELS=python`` to force the fallback.
"""

import contextlib
import os

from . import _kernels_py as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

_BACKENDS = {"python": python_kernels}
if compiled_kernels is not None:
    _BACKENDS["compiled"] = compiled_kernels

if os.environ.get("QBILLIARD_KERNELS", "").lower() == "python" or compiled_kernels is None:
    _active = "python"
else:
    _active = "compiled"


def available():
    return sorted(_BACKENDS)


def active_name():
    return _active


def kernels():
    return _BACKENDS[_active]


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available()}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
