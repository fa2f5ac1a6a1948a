"""Stencil kernel backend selection.

The compiled Cython kernels are preferred; the NumPy fallback is used when
the extension is missing (source tree without a build) or when
``THERMOPORO_FORCE_NUMPY`` is set (useful for the backend benchmark and
for cross-checking the two implementations).
"""

import os

from . import numpy_backend

if os.environ.get("THERMOPORO_FORCE_NUMPY"):
    _impl = numpy_backend
else:
    try:
        from . import _stencils as _impl
    except ImportError:
        _impl = numpy_backend

BACKEND = _impl.BACKEND

diffusion_apply_periodic = _impl.diffusion_apply_periodic
diffusion_apply_dirichlet0 = _impl.diffusion_apply_dirichlet0
helmholtz_masked = _impl.helmholtz_masked


def get_backend(name=None):
    """Return a kernel module by name ('cython', 'numpy' or None = active)."""
    if name is None:
        return _impl
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        from . import _stencils

        return _stencils
    raise ValueError(f"unknown kernel backend {name!r}")
