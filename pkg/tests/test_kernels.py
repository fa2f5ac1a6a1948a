"""Compiled and NumPy stencil backends must agree bit-for-bit-ish."""

import numpy as np
import pytest

from thermoporo import kernels

cython = pytest.importorskip("thermoporo.kernels._stencils",
                             reason="compiled backend not built")
numpy_backend = kernels.get_backend("numpy")


def _rel(a, b):
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


@pytest.mark.parametrize("shape", [(32, 17), (9, 8, 7)])
def test_periodic_diffusion_backends_agree(shape):
    rng = np.random.default_rng(1)
    u = rng.standard_normal(shape)
    kf = [np.ascontiguousarray(rng.random(shape) + 0.1) for _ in shape]
    inv_h2 = np.array([(1.0 * n) ** 2 for n in shape])
    a = np.empty_like(u)
    b = np.empty_like(u)
    cython.diffusion_apply_periodic(u, kf, inv_h2, a)
    numpy_backend.diffusion_apply_periodic(u, kf, inv_h2, b)
    assert _rel(a, b) <= 1e-13


@pytest.mark.parametrize("shape", [(16, 21), (6, 7, 8)])
def test_dirichlet_diffusion_backends_agree(shape):
    rng = np.random.default_rng(2)
    u = rng.standard_normal(shape)
    kf = []
    for ax, n in enumerate(shape):
        fshape = list(shape)
        fshape[ax] = n + 1
        kf.append(np.ascontiguousarray(rng.random(fshape) + 0.1))
    inv_h2 = np.array([(1.0 * n) ** 2 for n in shape])
    a = np.empty_like(u)
    b = np.empty_like(u)
    cython.diffusion_apply_dirichlet0(u, kf, inv_h2, a)
    numpy_backend.diffusion_apply_dirichlet0(u, kf, inv_h2, b)
    assert _rel(a, b) <= 1e-13


@pytest.mark.parametrize("shape", [(24, 24), (8, 9, 10)])
def test_masked_helmholtz_backends_agree(shape):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(shape)
    active = (rng.random(shape) < 0.7).astype(np.float64)
    inv_h2 = np.array([(1.0 * n) ** 2 for n in shape])
    a = np.empty_like(u)
    b = np.empty_like(u)
    cython.helmholtz_masked(u, active, 2.5, 0.7, inv_h2, a)
    numpy_backend.helmholtz_masked(u, active, 2.5, 0.7, inv_h2, b)
    assert _rel(a, b) <= 1e-13
    assert np.all(a[active == 0.0] == 0.0)


def test_backend_selection():
    assert kernels.get_backend("numpy").BACKEND == "numpy"
    assert kernels.get_backend("cython").BACKEND == "cython"
    assert kernels.get_backend().BACKEND in ("numpy", "cython")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
