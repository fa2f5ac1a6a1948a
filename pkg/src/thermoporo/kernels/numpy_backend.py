"""Pure-NumPy implementations of the hot stencil kernels.

These are the fallback twins of the compiled Cython kernels in
``_stencils.pyx``; both expose the same signatures and are selected at
import time by :mod:`thermoporo.kernels`.  All arrays are C-contiguous
float64.  Face-coefficient arrays follow the convention that entry ``c``
of the axis-``a`` array sits on the *lower* face of cell ``c``.
"""

import numpy as np

BACKEND = "numpy"


def diffusion_apply_periodic(u, face_coeffs, inv_h2, out):
    """out = div(K grad u) on a periodic cell-centered grid.

    ``face_coeffs[a]`` has the same shape as ``u``; the flux through the
    lower face of cell ``c`` along axis ``a`` is
    ``face_coeffs[a][c] * (u[c] - u[c - e_a]) / h_a``.
    """
    out[...] = 0.0
    for a in range(u.ndim):
        kf = face_coeffs[a]
        lower = kf * (u - np.roll(u, 1, axis=a))
        out += inv_h2[a] * (np.roll(lower, -1, axis=a) - lower)
    return out


def diffusion_apply_dirichlet0(u, face_coeffs, inv_h2, out):
    """out = div(K grad u) with homogeneous Dirichlet walls.

    ``face_coeffs[a]`` has shape ``n_a + 1`` along axis ``a`` (one entry
    per face, boundary faces included).  Boundary fluxes use the
    half-cell distance: ``2 * K * (0 - u_cell) / h``.
    """
    out[...] = 0.0
    for a in range(u.ndim):
        kf = face_coeffs[a]
        n = u.shape[a]
        flux = np.zeros_like(kf)
        src = [slice(None)] * u.ndim

        # interior faces 1..n-1
        src[a] = slice(1, n)
        hi = u[tuple(src)]
        src[a] = slice(0, n - 1)
        lo = u[tuple(src)]
        src[a] = slice(1, n)
        flux[tuple(src)] = kf[tuple(src)] * (hi - lo)

        # boundary faces, ghost value 0 at half-cell distance
        src[a] = slice(0, 1)
        flux[tuple(src)] = kf[tuple(src)] * 2.0 * u[tuple(src)]
        src_face = list(src)
        src_face[a] = slice(n, n + 1)
        src_cell = list(src)
        src_cell[a] = slice(n - 1, n)
        flux[tuple(src_face)] = kf[tuple(src_face)] * (-2.0) * u[tuple(src_cell)]

        src[a] = slice(1, n + 1)
        upper = flux[tuple(src)]
        src[a] = slice(0, n)
        lower = flux[tuple(src)]
        out += inv_h2[a] * (upper - lower)
    return out


def helmholtz_masked(u, active, alpha, beta, inv_h2, out):
    """out = alpha*u - beta*lap(u) on active sites of a periodic grid.

    ``active`` is a float64 0/1 mask with the same shape as ``u``; the
    field is clamped to zero on inactive sites before the stencil is
    applied and the output is zero there as well.
    """
    ua = u * active
    out[...] = alpha * ua
    for a in range(u.ndim):
        out -= (beta * inv_h2[a]) * (
            np.roll(ua, 1, axis=a) + np.roll(ua, -1, axis=a) - 2.0 * ua
        )
    out *= active
    return out
