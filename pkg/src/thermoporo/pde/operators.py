"""Staggered-grid calculus and scalar elliptic solves.

Sign conventions (periodic and bounded alike):

* gradient component ``a`` at the lower ``a``-face of cell ``c``:
  ``(u[c] - u[c - e_a]) / h_a``
* divergence at cell ``c``: ``sum_a (v_a[c + e_a] - v_a[c]) / h_a``

With plain unweighted sums these are exact negative adjoints of each
other, which is what makes the saddle-point and projection solvers
below well posed discretely.
"""

import numpy as np

from ..errors import IncompatibleDataError, LayoutError
from .. import kernels
from .cg import pcg, jacobi_preconditioner, mean_zero_projector
from .grid import GridField


# ---------------------------------------------------------------------------
# pointwise face constructions


def face_active(mask):
    """0/1 float arrays marking faces whose two adjacent cells are both true.

    Periodic layout: entry ``c`` of component ``a`` is the lower
    ``a``-face of cell ``c``.
    """
    m = np.asarray(mask, dtype=bool)
    return [(m & np.roll(m, 1, axis=a)).astype(float) for a in range(m.ndim)]


def harmonic_face_coefficients(K):
    """Harmonic mean of the two adjacent cell conductivities, periodic."""
    K = np.asarray(K, dtype=float)
    out = []
    for a in range(K.ndim):
        lo = np.roll(K, 1, axis=a)
        s = K + lo
        kf = np.zeros_like(K)
        np.divide(2.0 * K * lo, s, out=kf, where=s > 0)
        out.append(kf)
    return out


def harmonic_face_coefficients_bounded(K):
    """Harmonic face coefficients on a bounded grid (n+1 faces per axis).

    Boundary faces take the adjacent cell value; combined with the
    half-cell flux convention this keeps piecewise-affine fields exact.
    """
    K = np.asarray(K, dtype=float)
    out = []
    for a in range(K.ndim):
        shape = list(K.shape)
        shape[a] += 1
        kf = np.zeros(shape)
        idx = [slice(None)] * K.ndim
        n = K.shape[a]

        idx[a] = slice(1, n)
        hi_sl = tuple(idx)
        idx[a] = slice(0, n - 1)
        lo = K[tuple(idx)]
        idx[a] = slice(1, n)
        hi = K[tuple(idx)]
        s = hi + lo
        mid = np.zeros_like(hi)
        np.divide(2.0 * hi * lo, s, out=mid, where=s > 0)
        kf[hi_sl] = mid

        idx[a] = slice(0, 1)
        kf[tuple(idx)] = K[tuple(idx)]
        idx[a] = slice(n, n + 1)
        face_hi = tuple(idx)
        idx[a] = slice(n - 1, n)
        kf[face_hi] = K[tuple(idx)]
        out.append(kf)
    return out


# ---------------------------------------------------------------------------
# periodic calculus


def grad_periodic(u, inv_h):
    return [(u - np.roll(u, 1, axis=a)) * inv_h[a] for a in range(u.ndim)]


def div_periodic(v, inv_h):
    out = np.zeros_like(v[0])
    for a, comp in enumerate(v):
        out += (np.roll(comp, -1, axis=a) - comp) * inv_h[a]
    return out


# ---------------------------------------------------------------------------
# bounded-grid calculus (face arrays carry n+1 entries along their own axis)


def div_bounded(v, inv_h):
    dim = len(v)
    out = None
    for a, comp in enumerate(v):
        n = comp.shape[a] - 1
        idx = [slice(None)] * dim
        idx[a] = slice(1, n + 1)
        hi = comp[tuple(idx)]
        idx[a] = slice(0, n)
        lo = comp[tuple(idx)]
        term = (hi - lo) * inv_h[a]
        out = term if out is None else out + term
    return out


def grad_interior_bounded(u, inv_h):
    """Gradient on interior faces; boundary-face entries are zero."""
    dim = u.ndim
    out = []
    for a in range(dim):
        n = u.shape[a]
        shape = list(u.shape)
        shape[a] = n + 1
        g = np.zeros(shape)
        idx = [slice(None)] * dim
        idx[a] = slice(1, n)
        face = tuple(idx)
        idx[a] = slice(1, n)
        hi = u[tuple(idx)]
        idx[a] = slice(0, n - 1)
        lo = u[tuple(idx)]
        g[face] = (hi - lo) * inv_h[a]
        out.append(g)
    return out


def diag_flux_div_bounded(tdiag, u, inv_h):
    """div of the flux ``T_aa * d_a u`` through interior faces only."""
    g = grad_interior_bounded(u, inv_h)
    return div_bounded([tdiag[a] * g[a] for a in range(u.ndim)], inv_h)


def offdiag_flux_faces_bounded(T, u, inv_h):
    """Interior-face fluxes from the off-diagonal tensor entries.

    The tangential derivative at an ``a``-face is the average of the
    four (two in 2D) surrounding ``b``-face differences; rows of
    ``b``-faces outside the domain reuse the nearest interior row.
    Boundary ``a``-faces stay zero: their total flux is boundary data.
    """
    T = np.asarray(T, dtype=float)
    dim = u.ndim
    g = grad_interior_bounded(u, inv_h)
    # replicate edge rows so averaging near walls stays one-sided
    g_pad = []
    for b in range(dim):
        gb = g[b].copy()
        idx = [slice(None)] * dim
        idx[b] = slice(0, 1)
        lo_face = tuple(idx)
        idx[b] = slice(1, 2)
        gb[lo_face] = gb[tuple(idx)]
        n = u.shape[b]
        idx[b] = slice(n, n + 1)
        hi_face = tuple(idx)
        idx[b] = slice(n - 1, n)
        gb[hi_face] = gb[tuple(idx)]
        g_pad.append(gb)

    out = []
    for a in range(dim):
        shape = list(u.shape)
        shape[a] += 1
        fa = np.zeros(shape)
        n_a = u.shape[a]
        for b in range(dim):
            if b == a or T[a, b] == 0.0:
                continue
            gb = g_pad[b]
            # average the b-face values onto cell centers, then onto a-faces
            n_b = u.shape[b]
            idx = [slice(None)] * dim
            idx[b] = slice(0, n_b)
            lo = gb[tuple(idx)]
            idx[b] = slice(1, n_b + 1)
            hi = gb[tuple(idx)]
            at_cells = 0.5 * (lo + hi)
            idx = [slice(None)] * dim
            idx[a] = slice(1, n_a)
            interior = tuple(idx)
            idx[a] = slice(1, n_a)
            up = at_cells[tuple(idx)]
            idx[a] = slice(0, n_a - 1)
            dn = at_cells[tuple(idx)]
            fa[interior] += T[a, b] * 0.5 * (up + dn)
        out.append(fa)
    return out


def faces_to_cells(v):
    """Average bounded face arrays onto cell centers, one array per axis."""
    dim = len(v)
    out = []
    for a, comp in enumerate(v):
        n = comp.shape[a] - 1
        idx = [slice(None)] * dim
        idx[a] = slice(0, n)
        lo = comp[tuple(idx)]
        idx[a] = slice(1, n + 1)
        hi = comp[tuple(idx)]
        out.append(0.5 * (lo + hi))
    return out


# ---------------------------------------------------------------------------
# GridField wrappers


def grad(field):
    if field.role != "cell":
        raise LayoutError("grad expects a cell-centered scalar field")
    g = field.grid
    if g.periodic:
        data = grad_periodic(field.data, g.inv_h)
    else:
        data = grad_interior_bounded(field.data, g.inv_h)
    return GridField.faces(g, data)


def div(field):
    if field.role != "faces":
        raise LayoutError("div expects a staggered face field")
    g = field.grid
    if g.periodic:
        data = div_periodic(field.data, g.inv_h)
    else:
        data = div_bounded(field.data, g.inv_h)
    return GridField.cell(g, data)


# ---------------------------------------------------------------------------
# elliptic solves


def _check_compatible(total, scale, what):
    if abs(total) > 1e-8 * max(scale, 1.0):
        raise IncompatibleDataError(
            f"{what} must integrate to zero for a pure-flux problem; "
            f"got {total:.3e}"
        )


def solve_diffusion_periodic(face_coeffs, rhs, grid, tol=1e-9, x0=None,
                             maxiter=None, label="diffusion"):
    """Solve ``-div(K grad u) = rhs`` on the periodic grid, mean-zero gauge.

    ``face_coeffs`` follows the periodic lower-face layout.  Returns
    ``(u, SolverReport)``.
    """
    inv_h2 = grid.inv_h2
    rhs = np.ascontiguousarray(rhs, dtype=float)
    _check_compatible(float(rhs.sum()) * grid.cell_volume,
                      float(np.abs(rhs).sum()) * grid.cell_volume, "rhs")

    diag = np.zeros(grid.shape)
    for a, kf in enumerate(face_coeffs):
        diag += inv_h2[a] * (kf + np.roll(kf, -1, axis=a))

    buf = np.empty(grid.shape)

    def apply_op(u):
        kernels.diffusion_apply_periodic(u, face_coeffs, inv_h2, buf)
        return -buf

    return pcg(
        apply_op, rhs, x0=x0, rtol=tol, maxiter=maxiter,
        precond=jacobi_preconditioner(diag),
        project=mean_zero_projector(), label=label,
    )


def solve_diffusion_dirichlet(face_coeffs, rhs, grid, bc=None, tol=1e-9,
                              x0=None, maxiter=None, label="diffusion-dirichlet"):
    """Solve ``-div(K grad u) = rhs`` with Dirichlet walls on a bounded grid.

    ``face_coeffs`` follows the bounded layout (n+1 faces per axis).
    ``bc`` gives the wall values as ``[(low_a, high_a), ...]`` per axis;
    each entry is an array shaped like the corresponding boundary-face
    slice (or a scalar).  ``None`` means homogeneous.  Wall values act at
    half-cell distance.
    """
    dim = grid.dim
    inv_h2 = grid.inv_h2
    b = np.array(rhs, dtype=float, copy=True)

    if bc is not None:
        for a in range(dim):
            low, high = bc[a]
            n = grid.shape[a]
            idx = [slice(None)] * dim
            kf = face_coeffs[a]
            if low is not None:
                idx[a] = slice(0, 1)
                b[tuple(idx)] += 2.0 * inv_h2[a] * kf[tuple(idx)] * np.asarray(low)
            if high is not None:
                idx[a] = slice(n, n + 1)
                k_hi = kf[tuple(idx)]
                idx[a] = slice(n - 1, n)
                b[tuple(idx)] += 2.0 * inv_h2[a] * k_hi * np.asarray(high)

    diag = np.zeros(grid.shape)
    for a, kf in enumerate(face_coeffs):
        n = grid.shape[a]
        w = kf.copy()
        idx = [slice(None)] * dim
        idx[a] = slice(0, 1)
        w[tuple(idx)] *= 2.0
        idx[a] = slice(n, n + 1)
        w[tuple(idx)] *= 2.0
        idx[a] = slice(0, n)
        lo = w[tuple(idx)]
        idx[a] = slice(1, n + 1)
        hi = w[tuple(idx)]
        diag += inv_h2[a] * (lo + hi)

    buf = np.empty(grid.shape)

    def apply_op(u):
        kernels.diffusion_apply_dirichlet0(u, face_coeffs, inv_h2, buf)
        return -buf

    return pcg(
        apply_op, b, x0=x0, rtol=tol, maxiter=maxiter,
        precond=jacobi_preconditioner(diag), label=label,
    )


def solve_masked_poisson_periodic(active_faces, rhs, fluid_mask, grid,
                                  tol=1e-9, x0=None, maxiter=None,
                                  label="masked-poisson"):
    """Solve ``-div(active grad phi) = rhs`` on the fluid cells, periodic.

    ``active_faces`` is the 0/1 fluid-fluid face indicator, so solid
    cells carry empty rows; the solution is gauged to zero mean over the
    fluid cells and is identically zero elsewhere.  Used for the
    potential-flow projection behind the inertial permeability factor.
    """
    fluid = np.asarray(fluid_mask, dtype=bool)
    rhs = np.asarray(rhs, dtype=float)
    total = float(rhs[fluid].sum()) * grid.cell_volume
    _check_compatible(total, float(np.abs(rhs).sum()) * grid.cell_volume,
                      "interface flux")

    inv_h2 = grid.inv_h2
    diag = np.zeros(grid.shape)
    for a, kf in enumerate(active_faces):
        diag += inv_h2[a] * (kf + np.roll(kf, -1, axis=a))

    buf = np.empty(grid.shape)

    def apply_op(u):
        kernels.diffusion_apply_periodic(u, active_faces, inv_h2, buf)
        return -buf

    return pcg(
        apply_op, rhs * fluid, x0=x0, rtol=tol, maxiter=maxiter,
        precond=jacobi_preconditioner(diag),
        project=mean_zero_projector(weight=fluid.astype(float)),
        label=label,
    )
