"""Incompressible Stokes flow on the staggered grid, periodic cell domain.

Velocity unknowns live on fluid-fluid faces only; faces touching a
solid cell are clamped to zero, which enforces no-slip on the voxel
interface.  The saddle system

    (a0 I - mu lap) v + grad p = f,   div v = 0   on fluid cells

is reduced to its pressure Schur complement ``S = D A^{-1} G`` and
solved with conjugate gradients (S is symmetric negative semidefinite
because D = -G^T under plain sums; the sign is flipped and the
constant-on-fluid null space projected out).  Inner ``A``-solves are
started from zero so the outer operator stays linear and symmetric.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .cg import pcg, mean_zero_projector
from .grid import Grid


@dataclass
class StokesResult:
    velocity: list
    pressure: np.ndarray
    report: object
    div_inf: float
    inner_iterations: int


def _as_face_forcing(forcing, active, grid):
    dim = grid.dim
    if len(forcing) != dim:
        raise ValueError(f"forcing needs {dim} components")
    out = []
    for a in range(dim):
        comp = forcing[a]
        if np.ndim(comp) == 0:
            arr = float(comp) * active[a]
        else:
            arr = np.asarray(comp, dtype=float) * active[a]
        out.append(np.ascontiguousarray(arr))
    return out


def solve_stokes(fluid_mask, mu, forcing, grid=None, a0=0.0, v_prev=None,
                 tol=1e-9, p0=None, inner_rtol=1e-11, maxiter=None,
                 label="stokes"):
    """Solve the masked Stokes saddle problem; returns a StokesResult.

    ``forcing`` is either a length-``dim`` sequence of scalars (constant
    body force) or of face arrays.  ``a0 > 0`` adds the reaction term of
    an implicit time step, with ``v_prev`` entering as ``a0 * v_prev``
    on the right-hand side.  ``p0`` warm-starts the pressure iteration.
    """
    fluid = np.asarray(fluid_mask, dtype=bool)
    if grid is None:
        grid = Grid(fluid.shape)
    dim = grid.dim
    inv_h = grid.inv_h
    inv_h2 = grid.inv_h2
    active = [np.ascontiguousarray(m) for m in _active_faces(fluid)]
    fluidf = fluid.astype(float)

    f = _as_face_forcing(forcing, active, grid)
    if a0 != 0.0 and v_prev is not None:
        for a in range(dim):
            f[a] = f[a] + a0 * v_prev[a] * active[a]

    bufs = [np.empty(grid.shape) for _ in range(dim)]
    inner_count = [0]

    def apply_A(w, a):
        kernels.helmholtz_masked(w, active[a], a0, mu, inv_h2, bufs[a])
        return bufs[a].copy()

    def solve_A(rhs_a, a, x0=None):
        x, rep = pcg(lambda w: apply_A(w, a), rhs_a, x0=x0,
                     rtol=inner_rtol, label=f"{label}-inner{a}")
        rep.require()
        inner_count[0] += rep.iterations
        return x

    def grad_p(p):
        return [((p - np.roll(p, 1, axis=a)) * inv_h[a]) * active[a]
                for a in range(dim)]

    def div_v(v):
        out = np.zeros(grid.shape)
        for a in range(dim):
            out += (np.roll(v[a], -1, axis=a) - v[a]) * inv_h[a]
        return out * fluidf

    # right-hand side of the Schur system: D A^{-1} f
    v_f = [solve_A(f[a], a) for a in range(dim)]
    b_s = div_v(v_f)

    def apply_S(p):
        g = grad_p(p)
        w = [solve_A(g[a], a) for a in range(dim)]
        return -div_v(w)

    project = mean_zero_projector(weight=fluidf)
    p, report = pcg(apply_S, -b_s, x0=p0, rtol=tol, maxiter=maxiter,
                    project=project, label=f"{label}-schur")
    report.label = label

    g = grad_p(p)
    v = [solve_A(f[a] - g[a], a,
                 x0=None if v_prev is None else v_prev[a] * active[a])
         for a in range(dim)]
    div_inf = float(np.abs(div_v(v)).max())
    return StokesResult(v, p, report, div_inf, inner_count[0])


def _active_faces(fluid):
    return [(fluid & np.roll(fluid, 1, axis=a)).astype(float)
            for a in range(fluid.ndim)]
