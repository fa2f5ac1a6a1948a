"""Periodic thermal cell problems and the effective conductivity tensor.

For each axis direction a corrector field is solved on the unit cell so
that the total flux of (corrector gradient + unit drive) is
divergence-free; averaging that flux over the cell gives one column of
the effective conductivity.  Face conductivities are harmonic means of
the two adjacent voxel values, which keeps grid-aligned laminates exact.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ThermoporoError
from .pde.grid import Grid
from .pde import operators


@dataclass
class ThermalCellSolution:
    geometry: object
    kappa0f: float
    kappa0s: float
    K: np.ndarray = field(repr=False)
    theta: list = field(repr=False)
    reports: list = field(default_factory=list)

    @property
    def dim(self):
        return self.K.ndim


@dataclass
class ConductivityTensor:
    btheta: np.ndarray
    kappa_hat0: float
    asymmetry: float

    def __post_init__(self):
        if self.asymmetry > 1e-6:
            raise ThermoporoError(
                f"conductivity tensor asymmetry {self.asymmetry:.3e} exceeds 1e-6; "
                "the cell solves are inconsistent"
            )

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.btheta)


def conductivity_field(geom, kappa0f, kappa0s):
    chi = geom.chi.astype(float)
    return kappa0f * chi + kappa0s * (1.0 - chi)


def solve_thermal_cell(geom, kappa0f, kappa0s, tol=1e-9, threads=1):
    """Solve the dim periodic corrector problems; correctors are mean-zero."""
    if kappa0f <= 0 or kappa0s <= 0:
        raise ValueError("conductivities must be positive")
    geom.require_two_phases()
    K = conductivity_field(geom, kappa0f, kappa0s)
    grid = Grid(K.shape)
    kf = operators.harmonic_face_coefficients(K)
    inv_h = grid.inv_h

    def solve_one(i):
        # rhs = -div(K e_i) moved to the right-hand side of -div(K grad u)
        rhs = (np.roll(kf[i], -1, axis=i) - kf[i]) * inv_h[i]
        return operators.solve_diffusion_periodic(
            kf, rhs, grid, tol=tol, label=f"thermal-cell-{i}"
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, range(grid.dim)))
    else:
        results = [solve_one(i) for i in range(grid.dim)]

    theta, reports = [], []
    for u, rep in results:
        rep.require()
        theta.append(u)
        reports.append(rep)
    return ThermalCellSolution(geom, kappa0f, kappa0s, K, theta, reports)


def effective_conductivity(sol):
    """Average the total flux of each corrector problem into a tensor.

    Column i is the cell average of K*(grad theta_i + e_i) evaluated on
    faces, which is the flux the corrector problem makes divergence-free.
    The published tensor is the symmetrized matrix; the raw asymmetry is
    kept as a consistency measure.
    """
    grid = Grid(sol.K.shape)
    kf = operators.harmonic_face_coefficients(sol.K)
    d = grid.dim
    vol = grid.cell_volume
    B = np.zeros((d, d))
    for i in range(d):
        g = operators.grad_periodic(sol.theta[i], grid.inv_h)
        for j in range(d):
            drive = 1.0 if i == j else 0.0
            B[j, i] = vol * float((kf[j] * (g[j] + drive)).sum())
    asym = float(np.linalg.norm(B - B.T) / max(np.linalg.norm(B), 1e-300))
    return ConductivityTensor((B + B.T) / 2.0, float(sol.K.mean()), asym)


def conductivity_bounds(sol):
    """Classical series/parallel bounds from the voxel values."""
    K = sol.K
    lower = 1.0 / float((1.0 / K).mean())
    upper = float(K.mean())
    return lower, upper
