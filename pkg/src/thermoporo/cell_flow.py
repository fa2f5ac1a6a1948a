"""Pore-scale flow cell problems: the three permeability operators.

All three are built on the fluid part of the unit cell with no-slip or
no-penetration on the voxel interface:

* steady tensor: steady Stokes columns under unit body forces, averaged
  over the cell;
* memory kernel: the step response A(t) of unsteady Stokes from rest
  under constant unit forcing, with B1 = dA/dt; A(t) saturates to the
  steady tensor;
* inertial mobility: potential flow around the solid, giving the
  virtual-mass corrected mobility M = m*I - B3.

Each operator is assembled from cell averages of face velocities, which
makes the matrices Gram-like and hence symmetric up to solver residuals.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .pde.grid import Grid
from .pde import operators
from .pde.stokes import solve_stokes


@dataclass
class SteadyPermeability:
    B2: np.ndarray
    mu1: float
    asymmetry: float
    degenerate_axes: tuple
    reports: list = field(default_factory=list, repr=False)

    @property
    def dim(self):
        return self.B2.shape[0]


@dataclass
class PermeabilityKernel:
    times: np.ndarray
    b1: np.ndarray       # (M+1, dim, dim)
    a: np.ndarray        # running integral of b1, a[k] = step response at t_k
    mu1: float
    tau0: float
    rho_f: float
    tail: float
    reports: list = field(default_factory=list, repr=False)

    @property
    def dim(self):
        return self.b1.shape[1]

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self):
        return float(self.times[-1])

    def b1_at(self, s):
        """Linear interpolation of B1 at lag s; zero beyond the horizon
        (the kernel has decayed below its recorded tail there)."""
        if s <= 0.0:
            return self.b1[0]
        if s >= self.horizon:
            return np.zeros_like(self.b1[0])
        x = s / self.dt
        k = int(x)
        w = x - k
        return (1.0 - w) * self.b1[k] + w * self.b1[k + 1]

    def a_at(self, s):
        """Step response at lag s; saturated value beyond the horizon."""
        if s <= 0.0:
            return self.a[0]
        if s >= self.horizon:
            return self.a[-1]
        x = s / self.dt
        k = int(x)
        w = x - k
        return (1.0 - w) * self.a[k] + w * self.a[k + 1]


@dataclass
class InertialTensor:
    B3: np.ndarray
    M: np.ndarray
    porosity: float
    asymmetry: float
    reports: list = field(default_factory=list, repr=False)

    @property
    def dim(self):
        return self.M.shape[0]


def _mean_face_velocity(v, grid):
    """Cell integral of a staggered field, one entry per component."""
    vol = grid.cell_volume
    return np.array([vol * float(comp.sum()) for comp in v])


def _finalize_tensor(B, what, asym_tol=1e-6):
    norm = float(np.linalg.norm(B))
    asym = float(np.linalg.norm(B - B.T) / max(norm, 1e-300))
    if norm > 0 and asym > asym_tol:
        warnings.warn(
            f"{what} asymmetry {asym:.2e} exceeds {asym_tol:.0e}; "
            "solver tolerance may be too loose"
        )
    return (B + B.T) / 2.0, asym


def steady_permeability(geom, mu1, tol=1e-9, threads=1):
    """Steady Darcy tensor from unit-forced Stokes columns.

    Solved once at unit viscosity and scaled by 1/mu1 (the problem is
    linear in the viscosity).  Axes whose diagonal entry is numerically
    zero are flagged degenerate: the pore space does not conduct there.
    """
    if mu1 <= 0:
        raise ValueError("steady permeability needs mu1 > 0")
    geom.require_two_phases()
    fluid = geom.fluid_mask()
    grid = Grid(fluid.shape)
    d = grid.dim

    def solve_one(i):
        f = [1.0 if a == i else 0.0 for a in range(d)]
        return solve_stokes(fluid, 1.0, f, grid, tol=tol, label=f"steady-col{i}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, range(d)))
    else:
        results = [solve_one(i) for i in range(d)]

    B = np.zeros((d, d))
    reports = []
    for i, res in enumerate(results):
        res.report.require()
        B[:, i] = _mean_face_velocity(res.velocity, grid)
        reports.append(res.report)

    B, asym = _finalize_tensor(B, "steady permeability")
    scale = max(float(np.trace(B)) / d, 0.0)
    degenerate = tuple(bool(B[i, i] <= 1e-10 * scale + 1e-300) for i in range(d))
    if any(degenerate):
        warnings.warn(
            f"pore space does not conduct along axes {tuple(i for i, f in enumerate(degenerate) if f)}; "
            "the corresponding columns are degenerate"
        )
    return SteadyPermeability(B / mu1, mu1, asym, degenerate, reports)


def _estimate_rate(geom, mu1, tau0, rho_f, tol):
    """Slowest-mode relaxation rate of the unsteady cell problem,
    estimated from the contraction of successive step-response
    increments over a short probe run."""
    fluid = geom.fluid_mask()
    grid = Grid(fluid.shape)
    d = grid.dim
    dt = 0.01 * tau0 * rho_f / mu1
    a0 = tau0 * rho_f / dt
    f = [1.0] + [0.0] * (d - 1)
    v = None
    p = None
    means = []
    for _ in range(3):
        res = solve_stokes(fluid, mu1, f, grid, a0=a0, v_prev=v, tol=tol,
                           p0=p, label="kernel-probe")
        v, p = res.velocity, res.pressure
        means.append(_mean_face_velocity(v, grid))
    d1 = np.linalg.norm(means[1] - means[0])
    d2 = np.linalg.norm(means[2] - means[1])
    if d1 <= 0 or d2 <= 0:
        raise GeometryError("pore space carries no flow; cannot scale a kernel")
    r = min(d2 / d1, 0.999)
    lam = (1.0 / r - 1.0) / dt
    return lam


def kernel_permeability(geom, mu1, tau0, rho_f, dt=None, t_kernel=None,
                        tol=1e-9, tail_tol=1e-4, threads=1):
    """Time-sampled seepage kernel B1 and its step response A.

    A(t) is computed by marching the unsteady Stokes cell problem from
    rest under constant unit forcing (implicit Euler, divergence-free
    every step); B1 is the time derivative of A, sampled by centered
    differences with one-sided ends.  That sampling makes the running
    trapezoidal integral of B1 reproduce A exactly, so the saturation
    check against the steady tensor is free of quadrature error.

    When ``dt``/``t_kernel`` are omitted they default to 1/(20*rate) and
    10/rate, with the rate measured from a short probe run.
    """
    if mu1 <= 0 or tau0 <= 0:
        raise ValueError("kernel permeability needs mu1 > 0 and tau0 > 0")
    if rho_f <= 0:
        raise ValueError("rho_f must be positive")
    geom.require_two_phases()
    fluid = geom.fluid_mask()
    grid = Grid(fluid.shape)
    d = grid.dim

    if dt is None or t_kernel is None:
        lam = _estimate_rate(geom, mu1, tau0, rho_f, tol)
        if dt is None:
            dt = 1.0 / (20.0 * lam)
        if t_kernel is None:
            t_kernel = 10.0 / lam
    nsteps = max(2, int(np.ceil(t_kernel / dt)))
    a0 = tau0 * rho_f / dt

    A = np.zeros((nsteps + 1, d, d))
    reports = []

    def march_column(i):
        f = [1.0 if a == i else 0.0 for a in range(d)]
        v = None
        p = None
        col = np.zeros((nsteps + 1, d))
        reps = []
        for k in range(1, nsteps + 1):
            res = solve_stokes(fluid, mu1, f, grid, a0=a0, v_prev=v, tol=tol,
                               p0=p, label=f"kernel-col{i}-step{k}")
            res.report.require()
            v, p = res.velocity, res.pressure
            col[k] = _mean_face_velocity(v, grid)
            reps.append(res.report)
        return col, reps

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(march_column, range(d)))
    else:
        results = [march_column(i) for i in range(d)]
    for i, (col, reps) in enumerate(results):
        A[:, :, i] = col
        reports.extend(reps)

    times = dt * np.arange(nsteps + 1)
    B1 = np.empty_like(A)
    B1[0] = (A[1] - A[0]) / dt
    B1[-1] = (A[-1] - A[-2]) / dt
    B1[1:-1] = (A[2:] - A[:-2]) / (2.0 * dt)

    anorm = float(np.linalg.norm(A[-1]))
    tail = float(np.linalg.norm(A[-1] - A[-2])) / max(anorm, 1e-300)
    if tail > tail_tol:
        warnings.warn(
            f"kernel horizon too short: step response still moving "
            f"(tail {tail:.2e} > {tail_tol:.0e}); extend t_kernel"
        )
    return PermeabilityKernel(times, B1, A, mu1, tau0, rho_f, tail, reports)


def inertial_tensor(geom, tol=1e-9, threads=1):
    """Virtual-mass mobility M = m*I - B3 from cell potential flow.

    For each axis a periodic potential is solved so that the combined
    field (unit drive + potential gradient) has zero normal component on
    the interface and zero divergence in the fluid; its cell average is
    one column of M.
    """
    geom.require_two_phases()
    fluid = geom.fluid_mask()
    grid = Grid(fluid.shape)
    d = grid.dim
    m = geom.porosity
    active = operators.face_active(fluid)
    inv_h = grid.inv_h

    def solve_one(i):
        # the drive enters through the jump of the active indicator:
        # rhs = div(active * e_i), supported next to the interface
        rhs = (np.roll(active[i], -1, axis=i) - active[i]) * inv_h[i]
        phi, rep = operators.solve_masked_poisson_periodic(
            active, rhs, fluid, grid, tol=tol, label=f"inertial-col{i}"
        )
        rep.require()
        g = operators.grad_periodic(phi, inv_h)
        u = [active[a] * ((1.0 if a == i else 0.0) + g[a]) for a in range(d)]
        return _mean_face_velocity(u, grid), rep

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, range(d)))
    else:
        results = [solve_one(i) for i in range(d)]

    M = np.zeros((d, d))
    reports = []
    for i, (col, rep) in enumerate(results):
        M[:, i] = col
        reports.append(rep)

    M, asym = _finalize_tensor(M, "inertial mobility")
    return InertialTensor(m * np.eye(d) - M, M, m, asym, reports)
