"""Independent fine-scale checks for the upscaled tensors.

Three instruments, all desk scale:

* ``two_scale_check`` evaluates the oscillatory pairing
  integral(u_eps(x) sigma(x, x/eps) dx) for u_eps(x) = phi(x) psi(x/eps)
  against its separated limit integral(integral(phi(x) psi(y) sigma(x,y)
  dy) dx) and reports the decay of the gap as eps shrinks.  Shipped
  presets have closed-form limits.

* ``dns_conduction`` solves steady conduction on the inflated
  microstructure with affine wall data and compares the volume-averaged
  flux to the effective-tensor prediction.  The fine solve never sees
  the cell solver's periodic correctors, so agreement is a genuine
  cross-check, limited only by wall boundary layers that shrink with
  eps.

* ``dns_stokes`` solves Stokes flow on a periodic tiling of the pore
  space with viscosity scaled by eps^2; the mean seepage velocity is
  then tiling-invariant and equals the steady mobility column directly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cell_flow import steady_permeability
from .cell_thermal import effective_conductivity, solve_thermal_cell
from .errors import GeometryError, ThermoporoError
from .geometry import inflate, percolates
from .pde import operators
from .pde.grid import Grid
from .pde.stokes import solve_stokes


# ---------------------------------------------------------------------------
# two-scale pairing


@dataclass
class TwoScaleReport:
    """Pairing values and errors across an eps sweep, finest last."""

    rows: list                  # (eps, pairing value, |pairing - limit|)
    limit: float
    fitted_order: float = None  # None when every error sits at noise level

    def __post_init__(self):
        eps = [r[0] for r in self.rows]
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ThermoporoError("eps values must be strictly decreasing")
        if not all(math.isfinite(r[1]) and math.isfinite(r[2])
                   for r in self.rows):
            raise ThermoporoError("pairing produced non-finite values")

    @property
    def errors(self):
        return [r[2] for r in self.rows]

    def as_text(self):
        lines = ["# eps  pairing  error"]
        for eps, val, err in self.rows:
            lines.append(f"{eps:.10g}  {val:.17g}  {err:.6e}")
        lines.append(f"# limit = {self.limit:.17g}")
        order = "nan" if self.fitted_order is None else f"{self.fitted_order:.4f}"
        lines.append(f"# fitted_order = {order}")
        return "\n".join(lines) + "\n"


def _check_eps(eps):
    k = 1.0 / float(eps)
    if abs(k - round(k)) > 1e-9:
        raise ThermoporoError(f"1/eps must be an integer, got eps={eps}")
    return int(round(k))


def two_scale_check(phi, psi, sigma, eps_list, limit=None, nodes_per_cell=12,
                    noise_floor=1e-12):
    """Quadrature check of the oscillatory pairing against its limit.

    ``phi`` is a smooth function on [0,1]; ``psi`` and the second slot
    of ``sigma(x, y)`` are 1-periodic.  Each pairing integral uses
    composite Gauss-Legendre with ``nodes_per_cell`` points per eps-cell
    so the oscillation is resolved exactly at every eps.  ``limit=None``
    computes the separated double integral by fine quadrature.  Errors
    below ``noise_floor`` (relative to the limit scale) are excluded
    from the decay fit; with fewer than two fit points ``fitted_order``
    is None.
    """
    eps_sorted = sorted(set(float(e) for e in eps_list), reverse=True)
    if not eps_sorted:
        raise ThermoporoError("need at least one eps value")
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_cell)

    def composite(f, cells):
        h = 1.0 / cells
        left = np.arange(cells) * h
        x = left[:, None] + 0.5 * h * (xg[None, :] + 1.0)
        return float((0.5 * h * wg[None, :] * f(x)).sum())

    if limit is None:
        cells = 32
        h = 1.0 / cells
        left = np.arange(cells) * h
        pts = left[:, None] + 0.5 * h * (xg[None, :] + 1.0)
        x = pts.ravel()
        w = np.tile(0.5 * h * wg, cells)
        X, Y = np.meshgrid(x, x, indexing="ij")
        limit = float((w[:, None] * w[None, :]
                       * phi(X) * psi(Y) * sigma(X, Y)).sum())

    rows = []
    for eps in eps_sorted:
        k = _check_eps(eps)
        val = composite(lambda x: phi(x) * psi(x / eps) * sigma(x, x / eps),
                        cells=k)
        rows.append((eps, val, abs(val - limit)))

    scale = max(abs(limit), 1.0)
    fit = [(r[0], r[2]) for r in rows if r[2] > noise_floor * scale]
    order = None
    if len(fit) >= 2:
        le = np.log([f[0] for f in fit])
        lr = np.log([f[1] for f in fit])
        order = float(np.polyfit(le, lr, 1)[0])
    return TwoScaleReport(rows=rows, limit=limit, fitted_order=order)


@dataclass(frozen=True)
class TwoScalePreset:
    name: str
    phi: object
    psi: object
    sigma: object
    limit: float
    exact: bool       # pairing equals the limit at every admissible eps
    note: str


_E = math.e

TWO_SCALE_PRESETS = {
    # sigma ignores y entirely: the oscillation never couples to the
    # test function, so the pairing is eps-independent
    "separable-mean": TwoScalePreset(
        name="separable-mean",
        phi=lambda x: np.exp(x),
        psi=lambda y: np.ones_like(y),
        sigma=lambda x, y: np.cos(2.0 * np.pi * x),
        limit=(_E - 1.0) / (1.0 + 4.0 * math.pi ** 2),
        exact=True,
        note="sigma independent of y; pairing equals the limit for every eps",
    ),
    # integer number of sin^2 periods: exact resonance at every eps=1/k
    "resonant-sine": TwoScalePreset(
        name="resonant-sine",
        phi=lambda x: np.ones_like(x),
        psi=lambda y: np.sin(2.0 * np.pi * y),
        sigma=lambda x, y: np.sin(2.0 * np.pi * y),
        limit=0.5,
        exact=True,
        note="sin^2 averages to 1/2 exactly over whole periods",
    ),
    # smooth modulation phi=e^x: gap is the Fourier coefficient of phi
    # at frequency 4 pi/eps, decaying at second order
    "modulated-sine": TwoScalePreset(
        name="modulated-sine",
        phi=lambda x: np.exp(x),
        psi=lambda y: np.sin(2.0 * np.pi * y),
        sigma=lambda x, y: np.sin(2.0 * np.pi * y),
        limit=(_E - 1.0) / 2.0,
        exact=False,
        note="error = (e-1)/(2(1+(4 pi k)^2)), second-order decay",
    ),
    # quarter-phase pair sin*cos: limit zero, first-order decay
    "drift-cosine": TwoScalePreset(
        name="drift-cosine",
        phi=lambda x: np.exp(x),
        psi=lambda y: np.sin(2.0 * np.pi * y),
        sigma=lambda x, y: np.cos(2.0 * np.pi * y),
        limit=0.0,
        exact=False,
        note="error = (e-1)(4 pi k)/(2(1+(4 pi k)^2)), first-order decay",
    ),
}


def run_preset(name, eps_list=(0.25, 0.125, 0.0625), nodes_per_cell=12):
    try:
        p = TWO_SCALE_PRESETS[name]
    except KeyError:
        raise ThermoporoError(
            f"unknown preset {name!r}; available: "
            + ", ".join(sorted(TWO_SCALE_PRESETS))
        ) from None
    return two_scale_check(p.phi, p.psi, p.sigma, eps_list, limit=p.limit,
                           nodes_per_cell=nodes_per_cell)


# ---------------------------------------------------------------------------
# fine-scale oracles


@dataclass
class DnsResult:
    eps: float
    observable: np.ndarray
    reference: np.ndarray
    rel_error: float
    fields: dict = field(default_factory=dict)
    solver: object = None

    def __post_init__(self):
        if not (math.isfinite(self.rel_error)
                and np.isfinite(self.observable).all()
                and np.isfinite(self.reference).all()):
            raise ThermoporoError("fine-scale run produced non-finite values")

    def as_text(self):
        obs = " ".join(f"{v:.17g}" for v in self.observable)
        ref = " ".join(f"{v:.17g}" for v in self.reference)
        return (f"eps = {self.eps:.10g}\nobservable = {obs}\n"
                f"reference = {ref}\nrel_error = {self.rel_error:.6e}\n")


def _fine_resolution(geom, eps):
    k = _check_eps(eps)
    n = geom.n[0]
    if any(m != n for m in geom.n):
        raise GeometryError("fine-scale oracles need a cubic voxel cell")
    return k * n


def dns_conduction(geom, kappa0f, kappa0s, eps, drive, tol=1e-10,
                   reference=None, keep_fields=False):
    """Steady conduction on the inflated medium under affine wall data.

    Solves div(K^eps grad theta) = 0 on the unit box with theta = G.x on
    every wall, then volume-averages the flux K^eps grad theta with
    trapezoid face weights and compares to B_theta G.  ``reference``
    overrides the effective flux (otherwise the cell problem runs at the
    geometry's own resolution).  Per-cell resolution is held fixed as
    eps shrinks, so the gap isolates the wall boundary layers.
    """
    G = np.asarray(drive, dtype=float)
    d = geom.dim
    if G.shape != (d,):
        raise ThermoporoError(f"drive must be a {d}-vector")
    N = _fine_resolution(geom, eps)
    chi = inflate(geom, eps, N)
    K = np.where(chi.astype(bool), float(kappa0f), float(kappa0s))
    grid = Grid((N,) * d, periodic=False)
    kf = operators.harmonic_face_coefficients_bounded(K)

    X = [np.broadcast_to(x, grid.shape) for x in grid.cell_center_mesh()]
    bc = []
    for a in range(d):
        idx = [slice(None)] * d
        idx[a] = slice(0, 1)
        lo_idx = tuple(idx)
        idx[a] = slice(grid.shape[a] - 1, grid.shape[a])
        hi_idx = tuple(idx)
        lo = sum(G[j] * (X[j][lo_idx] if j != a else 0.0) for j in range(d))
        hi = sum(G[j] * (X[j][hi_idx] if j != a else 1.0) for j in range(d))
        bc.append((lo + np.zeros_like(X[0][lo_idx]),
                   hi + np.zeros_like(X[0][hi_idx])))

    theta, rep = operators.solve_diffusion_dirichlet(
        kf, np.zeros(grid.shape), grid, bc=bc, tol=tol, label="dns-conduction"
    )
    rep.require()

    inv_h = grid.inv_h
    obs = np.empty(d)
    for a in range(d):
        n = grid.shape[a]
        flux = np.empty_like(kf[a])
        idx = [slice(None)] * d
        idx[a] = slice(1, n)
        up = [slice(None)] * d
        up[a] = slice(1, n)
        lo = [slice(None)] * d
        lo[a] = slice(0, n - 1)
        flux[tuple(idx)] = (theta[tuple(up)] - theta[tuple(lo)]) * inv_h[a]
        idx[a] = slice(0, 1)
        flux[tuple(idx)] = (theta[tuple(idx)] - bc[a][0]) * 2.0 * inv_h[a]
        lastc = [slice(None)] * d
        lastc[a] = slice(n - 1, n)
        idx[a] = slice(n, n + 1)
        flux[tuple(idx)] = (bc[a][1] - theta[tuple(lastc)]) * 2.0 * inv_h[a]
        flux *= kf[a]
        # trapezoid along the face axis: wall faces count half
        total = float(flux.sum())
        total -= 0.5 * float(flux[tuple(idx)].sum())
        idx[a] = slice(0, 1)
        total -= 0.5 * float(flux[tuple(idx)].sum())
        obs[a] = total / grid.ncells

    if reference is None:
        sol = solve_thermal_cell(geom, kappa0f, kappa0s, tol=tol)
        reference = effective_conductivity(sol).btheta @ G
    reference = np.asarray(reference, dtype=float)
    rel = float(np.linalg.norm(obs - reference)
                / max(np.linalg.norm(reference), 1e-300))
    fields = {"theta": theta} if keep_fields else {}
    return DnsResult(eps=float(eps), observable=obs, reference=reference,
                     rel_error=rel, fields=fields, solver=rep)


def dns_stokes(geom, mu1, eps, drive, tol=1e-10, reference=None,
               keep_fields=False):
    """Stokes flow on a periodic eps-tiling with viscosity mu1 eps^2.

    ``drive`` is the imposed negative head gradient (a constant body
    force per unit volume of pore fluid).  With the eps^2 viscosity
    scaling the mean velocity over the box is independent of the tiling
    count, and equals B2(mu1) drive; the run checks that directly.
    """
    g = np.asarray(drive, dtype=float)
    d = geom.dim
    if g.shape != (d,):
        raise ThermoporoError(f"drive must be a {d}-vector")
    perc = percolates(geom, "fluid")
    for a in range(d):
        if g[a] != 0.0 and not perc[a]:
            raise GeometryError(
                f"pore space does not percolate along driven axis {a}"
            )
    N = _fine_resolution(geom, eps)
    chi = inflate(geom, eps, N).astype(bool)
    grid = Grid((N,) * d, periodic=True)
    mu = float(mu1) * float(eps) ** 2

    res = solve_stokes(chi, mu, [float(c) for c in g], grid=grid, tol=tol,
                       label="dns-stokes")
    res.report.require()
    obs = np.array([grid.cell_volume * float(v.sum()) for v in res.velocity])

    if reference is None:
        reference = steady_permeability(geom, mu1, tol=tol).B2 @ g
    reference = np.asarray(reference, dtype=float)
    rel = float(np.linalg.norm(obs - reference)
                / max(np.linalg.norm(reference), 1e-300))
    fields = {"v": res.velocity, "p": res.pressure} if keep_fields else {}
    return DnsResult(eps=float(eps), observable=obs, reference=reference,
                     rel_error=rel, fields=fields, solver=res.report)
