"""Preconditioned conjugate gradients on ndarray-shaped unknowns.

The solvers in this package all lead to symmetric positive
(semi-)definite systems.  Semi-definite ones (periodic diffusion,
pressure Schur complements) carry a known constant-like null space; the
caller passes ``project`` to remove it and CG then runs in the
orthogonal complement.  Keeping the loop here rather than using a
generic sparse solver keeps the gauge handling and the iteration count
fully deterministic.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError


@dataclass
class SolverReport:
    iterations: int
    residual: float
    tolerance: float
    converged: bool
    label: str = ""

    def require(self):
        """Raise if the solve did not converge; returns self otherwise."""
        if not self.converged:
            raise ConvergenceError(
                f"{self.label or 'solver'} stalled at residual {self.residual:.3e} "
                f"(target {self.tolerance:.3e}) after {self.iterations} iterations",
                report=self,
            )
        return self


def _dot(a, b):
    return float(np.vdot(a, b).real)


def pcg(apply_op, b, x0=None, rtol=1e-9, atol=0.0, maxiter=None,
        precond=None, project=None, label=""):
    """Solve ``apply_op(x) = b`` with CG.

    ``apply_op(x) -> ndarray`` must be symmetric positive definite on the
    subspace left invariant by ``project`` (identity if ``project`` is
    None).  ``precond(r) -> ndarray`` applies an SPD preconditioner.
    ``project(x) -> ndarray`` removes the null-space component; it is
    applied to the initial guess, the right-hand side and each search
    update so rounding cannot reintroduce drift.

    Returns ``(x, SolverReport)``.  The residual target is
    ``max(rtol * ||b||, atol)`` in the Euclidean norm.
    """
    b = np.asarray(b, dtype=float)
    if project is not None:
        b = project(b)
    bnorm = float(np.linalg.norm(b))
    target = max(rtol * bnorm, atol)

    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=float, copy=True)
        if project is not None:
            x = project(x)
        r = b - apply_op(x)
        if project is not None:
            r = project(r)

    rnorm = float(np.linalg.norm(r))
    if bnorm == 0.0 and x0 is None:
        # homogeneous data: the exact answer is zero, skip the loop
        return x, SolverReport(0, 0.0, target, True, label)
    if rnorm <= target:
        return x, SolverReport(0, rnorm, target, True, label)

    if maxiter is None:
        maxiter = max(200, 20 * int(np.sqrt(b.size)) + b.size // 4)

    z = precond(r) if precond is not None else r.copy()
    p = z.copy()
    rz = _dot(r, z)
    for k in range(1, maxiter + 1):
        q = apply_op(p)
        if project is not None:
            q = project(q)
        pq = _dot(p, q)
        if pq <= 0.0:
            # loss of positivity: stop and report the best iterate
            return x, SolverReport(k, rnorm, target, rnorm <= target, label)
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target:
            if project is not None:
                x = project(x)
            return x, SolverReport(k, rnorm, target, True, label)
        z = precond(r) if precond is not None else r
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p

    if project is not None:
        x = project(x)
    return x, SolverReport(maxiter, rnorm, target, False, label)


def jacobi_preconditioner(diagonal, floor=0.0):
    """Pointwise inverse-diagonal preconditioner.

    Entries with magnitude at or below ``floor`` are treated as identity
    rows (useful when masked-out cells carry zero rows).
    """
    diagonal = np.asarray(diagonal, dtype=float)
    inv = np.ones_like(diagonal)
    keep = np.abs(diagonal) > floor
    inv[keep] = 1.0 / diagonal[keep]

    def apply(r):
        return inv * r

    return apply


def mean_zero_projector(weight=None):
    """Projector removing the (weighted) mean component of a field.

    With ``weight`` a 0/1 mask the projector removes the mean over the
    masked cells and zeroes the rest, which is the right gauge for
    fields only defined on a subdomain.
    """
    if weight is None:
        def project(x):
            return x - x.mean()
        return project

    weight = np.asarray(weight, dtype=float)
    total = float(weight.sum())
    if total <= 0:
        raise ValueError("projector weight mask is empty")

    def project(x):
        m = float((x * weight).sum()) / total
        return (x - m) * weight

    return project
