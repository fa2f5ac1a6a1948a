"""File formats: effective-medium text files, VTK field dumps, CSV logs.

The medium file is diff-able structured text with explicit keys and a
format tag, so two runs can be compared with standard tools.  Floats
are written with repr-exact precision; rerunning the same inputs yields
byte-identical files (no timestamps, fixed key order).
"""

import csv

import numpy as np

from . import __version__
from .errors import IncompatibleDataError
from .cell_flow import InertialTensor, PermeabilityKernel, SteadyPermeability
from .params import LimitParameters, Regime

MEDIUM_FORMAT = "thermoporo-medium-1"

_PARAM_FIELDS = ("mu1", "tau0", "pstar", "nu0", "beta0f", "beta0s",
                 "kappa0f", "kappa0s", "rho_f", "rho_s", "c_pf", "c_ps")


def _fmt(x):
    return f"{float(x):.17g}"


def _fmt_row(row):
    return " ".join(_fmt(v) for v in np.asarray(row).ravel())


def _matrix_lines(name, M):
    return [f"{name}.row{i} = {_fmt_row(M[i])}" for i in range(M.shape[0])]


def write_medium(medium, path):
    """Serialize an EffectiveMedium; the kernel block holds one row per
    sample time with the dim^2 entries of B1 and of the step response."""
    d = medium.dim
    lines = [
        f"format = {MEDIUM_FORMAT}",
        f"version = {__version__}",
        f"regime = {medium.regime.value}",
        f"dim = {d}",
        f"m = {_fmt(medium.m)}",
        f"cp_hat = {_fmt(medium.c_p_hat)}",
    ]
    lines += _matrix_lines("Btheta", medium.btheta)
    for name in _PARAM_FIELDS:
        lines.append(f"params.{name} = {_fmt(getattr(medium.params, name))}")
    for key in sorted(medium.provenance):
        lines.append(f"provenance.{key} = {medium.provenance[key]}")

    pay = medium.payload
    table = None
    if medium.regime is Regime.STEADY_DARCY:
        lines.append(f"B2.mu1 = {_fmt(pay.mu1)}")
        lines.append(f"B2.asymmetry = {_fmt(pay.asymmetry)}")
        flagged = [str(a) for a, bad in enumerate(pay.degenerate_axes) if bad]
        lines.append(f"B2.degenerate_axes = {','.join(flagged) or 'none'}")
        lines += _matrix_lines("B2", pay.B2)
    elif medium.regime is Regime.MEMORY_DARCY:
        lines.append(f"kernel.mu1 = {_fmt(pay.mu1)}")
        lines.append(f"kernel.tau0 = {_fmt(pay.tau0)}")
        lines.append(f"kernel.rho_f = {_fmt(pay.rho_f)}")
        lines.append(f"kernel.tail = {_fmt(pay.tail)}")
        lines.append(f"kernel.samples = {len(pay.times)}")
        table = ["[kernel]",
                 "# t  B1 (row-major)  A (row-major)"]
        for k in range(len(pay.times)):
            table.append(f"{_fmt(pay.times[k])}  {_fmt_row(pay.b1[k])}  "
                         f"{_fmt_row(pay.a[k])}")
    else:
        lines.append(f"B3.porosity = {_fmt(pay.porosity)}")
        lines.append(f"B3.asymmetry = {_fmt(pay.asymmetry)}")
        lines += _matrix_lines("B3", pay.B3)
        lines += _matrix_lines("M", pay.M)

    text = "\n".join(lines) + "\n"
    if table is not None:
        text += "\n".join(table) + "\n"
    with open(path, "w") as f:
        f.write(text)


def _parse_matrix(kv, name, d, path):
    M = np.empty((d, d))
    for i in range(d):
        key = f"{name}.row{i}"
        if key not in kv:
            raise IncompatibleDataError(f"{path}: missing {key}")
        row = [float(t) for t in kv[key].split()]
        if len(row) != d:
            raise IncompatibleDataError(
                f"{path}: {key} has {len(row)} entries, expected {d}"
            )
        M[i] = row
    return M


def read_medium(path):
    """Load a medium file back into an EffectiveMedium."""
    from .macro import EffectiveMedium

    kv = {}
    table_rows = []
    in_table = False
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "[kernel]":
                in_table = True
                continue
            if in_table:
                table_rows.append([float(t) for t in line.split()])
                continue
            if "=" not in line:
                raise IncompatibleDataError(
                    f"{path}: malformed line {line!r}"
                )
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()

    if kv.get("format") != MEDIUM_FORMAT:
        raise IncompatibleDataError(
            f"{path}: not a {MEDIUM_FORMAT} file (format tag "
            f"{kv.get('format')!r})"
        )
    regime = Regime(kv["regime"])
    d = int(kv["dim"])
    btheta = _parse_matrix(kv, "Btheta", d, path)
    params = LimitParameters(**{
        name: float(kv[f"params.{name}"]) for name in _PARAM_FIELDS
    })
    provenance = {
        key[len("provenance."):]: val
        for key, val in kv.items() if key.startswith("provenance.")
    }

    if regime is Regime.STEADY_DARCY:
        axes = kv.get("B2.degenerate_axes", "none")
        flagged = set() if axes == "none" else {int(a) for a in axes.split(",")}
        degenerate = tuple(a in flagged for a in range(d))
        payload = SteadyPermeability(
            B2=_parse_matrix(kv, "B2", d, path),
            mu1=float(kv["B2.mu1"]),
            asymmetry=float(kv["B2.asymmetry"]),
            degenerate_axes=degenerate,
        )
    elif regime is Regime.MEMORY_DARCY:
        nsamp = int(kv["kernel.samples"])
        if len(table_rows) != nsamp:
            raise IncompatibleDataError(
                f"{path}: kernel table has {len(table_rows)} rows, "
                f"header says {nsamp}"
            )
        width = 1 + 2 * d * d
        if any(len(r) != width for r in table_rows):
            raise IncompatibleDataError(
                f"{path}: kernel rows must have {width} columns"
            )
        arr = np.asarray(table_rows)
        payload = PermeabilityKernel(
            times=arr[:, 0].copy(),
            b1=arr[:, 1:1 + d * d].reshape(nsamp, d, d).copy(),
            a=arr[:, 1 + d * d:].reshape(nsamp, d, d).copy(),
            mu1=float(kv["kernel.mu1"]),
            tau0=float(kv["kernel.tau0"]),
            rho_f=float(kv["kernel.rho_f"]),
            tail=float(kv["kernel.tail"]),
        )
    else:
        payload = InertialTensor(
            B3=_parse_matrix(kv, "B3", d, path),
            M=_parse_matrix(kv, "M", d, path),
            porosity=float(kv["B3.porosity"]),
            asymmetry=float(kv["B3.asymmetry"]),
        )

    return EffectiveMedium(
        m=float(kv["m"]),
        c_p_hat=float(kv["cp_hat"]),
        btheta=btheta,
        regime=regime,
        payload=payload,
        params=params,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# VTK legacy ASCII output (structured points, cell data)


def write_vtk_cells(path, grid, scalars=None, vectors=None,
                    title="thermoporo fields"):
    """Write cell-centered fields in the legacy ASCII VTK layout.

    ``scalars`` maps names to cell arrays; ``vectors`` maps names to
    staggered face lists, averaged onto cells here.  2D grids get a
    unit-thickness third dimension.
    """
    from .pde import operators

    d = grid.dim
    shape = list(grid.shape) + [1] * (3 - d)
    h = list(grid.h) + [1.0] * (3 - d)
    ncells = int(np.prod(shape))

    def cell_values(arr):
        return np.asarray(arr).reshape(grid.shape).flatten(order="F")

    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {shape[0] + 1} {shape[1] + 1} {shape[2] + 1}",
        "ORIGIN 0 0 0",
        f"SPACING {_fmt(h[0])} {_fmt(h[1])} {_fmt(h[2])}",
        f"CELL_DATA {ncells}",
    ]
    for name in sorted(scalars or {}):
        out.append(f"SCALARS {name} double 1")
        out.append("LOOKUP_TABLE default")
        out.extend(_fmt(v) for v in cell_values(scalars[name]))
    for name in sorted(vectors or {}):
        comps = [cell_values(c) for c in operators.faces_to_cells(vectors[name])]
        comps += [np.zeros(ncells)] * (3 - d)
        out.append(f"VECTORS {name} double")
        out.extend(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}"
                   for x, y, z in zip(*comps))
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")


def write_diagnostics_csv(path, diagnostics):
    """One row per time step: mass residual, energy, iteration counts."""
    cols = ["step", "t", "mass_residual", "energy", "picard_iterations",
            "pressure_iterations", "heat_iterations"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for row in diagnostics:
            w.writerow([row["step"], _fmt(row["t"]),
                        _fmt(row["mass_residual"]), _fmt(row["energy"]),
                        row["picard_iterations"], row["pressure_iterations"],
                        row["heat_iterations"]])
