"""Medium files, snapshot output, diagnostics tables."""

import numpy as np
import pytest

from thermoporo import geometry, io, macro
from thermoporo.errors import IncompatibleDataError
from thermoporo.params import LimitParameters, Regime
from thermoporo.pde.grid import Grid


@pytest.fixture(scope="module")
def cell():
    return geometry.generate_cube(8, a=0.5, dim=2)


def _medium(cell, **kw):
    params = LimitParameters(**kw)
    tols = {"tol": 1e-10}
    if params.tau0 > 0 and params.mu1 > 0:
        tols.update(dt_kernel=0.02, t_kernel=0.4)
    return macro.assemble(cell, params, **tols)


def _roundtrip(med, tmp_path):
    path = tmp_path / "m.medium"
    io.write_medium(med, path)
    return io.read_medium(path), path


def test_steady_medium_roundtrip(cell, tmp_path):
    med = _medium(cell)
    back, path = _roundtrip(med, tmp_path)
    assert back.regime is Regime.STEADY_DARCY
    assert np.array_equal(back.btheta, med.btheta)
    assert np.array_equal(back.payload.B2, med.payload.B2)
    assert back.payload.degenerate_axes == med.payload.degenerate_axes
    assert back.m == med.m and back.c_p_hat == med.c_p_hat
    assert back.params == med.params
    # provenance is a free-form string map after a roundtrip
    assert back.provenance == {k: str(v) for k, v in med.provenance.items()}


def test_memory_medium_roundtrip(cell, tmp_path):
    med = _medium(cell, tau0=0.5)
    back, _ = _roundtrip(med, tmp_path)
    assert back.regime is Regime.MEMORY_DARCY
    ker, ref = back.payload, med.payload
    assert np.array_equal(ker.times, ref.times)
    assert np.array_equal(ker.b1, ref.b1)
    assert np.array_equal(ker.a, ref.a)
    assert (ker.mu1, ker.tau0, ker.rho_f, ker.tail) == \
        (ref.mu1, ref.tau0, ref.rho_f, ref.tail)


def test_inviscid_medium_roundtrip(cell, tmp_path):
    med = _medium(cell, mu1=0.0, tau0=1.0)
    back, _ = _roundtrip(med, tmp_path)
    assert back.regime is Regime.INVISCID_DARCY
    assert np.array_equal(back.payload.B3, med.payload.B3)
    assert np.array_equal(back.payload.M, med.payload.M)
    assert back.payload.porosity == med.payload.porosity


def test_rewrite_is_byte_identical(cell, tmp_path):
    med = _medium(cell, tau0=0.5)
    back, path = _roundtrip(med, tmp_path)
    path2 = tmp_path / "again.medium"
    io.write_medium(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_malformed_medium_files_rejected(cell, tmp_path):
    med = _medium(cell)
    _, path = _roundtrip(med, tmp_path)
    text = path.read_text()

    bad = tmp_path / "bad.medium"
    bad.write_text(text.replace(io.MEDIUM_FORMAT, "something-else-9"))
    with pytest.raises(IncompatibleDataError):
        io.read_medium(bad)

    bad.write_text("\n".join(l for l in text.splitlines()
                             if not l.startswith("Btheta.row1")) + "\n")
    with pytest.raises(IncompatibleDataError):
        io.read_medium(bad)

    # unknown keys under a matching format tag are ignored, so files
    # written by a slightly newer minor version still load
    bad.write_text(text + "mystery_key = 1\n")
    tolerant = io.read_medium(bad)
    assert np.array_equal(tolerant.btheta, med.btheta)


def test_truncated_kernel_table_rejected(cell, tmp_path):
    med = _medium(cell, tau0=0.5)
    _, path = _roundtrip(med, tmp_path)
    lines = path.read_text().splitlines()
    bad = tmp_path / "short.medium"
    bad.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(IncompatibleDataError):
        io.read_medium(bad)


def test_vtk_snapshot_structure(tmp_path):
    grid = Grid((4, 3), periodic=False)
    p = np.arange(12, dtype=float).reshape(4, 3)
    v = grid.zeros_faces()
    v[0][:] = 1.0
    path = tmp_path / "snap.vtk"
    io.write_vtk_cells(path, grid, scalars={"p": p}, vectors={"v": v},
                       title="snapshot")
    text = path.read_text()
    assert text.startswith("# vtk DataFile Version 3.0")
    assert "DATASET STRUCTURED_POINTS" in text
    # 2D cells become a unit-thickness slab: one cell layer needs 2 point planes
    assert "DIMENSIONS 5 4 2" in text
    assert "CELL_DATA 12" in text
    assert "SCALARS p double 1" in text
    assert "VECTORS v double" in text
    # x varies fastest: first two scalar entries walk axis 0
    data = text.split("LOOKUP_TABLE default\n")[1].split()
    assert float(data[0]) == 0.0 and float(data[1]) == 3.0


def test_diagnostics_csv_columns(tmp_path):
    rows = [{"step": 1, "t": 0.1, "mass_residual": 1e-12, "energy": 0.5,
             "picard_iterations": 2, "pressure_iterations": 10,
             "heat_iterations": 4}]
    path = tmp_path / "diag.csv"
    io.write_diagnostics_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == ("step,t,mass_residual,energy,"
                        "picard_iterations,pressure_iterations,heat_iterations")
    fields = lines[1].split(",")
    assert fields[0] == "1"
    assert float(fields[1]) == 0.1
    assert float(fields[2]) == 1e-12
    assert fields[4:] == ["2", "10", "4"]
