"""Permeability operators: steady tensor, memory kernel, inertial mobility."""

import numpy as np
import pytest

from thermoporo import geometry
from thermoporo.cell_flow import (
    inertial_tensor,
    kernel_permeability,
    steady_permeability,
)
from thermoporo.errors import GeometryError


def _channel(n, width=0.5, dim=2):
    return geometry.generate_channel(n, width=width, axis=0, dim=dim)


def test_poiseuille_channel_closed_form():
    # k open rows between no-slip walls carry mean velocity
    # h^3 k(k+1)(k+2) / (12 mu); the cross axis is blocked
    n, mu = 16, 2.0
    for width in (0.25, 0.5):
        geom = _channel(n, width)
        k = int(round(width * n))
        with pytest.warns(UserWarning, match="does not conduct"):
            perm = steady_permeability(geom, mu, tol=1e-12)
        h = 1.0 / n
        exact = h ** 3 * k * (k + 1) * (k + 2) / (12.0 * mu)
        assert perm.B2[0, 0] == pytest.approx(exact, rel=1e-11)
        assert perm.degenerate_axes == (False, True)
        assert abs(perm.B2[1, 1]) <= 1e-10 * perm.B2[0, 0]


def test_steady_tensor_scales_inversely_with_viscosity():
    # the cell problem is solved at unit viscosity and rescaled, so the
    # quarter relation holds to the last bit
    geom = geometry.generate_cube(12, a=0.5, dim=2)
    p1 = steady_permeability(geom, 1.0, tol=1e-11)
    p4 = steady_permeability(geom, 4.0, tol=1e-11)
    assert np.array_equal(p1.B2, 4.0 * p4.B2)
    assert p4.degenerate_axes == (False, False)


def test_kernel_trapezoid_telescopes_to_step_response():
    # B1 is sampled so that its running trapezoid rule reproduces A exactly
    geom = _channel(8)
    ker = kernel_permeability(geom, 1.0, 0.5, 1.0, dt=0.02, t_kernel=0.4,
                              tol=1e-11)
    dt = ker.dt
    integral = dt * (0.5 * ker.b1[0] + ker.b1[1:-1].sum(axis=0) + 0.5 * ker.b1[-1])
    gap = np.linalg.norm(integral - (ker.a[-1] - ker.a[0]))
    assert gap <= 1e-13 * max(np.linalg.norm(ker.a[-1]), 1e-300)


def test_step_response_saturates_to_steady_tensor():
    geom = _channel(8)
    with pytest.warns(UserWarning, match="does not conduct"):
        steady = steady_permeability(geom, 1.0, tol=1e-11)
    ker = kernel_permeability(geom, 1.0, 0.5, 1.0, tol=1e-11)
    gap = np.linalg.norm(ker.a[-1] - steady.B2) / np.linalg.norm(steady.B2)
    assert gap <= 1e-3
    assert ker.tail <= 1e-4


def test_step_response_is_monotone():
    geom = _channel(8)
    ker = kernel_permeability(geom, 1.0, 0.5, 1.0, dt=0.02, t_kernel=0.4,
                              tol=1e-11)
    along = ker.a[:, 0, 0]
    assert np.all(np.diff(along) >= -1e-14 * along[-1])
    assert np.abs(ker.a[:, 1, 1]).max() <= 1e-10 * along[-1]


def test_kernel_interpolation_edges():
    geom = _channel(8)
    ker = kernel_permeability(geom, 1.0, 0.5, 1.0, dt=0.05, t_kernel=0.2,
                              tol=1e-10, tail_tol=1.0)
    assert np.array_equal(ker.b1_at(-1.0), ker.b1[0])
    assert np.array_equal(ker.b1_at(0.0), ker.b1[0])
    mid = 0.5 * (ker.b1[0] + ker.b1[1])
    assert np.allclose(ker.b1_at(0.5 * ker.dt), mid, rtol=0, atol=1e-15)
    assert np.all(ker.b1_at(ker.horizon + 1.0) == 0.0)
    assert np.array_equal(ker.a_at(ker.horizon + 1.0), ker.a[-1])
    assert np.array_equal(ker.a_at(0.0), ker.a[0])


def test_channel_inertial_mobility_is_plug_flow():
    # nothing obstructs the flow axis, so the mobility there is the porosity;
    # the wall-normal axis is sealed
    geom = _channel(16)
    inert = inertial_tensor(geom, tol=1e-11)
    m = geom.porosity
    assert abs(inert.M[0, 0] - m) <= 1e-6 * m
    assert abs(inert.M[1, 1]) <= 1e-8
    assert abs(inert.B3[0, 0]) <= 1e-6 * m
    assert abs(inert.B3[1, 1] - m) <= 1e-8


def test_inertial_mobility_bounded_by_porosity():
    geom = geometry.generate_random_connected(10, dim=3, solid_fraction=0.25,
                                              seed=5)
    inert = inertial_tensor(geom, tol=1e-10)
    ev = np.linalg.eigvalsh(inert.M)
    assert ev.min() > 0.0
    assert ev.max() <= inert.porosity + 1e-9
    assert np.linalg.norm(inert.M - inert.M.T) <= 1e-10 * np.linalg.norm(inert.M)


def test_rejects_bad_parameters():
    geom = _channel(8)
    with pytest.raises(ValueError):
        steady_permeability(geom, 0.0)
    with pytest.raises(ValueError):
        kernel_permeability(geom, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        kernel_permeability(geom, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        kernel_permeability(geom, 1.0, 1.0, 0.0)


def test_trapped_pore_space_cannot_be_scaled():
    # an isolated fluid bubble carries no net flow; the automatic kernel
    # scaling has nothing to measure
    chi = np.zeros((8, 8), dtype=np.uint8)
    chi[3:5, 3:5] = 1
    geom = geometry.UnitCellGeometry(chi=chi)
    with pytest.raises(GeometryError):
        kernel_permeability(geom, 1.0, 1.0, 1.0)


def test_kernel_warns_when_horizon_too_short():
    geom = _channel(8)
    with pytest.warns(UserWarning, match="horizon too short"):
        kernel_permeability(geom, 1.0, 1.0, 1.0, dt=0.05, t_kernel=0.1,
                            tol=1e-10)
