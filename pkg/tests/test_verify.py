"""Two-scale pairing checker and fine-scale cross-check oracles."""

import math

import numpy as np
import pytest

from thermoporo import geometry, verify
from thermoporo.errors import GeometryError, ThermoporoError

E = math.e


def _modulated_error(eps):
    k = 4.0 * math.pi / eps
    return (E - 1.0) / (2.0 * (1.0 + k * k))


def _drift_error(eps):
    k = 4.0 * math.pi / eps
    return (E - 1.0) * k / (2.0 * (1.0 + k * k))


def test_modulated_sine_matches_fourier_coefficient():
    rep = verify.run_preset("modulated-sine", eps_list=(0.25, 0.125, 0.0625))
    for eps, _, err in rep.rows:
        assert err == pytest.approx(_modulated_error(eps), rel=1e-7)
    assert rep.fitted_order == pytest.approx(2.0, abs=0.05)


def test_drift_cosine_matches_fourier_coefficient():
    rep = verify.run_preset("drift-cosine", eps_list=(0.25, 0.125, 0.0625))
    for eps, _, err in rep.rows:
        assert err == pytest.approx(_drift_error(eps), rel=1e-7)
    assert rep.fitted_order == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("name", ["separable-mean", "resonant-sine"])
def test_exact_presets_sit_at_noise_level(name):
    rep = verify.run_preset(name)
    scale = max(abs(rep.limit), 1.0)
    assert max(rep.errors) <= 1e-10 * scale
    assert rep.fitted_order is None


def test_pairing_errors_strictly_decrease():
    rep = verify.run_preset("modulated-sine", eps_list=(0.25, 0.125, 0.0625))
    errs = rep.errors
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_computed_limit_agrees_with_closed_form():
    p = verify.TWO_SCALE_PRESETS["modulated-sine"]
    rep = verify.two_scale_check(p.phi, p.psi, p.sigma, (0.25, 0.125))
    assert rep.limit == pytest.approx((E - 1.0) / 2.0, rel=1e-12)


def test_eps_must_invert_to_integer():
    p = verify.TWO_SCALE_PRESETS["resonant-sine"]
    with pytest.raises(ThermoporoError):
        verify.two_scale_check(p.phi, p.psi, p.sigma, (0.3,), limit=0.5)
    with pytest.raises(ThermoporoError):
        verify.two_scale_check(p.phi, p.psi, p.sigma, (), limit=0.5)


def test_unknown_preset_rejected():
    with pytest.raises(ThermoporoError):
        verify.run_preset("fast-wiggle")


def test_report_invariants():
    with pytest.raises(ThermoporoError):
        verify.TwoScaleReport(rows=[(0.25, 1.0, 0.1), (0.5, 1.0, 0.2)],
                              limit=1.0)
    with pytest.raises(ThermoporoError):
        verify.TwoScaleReport(rows=[(0.25, math.nan, 0.1)], limit=1.0)
    rep = verify.TwoScaleReport(rows=[(0.5, 1.0, 0.2), (0.25, 1.0, 0.1)],
                                limit=1.0, fitted_order=1.0)
    text = rep.as_text()
    assert "fitted_order = 1.0000" in text
    assert rep.errors == [0.2, 0.1]


def test_dns_conduction_homogeneous_is_exact():
    geom = geometry.generate_cube(8, a=0.5, dim=2)
    res = verify.dns_conduction(geom, 2.0, 2.0, eps=0.5,
                                drive=np.array([1.0, 0.0]))
    assert res.rel_error <= 1e-12
    assert np.allclose(res.observable, [2.0, 0.0], atol=1e-12)


def test_dns_conduction_error_shrinks_with_eps():
    geom = geometry.generate_laminate(8, fluid_fraction=0.5, axis=0, dim=2)
    drive = np.array([1.0, 0.0])
    errs = [verify.dns_conduction(geom, 1.0, 4.0, eps, drive).rel_error
            for eps in (0.5, 0.25)]
    assert errs[1] < errs[0]


@pytest.mark.filterwarnings("ignore:pore space does not conduct")
def test_dns_stokes_is_tiling_invariant():
    geom = geometry.generate_channel(8, width=0.5, axis=0, dim=2)
    drive = np.array([1.0, 0.0])
    coarse = verify.dns_stokes(geom, 1.0, eps=1.0, drive=drive, tol=1e-11)
    fine = verify.dns_stokes(geom, 1.0, eps=0.5, drive=drive, tol=1e-11)
    gap = np.linalg.norm(fine.observable - coarse.observable)
    assert gap <= 1e-9 * np.linalg.norm(coarse.observable)
    assert coarse.rel_error <= 1e-8


@pytest.mark.filterwarnings("ignore:pore space does not conduct")
def test_dns_stokes_linear_in_viscosity():
    geom = geometry.generate_channel(8, width=0.5, axis=0, dim=2)
    drive = np.array([1.0, 0.0])
    r1 = verify.dns_stokes(geom, 1.0, eps=1.0, drive=drive, tol=1e-11)
    r5 = verify.dns_stokes(geom, 5.0, eps=1.0, drive=drive, tol=1e-11)
    assert np.allclose(5.0 * r5.observable, r1.observable, rtol=1e-10)


def test_dns_stokes_rejects_blocked_drive():
    geom = geometry.generate_channel(8, width=0.5, axis=0, dim=2)
    with pytest.raises(GeometryError):
        verify.dns_stokes(geom, 1.0, eps=1.0, drive=np.array([0.0, 1.0]))


def test_dns_result_rejects_nonfinite():
    with pytest.raises(ThermoporoError):
        verify.DnsResult(eps=0.5, observable=np.array([math.inf]),
                         reference=np.array([1.0]), rel_error=0.1)
