import math

import numpy as np
import pytest

from relu_landscape.errors import StructureError
from relu_landscape.families import FamilyId, catalog
from relu_landscape.fps import (
    TYPE2_ALPHA0_CLOSED_FORM,
    TYPE2_KD1_SLOTS,
    FPSExpansion,
    decay_exponent,
    detect_base,
    direct_coeffs,
    evaluate_fps,
    fit_coeffs_from_path,
    leading_free_slots,
    order_residual_decay,
    reference_expansion,
    seed_expansion,
    solve_theta,
    theta_polynomial,
    type1_kd1_closed_forms,
    type1_kd1_order_residuals,
    type2_kd1_residuals,
    type2_kd2_system,
)
from relu_landscape.solver import continue_family
from relu_landscape.symmetry import field_at

from conftest import solved


def test_theta_root_and_fallback():
    t, method = solve_theta()
    assert method == "newton"
    assert abs(theta_polynomial(t)) < 1e-14
    t2, method2 = solve_theta(t0=1.5)
    assert t2 == pytest.approx(t, abs=1e-13)


def test_type2_kd1_coefficients_solve_their_system():
    dc = direct_coeffs(FamilyId("II", 1, 1))
    assert dc.slots == TYPE2_KD1_SLOTS
    assert np.abs(type2_kd1_residuals(dc.values, dc.info["theta"])).max() < 1e-13
    assert dc.info["angle_from_coeffs"] == pytest.approx(dc.info["theta"], abs=1e-13)


def test_type2_kd2_system_residual():
    dc = direct_coeffs(FamilyId("II", 1, 2))
    assert np.abs(type2_kd2_system(dc.values)).max() < 1e-13
    assert dc.values[0] == pytest.approx(-0.5748287640041449, abs=1e-12)


def test_type1_closed_forms():
    forms = type1_kd1_closed_forms()
    assert forms[(3, 3)] == pytest.approx(math.sqrt(math.pi - 2) / 2)
    assert np.abs(type1_kd1_order_residuals()).max() < 1e-14
    assert np.abs(type1_kd1_order_residuals(x_coeff=0.6)).max() > 1e-3


def test_no_direct_system_for_other_families():
    with pytest.raises(StructureError):
        direct_coeffs(FamilyId("II", 1, 0))


@pytest.mark.parametrize("fam", catalog(), ids=lambda f: f.label)
def test_reference_expansion_matches_solver(fam):
    exp = reference_expansion(fam, J=12)
    d = 1e4
    assert np.abs(exp.evaluate(d) - solved(fam.label, d).xi).max() < 1e-8
    assert np.allclose(evaluate_fps(exp, d), exp.evaluate(d))


@pytest.mark.parametrize("label", ["II_p1_m1", "II_p1_m2", "I_p1_m1"])
def test_direct_coefficients_agree_with_extraction(label):
    fam = FamilyId.parse(label)
    dc = direct_coeffs(fam)
    ref = reference_expansion(fam, J=8)
    for (i, j), v in dc.as_dict().items():
        assert ref.coeffs[i, j] == pytest.approx(v, abs=1e-12)
    assert set(leading_free_slots(ref)) <= set(dc.slots) | set(leading_free_slots(dc.expansion()))


def test_seed_is_close_at_large_d():
    for fam in catalog():
        seed = seed_expansion(fam).evaluate(1e6)
        assert np.abs(seed - solved(fam.label, 1e6).xi).max() < 0.05


def test_truncated_series_residual_decays():
    exp = reference_expansion(FamilyId("II", 1, 1), J=6)
    ds = np.geomspace(1e3, 1e6, 6)
    norms, rate = order_residual_decay(exp, ds)
    # truncation after order 6 in d^(-1/2) leaves O(d^(1 - 7/2)) in the field
    assert rate > 2.0
    assert norms[-1] < norms[0]


def test_decay_exponent_of_power_law():
    ds = np.geomspace(10, 1e4, 10)
    assert decay_exponent(ds, 3 * ds**-1.5) == pytest.approx(1.5)


def test_path_fits_recover_leading_terms():
    fam = FamilyId("II", 1, 1)
    path = continue_family(fam, 1e6, 1e2, samples_per_decade=10)
    fit = fit_coeffs_from_path(path, J=6)
    ref = reference_expansion(fam, J=6)
    assert np.abs(fit.coeffs - ref.coeffs).max() < 1e-6
    with pytest.warns(RuntimeWarning):
        poly = fit_coeffs_from_path(path, J=20, method="polynomial")
    assert poly.info["J"] < 20
    assert np.abs(poly.coeffs[:, :2] - ref.coeffs[:, :2]).max() < 1e-3
    kappa, rms = detect_base(path)
    assert kappa == 2 and rms[2] < rms[4]


def test_detect_base_finds_quarter_powers():
    path = continue_family(FamilyId("I", 1, 1), 1e6, 1e2, samples_per_decade=10)
    assert detect_base(path)[0] == 4


def test_path_fit_needs_two_decades():
    path = continue_family(FamilyId("II", 1, 0), 1e3, 2e2, samples_per_decade=10)
    with pytest.raises(ValueError):
        fit_coeffs_from_path(path)


def test_expansion_validation_and_json():
    fam = FamilyId("II", 1, 0)
    with pytest.raises(ValueError):
        FPSExpansion(fam, 3, np.zeros((fam.N, 2)))
    with pytest.raises(ValueError):
        FPSExpansion(fam, 2, np.zeros((fam.N + 1, 2)))
    exp = seed_expansion(fam)
    js = exp.to_json()
    assert len(js["coefficients"]) == fam.N * (exp.J + 1)
    assert exp.coefficient(0, 99) == 0.0
    with pytest.raises(ValueError):
        exp.evaluate(0)


def test_closed_form_loss_constant_for_k_equal_d():
    # the type II k = d family has d L -> 1/2 - 2/pi^2
    pt = solved("II_p1_m0", 1e6)
    from relu_landscape.symmetry import reduced_loss

    dl = 1e6 * reduced_loss(pt.xi, 1e6, 1, 0)
    assert dl == pytest.approx(TYPE2_ALPHA0_CLOSED_FORM, abs=1e-3)
    assert np.abs(field_at(pt.xi, 1e6, 1, 0)).max() < 1e-8
