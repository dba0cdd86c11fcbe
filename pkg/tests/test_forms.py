"""One-forms: basis handling, reductions, and residues."""

import math

import numpy as np
import pytest

from bolzaspec.curve import CurvePoint, ramification_points
from bolzaspec.forms import (
    BASIS2ND,
    HBASIS_SLOTS,
    MonomialForm,
    OneForm,
    PoleEvaluationError,
    SecondKindForm,
    UnsupportedFormError,
    ZShiftedForm,
    eval_form,
    multiply_reduce,
    reduce_to_second_kind,
    relation_table,
    residue_at,
)
from bolzaspec.params import ThetaParam

THETA = ThetaParam(0.7)


def test_basis_shapes_and_validation():
    with pytest.raises(ValueError):
        OneForm(np.zeros(5), THETA)
    with pytest.raises(ValueError):
        SecondKindForm(np.zeros(6), THETA)
    form = OneForm(np.arange(9, dtype=float), THETA)
    with pytest.raises(UnsupportedFormError):
        _ = form.hbasis_coeffs


def test_from_hbasis_round_trip():
    alphas = np.array([1.0, -2.0, 3.0, 0.5, 0.0, 2.0])
    form = OneForm.from_hbasis(alphas, THETA)
    assert np.allclose(form.hbasis_coeffs, alphas)
    # only the six residue-free slots are populated
    other = [i for i in range(9) if i not in HBASIS_SLOTS]
    assert np.all(form.coeffs[other] == 0)


def test_density_matches_monomials():
    z, w = 0.4 + 0.3j, 1.1 - 0.2j
    alphas = np.array([2.0, 0, 0, 0, 1.0, 0])  # 2 dz/w + z^3 dz/w^3
    form = OneForm.from_hbasis(alphas, THETA)
    assert form.density(z, w) == pytest.approx(2.0 / w + z**3 / w**3)
    with pytest.raises(PoleEvaluationError):
        form.density(z, 0.0)


def test_eval_form_on_curve_point():
    from bolzaspec.curve import base_point

    p = base_point(THETA)
    form = OneForm.from_hbasis(np.eye(6)[0], THETA)
    assert eval_form(form, p) == pytest.approx(1.0 / p.w)


def test_reduce_unit_vectors_match_relation_table():
    """The hard-coded reduction map must agree with the listed relations."""
    relations = {
        (lhs.a, lhs.b): rhs.coeffs for lhs, rhs in relation_table(THETA)
    }
    # identity on forms already in the second-kind basis
    for slot, (a, b) in [(0, (0, 1)), (4, (3, 3)), (5, (4, 3))]:
        red = reduce_to_second_kind(OneForm.from_hbasis(np.eye(6)[slot], THETA))
        expect = np.zeros(4, dtype=complex)
        expect[BASIS2ND.index((a, b))] = 1.0
        assert np.allclose(red.coeffs, expect, atol=1e-15)
    # the three genuinely reduced sub-basis elements
    for slot, key in [(1, (0, 3)), (2, (1, 3)), (3, (2, 3))]:
        red = reduce_to_second_kind(OneForm.from_hbasis(np.eye(6)[slot], THETA))
        assert np.allclose(red.coeffs, relations[key], atol=1e-15)


def test_multiply_reduce_unit_vectors_match_relation_table():
    relations = {
        (lhs.a, lhs.b): rhs.coeffs for lhs, rhs in relation_table(THETA)
    }
    # z * (sub-basis element): either lands in the basis or a relation applies
    basis_p1 = {0: 1, 3: 2, 4: 3}  # z dz/w, z^3/w^3, z^4/w^3
    relation_p1 = {1: (1, 3), 2: (2, 3), 5: (5, 3)}
    for slot, idx in basis_p1.items():
        got = multiply_reduce(OneForm.from_hbasis(np.eye(6)[slot], THETA), 1)
        expect = np.zeros(4, dtype=complex)
        expect[idx] = 1.0
        assert np.allclose(got.coeffs, expect, atol=1e-15), slot
    for slot, key in relation_p1.items():
        got = multiply_reduce(OneForm.from_hbasis(np.eye(6)[slot], THETA), 1)
        assert np.allclose(got.coeffs, relations[key], atol=1e-15), slot
    # z^2 * (dz/w, z^3/w^3, z^4/w^3) hit relations (2,1), (5,3), (6,3)
    for slot, key in [(0, (2, 1)), (4, (5, 3)), (5, (6, 3))]:
        got = multiply_reduce(OneForm.from_hbasis(np.eye(6)[slot], THETA), 2)
        assert np.allclose(got.coeffs, relations[key], atol=1e-15), slot


def test_reduce_linearity_random_vectors():
    rng = np.random.default_rng(3)
    e = np.eye(6)
    for _ in range(5):
        alphas = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        whole = reduce_to_second_kind(OneForm.from_hbasis(alphas, THETA)).coeffs
        parts = sum(
            alphas[i]
            * reduce_to_second_kind(OneForm.from_hbasis(e[i], THETA)).coeffs
            for i in range(6)
        )
        assert np.allclose(whole, parts, atol=1e-13)


def test_zshifted_density():
    form = OneForm.from_hbasis(np.eye(6)[0], THETA)
    z, w = 0.5 + 0.1j, 0.9 + 0.4j
    assert ZShiftedForm(form, 2).density(z, w) == pytest.approx(z**2 / w)
    assert MonomialForm(2, 1).density(z, w) == pytest.approx(z**2 / w)


def test_residue_of_dz_over_w_squared():
    """dz/w^2 = dz/rhs(z) has residue 2/rhs'(z_j) at each finite branch point."""
    coeffs = np.zeros(9)
    coeffs[1] = 1.0  # slot (0, 2)
    form = OneForm(coeffs, THETA)
    c = THETA.cos2t
    for p in ramification_points(THETA):
        if p.at_infinity or p.z == 0:
            continue
        z = p.z
        rhs_prime = 5.0 * z**4 + 6.0 * c * z**2 + 1.0
        assert residue_at(form, p) == pytest.approx(
            2.0 / rhs_prime, abs=1e-9
        )


def test_residue_theorem_sum_zero():
    coeffs = np.zeros(9)
    coeffs[1] = 0.7
    coeffs[3] = -0.4  # z^2 dz/w^2 adds poles over 0 and infinity
    form = OneForm(coeffs, THETA)
    total = sum(residue_at(form, p) for p in ramification_points(THETA))
    assert abs(total) < 1e-8


def test_hbasis_forms_are_residue_free_spot_check():
    form = OneForm.from_hbasis(np.ones(6), THETA)
    pts = ramification_points(THETA)
    assert abs(residue_at(form, pts[0])) < 1e-9   # over z = 0
    assert abs(residue_at(form, pts[-1])) < 1e-9  # over infinity


def test_residue_rejects_generic_point():
    from bolzaspec.curve import base_point

    form = OneForm.from_hbasis(np.ones(6), THETA)
    with pytest.raises(ValueError):
        residue_at(form, base_point(THETA))
