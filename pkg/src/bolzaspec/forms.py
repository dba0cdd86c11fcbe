"""Meromorphic 1-forms z^a dz / w^b on the curve, reductions and residues.

A OneForm is a coefficient vector over the nine-element basis of the
relevant space of sections; the six entries with odd w-power span the
residue-free subspace used everywhere downstream.  Reduction to the four
abelian differentials of the second kind (dz/w, z dz/w, z^3 dz/w^3,
z^4 dz/w^3) is a hard-coded linear map with theta-dependent entries.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .params import ThetaParam
from .curve import CurvePoint, ramification_points

#: (numerator power of z, denominator power of w) for the 9-element basis
BASIS9 = ((0, 1), (0, 2), (1, 2), (2, 2), (0, 3), (1, 3), (2, 3), (3, 3), (4, 3))

#: indices of the residue-free sub-basis {dz/w, dz/w^3, ..., z^4 dz/w^3}
HBASIS_SLOTS = (0, 4, 5, 6, 7, 8)

#: (a, b) pairs of the second-kind basis {dz/w, z dz/w, z^3/w^3 dz, z^4/w^3 dz}
BASIS2ND = ((0, 1), (1, 1), (3, 3), (4, 3))


class PoleEvaluationError(ZeroDivisionError):
    """Raised when a density is evaluated at w = 0."""


class UnsupportedFormError(ValueError):
    """Raised when a reduction is asked for a form outside the handled span."""


def _eval_monomials(monomials, coeffs, z: complex, w: complex) -> complex:
    if w == 0:
        raise PoleEvaluationError("density evaluated at a zero of w")
    total = 0.0 + 0.0j
    for c, (a, b) in zip(coeffs, monomials):
        if c != 0:
            total += c * z**a / w**b
    return total


@dataclass(frozen=True)
class OneForm:
    """Coefficient vector over the 9-element basis, with its theta."""

    coeffs: np.ndarray
    theta: ThetaParam

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (9,):
            raise ValueError("OneForm needs a 9-vector of coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_hbasis(cls, alphas, theta: ThetaParam) -> "OneForm":
        """Build from the six coefficients over the residue-free sub-basis."""
        alphas = np.asarray(alphas, dtype=complex)
        if alphas.shape != (6,):
            raise ValueError("expected six coefficients")
        c = np.zeros(9, dtype=complex)
        c[list(HBASIS_SLOTS)] = alphas
        return cls(c, theta)

    @property
    def hbasis_coeffs(self) -> np.ndarray:
        """The six coefficients (alpha_1 .. alpha_6) over the sub-basis."""
        other = [i for i in range(9) if i not in HBASIS_SLOTS]
        if np.any(np.abs(self.coeffs[other]) > 0):
            raise UnsupportedFormError("form has components outside the sub-basis")
        return self.coeffs[list(HBASIS_SLOTS)]

    def density(self, z: complex, w: complex) -> complex:
        """The function f with omega = f(z, w) dz."""
        return _eval_monomials(BASIS9, self.coeffs, z, w)


@dataclass(frozen=True)
class SecondKindForm:
    """Coefficient vector over the 4-element second-kind basis."""

    coeffs: np.ndarray
    theta: ThetaParam

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (4,):
            raise ValueError("SecondKindForm needs a 4-vector of coefficients")
        object.__setattr__(self, "coeffs", c)

    def density(self, z: complex, w: complex) -> complex:
        return _eval_monomials(BASIS2ND, self.coeffs, z, w)


def eval_form(form: OneForm, p: CurvePoint) -> complex:
    """Evaluate the density of the form at a curve point."""
    return form.density(p.z, p.w)


def reduce_to_second_kind(form: OneForm) -> SecondKindForm:
    """Second-kind representative of a residue-free form, modulo exact forms."""
    a1, a2, a3, a4, a5, a6 = form.hbasis_coeffs
    c = form.theta.cos2t
    out = np.array(
        [
            a1 + 0.75 * a3,
            -1.5 * c * a2 + 0.25 * a4,
            -c * a3 + a5,
            (-5.0 + 6.0 * c * c) * a2 - c * a4 + a6,
        ],
        dtype=complex,
    )
    return SecondKindForm(out, form.theta)


def multiply_reduce(form: OneForm, power: int) -> SecondKindForm:
    """Second-kind representative of z^power * omega, power in {1, 2}."""
    a1, a2, a3, a4, a5, a6 = form.hbasis_coeffs
    c = form.theta.cos2t
    s2 = form.theta.sin2sq
    if power == 1:
        out = [
            0.75 * a2 + 0.25 * a6,
            a1 + 0.25 * a3,
            -c * a2 + a4 - c * a6,
            -c * a3 + a5,
        ]
    elif power == 2:
        out = [
            -c * a1 + 0.25 * a5,
            0.25 * a2 + 0.75 * a6,
            -4.0 * s2 * a1 + a3 - c * a5,
            -c * a2 + a4 - c * a6,
        ]
    else:
        raise ValueError("power must be 1 or 2")
    return SecondKindForm(np.array(out, dtype=complex), form.theta)


@dataclass(frozen=True)
class MonomialForm:
    """A single monomial form z^a dz / w^b, outside any fixed basis."""

    a: int
    b: int

    def density(self, z: complex, w: complex) -> complex:
        if w == 0:
            raise PoleEvaluationError("density evaluated at a zero of w")
        return z**self.a / w**self.b


@dataclass(frozen=True)
class ZShiftedForm:
    """The form z^power * omega for an underlying form."""

    base: OneForm
    power: int

    def density(self, z: complex, w: complex) -> complex:
        return z**self.power * self.base.density(z, w)


def relation_table(theta: ThetaParam) -> list[tuple]:
    """The six exact-form reduction relations as (lhs, rhs) pairs.

    Each pair differs by an exact form, so the two sides have equal periods
    over every cycle avoiding their poles.
    """
    c = theta.cos2t
    s2 = theta.sin2sq

    def sk(v):
        return SecondKindForm(np.array(v, dtype=complex), theta)

    return [
        (MonomialForm(1, 3), sk([0.75, 0, -c, 0])),
        (MonomialForm(2, 3), sk([0, 0.25, 0, -c])),
        (MonomialForm(0, 3), sk([0, -1.5 * c, 0, -5.0 + 6.0 * c * c])),
        (MonomialForm(5, 3), sk([0.25, 0, -c, 0])),
        (MonomialForm(6, 3), sk([0, 0.75, 0, -c])),
        (MonomialForm(2, 1), sk([-c, 0, -4.0 * s2, 0])),
    ]


# ---------------------------------------------------------------------------
# residues

def _closed_lift_integral(
    density, rhs, center: complex, eps: float, steps: int
) -> complex:
    """Contour integral of f dz over the closed lift of a small circle.

    The z-circle is traversed twice (total angle 4 pi) so the sheet returns
    to its start; w is tracked by nearest-root continuation and the periodic
    trapezoid rule is applied to the lifted integrand.
    """
    w = cmath.sqrt(rhs(center + eps))
    total = 0.0 + 0.0j
    for k in range(steps):
        s = k / steps
        zeta = eps * cmath.exp(4j * math.pi * s)
        z = center + zeta
        r = cmath.sqrt(rhs(z))
        w = r if abs(r - w) <= abs(r + w) else -r
        dz = 4j * math.pi * zeta  # dz/ds
        total += density(z, w) * dz
    return total / steps


def residue_at(
    form: OneForm,
    p: CurvePoint,
    eps: float = 1e-2,
    steps: int = 4096,
    check_tol: float = 1e-8,
) -> complex:
    """Residue of the form at a ramification point.

    Computed as the closed-lift contour integral over a z-circle of radius
    eps divided by 2 pi i, with a Richardson consistency check at eps / 2.
    At infinity the (zeta, v) = (1/z, w/z^3) chart is used.
    """
    theta = form.theta
    rams = ramification_points(theta)
    if not any(p.close_to(q) for q in rams):
        raise ValueError("residues are computed at ramification points only")

    if p.at_infinity:
        c = theta.cos2t

        def rhs(zeta):
            return zeta * (1.0 + zeta * zeta * (2.0 * c + zeta * zeta))

        def density(zeta, v):
            # f(z, w) dz = -f(1/zeta, v/zeta^3) / zeta^2 dzeta
            return -form.density(1.0 / zeta, v / zeta**3) / zeta**2

        center = 0.0 + 0.0j
    else:
        others = [
            q.z for q in rams if not q.at_infinity and not p.close_to(q)
        ]
        if any(abs(q - p.z) <= 2.0 * eps for q in others):
            raise ValueError("residue loop would enclose a second branch point")
        rhs = theta.curve_rhs
        density = form.density
        center = p.z

    coarse = _closed_lift_integral(density, rhs, center, eps, steps)
    fine = _closed_lift_integral(density, rhs, center, eps / 2.0, steps)
    value = fine / (2j * math.pi)
    if abs(fine - coarse) / (2.0 * math.pi) > check_tol * (1.0 + abs(value)):
        raise ValueError(
            f"residue did not stabilize under radius halving: "
            f"{abs(fine - coarse) / (2 * math.pi):g}"
        )
    return value
