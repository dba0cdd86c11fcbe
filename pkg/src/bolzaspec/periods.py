"""Periods over the homology basis, the 6x6 linear system, and its kernel.

The four second-kind basis forms have closed-form periods over the four
homology loops, expressible in the quartet (A, B, C, D); the numerical path
integration must reproduce them.  The period condition for a residue-free
form collapses to a real 6x6 system in the variables
(alpha_1, alpha_5, conj alpha_2, conj alpha_4, alpha_3, conj alpha_6); its
kernel is nontrivial exactly at the two critical angles, where the kernel
vector reproduces the closed-form coefficient vectors of the two
distinguished forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .params import ThetaParam
from .curve import CYCLE_KINDS, Cycle, build_cycle, build_detour_cycle
from .forms import (
    OneForm,
    SecondKindForm,
    ZShiftedForm,
    multiply_reduce,
    reduce_to_second_kind,
    relation_table,
)
from .quadrature import tanh_sinh
from .quartet import IntegralQuartet, integral_quartet

SECOND_KIND_TAGS = ("dz/w", "z dz/w", "z3 dz/w3", "z4 dz/w3")

_EXP_I_PI4 = cmath.exp(1j * math.pi / 4)
_EXP_MI_PI4 = cmath.exp(-1j * math.pi / 4)


def period(form, cycle: Cycle, tol: float = 1e-10) -> complex:
    """Path integral of the form's density against dz along a realized cycle.

    Each segment is integrated with the tanh-sinh rule, which absorbs the
    inverse-square-root endpoint behavior at the ramification points the
    loops pass through.
    """
    total = 0.0 + 0.0j
    for seg in cycle.path.segments:
        if seg.wfun is None:
            raise ValueError("cycle segments must carry explicit sheets")

        def integrand(s, oms, seg=seg):
            z = seg.zfun(s, oms)
            w = seg.wfun(s, oms)
            return form.density(z, w) * seg.dzfun(s, oms)

        value, _ = tanh_sinh(integrand, tol=tol / 4.0)
        total += value
    return total


def closed_form_period_table(q: IntegralQuartet) -> dict[tuple[str, str], complex]:
    """The 16 tabulated periods, keyed by (form tag, cycle kind)."""
    A, B, C, D = q.A, q.B, q.C, q.D
    e, eb = _EXP_I_PI4, _EXP_MI_PI4
    table = {
        ("dz/w", "C4loop"): 2 * A,
        ("z dz/w", "C4loop"): 2 * A,
        ("z3 dz/w3", "C4loop"): 2 * C,
        ("z4 dz/w3", "C4loop"): 2 * C,
        ("dz/w", "PhiC4loop"): 2j * A,
        ("z dz/w", "PhiC4loop"): -2j * A,
        ("z3 dz/w3", "PhiC4loop"): 2j * C,
        ("z4 dz/w3", "PhiC4loop"): -2j * C,
        ("dz/w", "C5loop"): 2 * e * B,
        ("z dz/w", "C5loop"): -2 * eb * B,
        ("z3 dz/w3", "C5loop"): -2 * e * D,
        ("z4 dz/w3", "C5loop"): 2 * eb * D,
        ("dz/w", "PhiC5loop"): -2 * eb * B,
        ("z dz/w", "PhiC5loop"): 2 * e * B,
        ("z3 dz/w3", "PhiC5loop"): 2 * eb * D,
        ("z4 dz/w3", "PhiC5loop"): -2 * e * D,
    }
    return table


def second_kind_basis_form(tag: str, theta: ThetaParam) -> SecondKindForm:
    coeffs = np.zeros(4, dtype=complex)
    coeffs[SECOND_KIND_TAGS.index(tag)] = 1.0
    return SecondKindForm(coeffs, theta)


@dataclass(frozen=True)
class PeriodTable:
    """Numerically integrated periods next to their closed forms."""

    theta: ThetaParam
    quartet: IntegralQuartet
    numeric: dict
    closed: dict

    @property
    def max_abs_err(self) -> float:
        return max(abs(self.numeric[k] - self.closed[k]) for k in self.closed)


def compute_period_table(theta: ThetaParam, tol: float = 1e-10) -> PeriodTable:
    """Integrate all 16 basis periods and pair them with the closed forms."""
    q = integral_quartet(theta)
    cycles = {kind: build_cycle(theta, kind) for kind in CYCLE_KINDS}
    numeric = {}
    for tag in SECOND_KIND_TAGS:
        form = second_kind_basis_form(tag, theta)
        for kind, cyc in cycles.items():
            numeric[(tag, kind)] = period(form, cyc, tol=tol)
    return PeriodTable(theta, q, numeric, closed_form_period_table(q))


def detour_cycles(theta: ThetaParam) -> dict[str, Cycle]:
    """All four loops in their pole-avoiding realization."""
    return {kind: build_detour_cycle(theta, kind) for kind in CYCLE_KINDS}


def reduction_period_residuals(
    theta: ThetaParam, form: OneForm | None = None, tol: float = 1e-10
) -> dict[str, float]:
    """Period mismatch of each exact-form relation over all four loops.

    Covers the six monomial relations and the three reductions of omega,
    z omega, z^2 omega for the supplied residue-free form (default: the
    all-ones coefficient vector).  Every value should vanish to quadrature
    tolerance since the two sides of each relation differ by an exact form.
    """
    if form is None:
        form = OneForm.from_hbasis(np.ones(6), theta)
    cycles = detour_cycles(theta)
    out: dict[str, float] = {}
    for i, (lhs, rhs) in enumerate(relation_table(theta), 1):
        out[f"relation{i}"] = max(
            abs(period(lhs, cyc, tol=tol) - period(rhs, cyc, tol=tol))
            for cyc in cycles.values()
        )
    reductions = [
        ("omega", ZShiftedForm(form, 0), reduce_to_second_kind(form)),
        ("z omega", ZShiftedForm(form, 1), multiply_reduce(form, 1)),
        ("z2 omega", ZShiftedForm(form, 2), multiply_reduce(form, 2)),
    ]
    for name, lhs, rhs in reductions:
        out[name] = max(
            abs(period(lhs, cyc, tol=tol) - period(rhs, cyc, tol=tol))
            for cyc in cycles.values()
        )
    return out


def weierstrass_period_residual(
    form: OneForm, tol: float = 1e-9
) -> tuple[float, float]:
    """Closedness diagnostics of a form's Weierstrass integrand.

    Returns (max norm of the real part of the vector period
    t(1 - z^2, i (1 + z^2), 2 z) * omega over the four loops, max residual
    of the equivalent scalar rewriting: each loop's integral of omega equals
    the conjugate of that of z^2 omega, and the integral of z omega equals
    minus its own conjugate).
    """
    cycles = detour_cycles(form.theta)
    worst_vec = 0.0
    worst_scal = 0.0
    for cyc in cycles.values():
        p0 = period(ZShiftedForm(form, 0), cyc, tol=tol)
        p1 = period(ZShiftedForm(form, 1), cyc, tol=tol)
        p2 = period(ZShiftedForm(form, 2), cyc, tol=tol)
        vec = np.array(
            [(p0 - p2).real, (1j * (p0 + p2)).real, (2.0 * p1).real]
        )
        worst_vec = max(worst_vec, float(np.max(np.abs(vec))))
        worst_scal = max(
            worst_scal, abs(p0 - np.conj(p2)), abs(p1 + np.conj(p1))
        )
    return worst_vec, worst_scal


# ---------------------------------------------------------------------------
# the 6x6 system

#: variable order of the system: (a1, a5, conj a2, conj a4, a3, conj a6)
VARIABLE_ORDER = ("a1", "a5", "a2*", "a4*", "a3", "a6*")


@dataclass(frozen=True)
class PeriodSystem:
    """The real 6x6 period-condition matrix at one theta."""

    M: np.ndarray
    theta: ThetaParam
    quartet: IntegralQuartet


def assemble_system(theta: ThetaParam, tol: float = 1e-12) -> PeriodSystem:
    """Populate the 6x6 matrix from the quartet at the given theta."""
    q = integral_quartet(theta, tol=tol)
    A, B, C, D = q.A, q.B, q.C, q.D
    c = theta.cos2t
    s2 = theta.sin2sq
    M = np.array(
        [
            [A, C, 0.75 * A - C * c, C, 0.25 * A - C * c, 0.25 * A - C * c],
            [B, -D, -0.75 * B - D * c, D, 0.25 * B + D * c, -0.25 * B - D * c],
            [B, -D, 0.25 * B + D * c, -D, 0.75 * B + D * c, 0.75 * B + D * c],
            [A, C, -0.25 * A + C * c, -C, 0.75 * A - C * c, -0.75 * A + C * c],
            [
                -(A * c + 4 * C * s2),
                0.25 * A - C * c,
                1.5 * A * c + (5 - 6 * c * c) * C,
                -0.25 * A + C * c,
                C,
                -C,
            ],
            [
                B * c - 4 * D * s2,
                -(0.25 * B + D * c),
                1.5 * B * c + (-5 + 6 * c * c) * D,
                -0.25 * B - D * c,
                D,
                D,
            ],
        ]
    )
    return PeriodSystem(M, theta, q)


def decode_alpha(y: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """Coefficients (alpha_1..alpha_6) from a system vector.

    The system variables are (a1, a5, conj a2, conj a4, a3, conj a6); a
    complex multiple ``scale`` of a real kernel vector y therefore decodes
    with the conjugate of ``scale`` on the conjugated slots.
    """
    y = np.asarray(y)
    sb = np.conj(scale)
    return np.array(
        [scale * y[0], sb * y[2], scale * y[4], sb * y[3], scale * y[1], sb * y[5]]
    )


# ---------------------------------------------------------------------------
# scripted row reduction

def _reduction_ops(q: IntegralQuartet, theta: ThetaParam):
    """The 22 scripted operations as (source, c_source, target, c_target)."""
    A, B, C, D = q.A, q.B, q.C, q.D
    c = theta.cos2t
    s2 = theta.sin2sq
    ADBC = A * D + B * C
    return [
        (1, -1.0, 4, 1.0),
        (1, c, 5, 1.0),
        (2, -1.0, 3, 1.0),
        (2, -c, 6, 1.0),
        (1, 4 * C * s2, 5, A),
        (2, 4 * D * s2, 6, B),
        (3, 0.5, 2, 1.0),
        (3, -B * c + 2 * D * s2, 6, 1.0),
        (4, 0.5, 1, 1.0),
        (4, A * c + 2 * C * s2, 5, 1.0),
        (1, -B, 2, A),
        (4, -A * A / 8, 5, C),
        (3, -B * B / 8, 6, D),
        (2, C, 1, ADBC),
        (4, -D, 3, C),
        (2, A * A * C / 4 + 4 * C**3 * s2, 5, ADBC),
        (2, -B * B * D / 4 - 4 * D**3 * s2, 6, ADBC),
        (3, A * (-A * D + B * C) / 4, 1, ADBC),
        (3, A * B / 2, 2, ADBC),
        (3, A - 2 * C * c, 4, ADBC),
        (
            3,
            -(A * A) * (A * A * D / 8 + ADBC * C * c + 6 * C * C * D * s2)
            - 4 * A * B * C**3 * s2,
            5,
            ADBC,
        ),
        (
            3,
            -(B * B) * (-B * B * C / 8 + ADBC * D * c - 6 * C * D * D * s2)
            + 4 * A * B * D**3 * s2,
            6,
            ADBC,
        ),
    ]


def scripted_reduce(sys: PeriodSystem) -> tuple[np.ndarray, list]:
    """Apply the 22 scripted row operations to the system matrix.

    Each operation renews exactly one row as c_target * row + c_source *
    source-row, with the source row left unchanged.  Every self-scaling
    factor must be strictly positive, so the kernel is preserved.  Returns
    the reduced matrix and the scaling log.
    """
    M = sys.M.copy()
    log = []
    for i, (src, cs, tgt, ct) in enumerate(_reduction_ops(sys.quartet, sys.theta), 1):
        if ct <= 0.0:
            raise ValueError(f"operation {i}: self-scaling factor {ct:g} <= 0")
        M[tgt - 1] = ct * M[tgt - 1] + cs * M[src - 1]
        log.append({"op": i, "source": src, "c_source": cs, "target": tgt, "c_target": ct})
    return M, log


def reduced_target_matrix(q: IntegralQuartet, theta: ThetaParam) -> np.ndarray:
    """The displayed end state of the scripted reduction."""
    A, B, C, D = q.A, q.B, q.C, q.D
    c = theta.cos2t
    s2 = theta.sin2sq
    ADBC = A * D + B * C
    mADBC = -A * D + B * C
    F1 = A * (B * B + 16 * D * D * s2) + 8 * ADBC * (B * c - 4 * D * s2)
    F2 = B * (A * A + 16 * C * C * s2) - 8 * ADBC * (A * c + 4 * C * s2)
    Y = np.zeros((6, 6))
    Y[0, 0] = A * ADBC**2
    Y[1, 1] = -(ADBC**2)
    Y[2, 2] = ADBC
    Y[3, 3] = -2 * C * ADBC
    Y[0, 4] = 0.5 * A * ADBC**2 + 0.125 * A * mADBC**2
    Y[1, 4] = ADBC**2 * c + 0.25 * A * B * mADBC
    Y[2, 4] = 0.5 * mADBC
    Y[3, 4] = (A * B + (A * D - B * C) * c) * C
    Y[4, 4] = -(1.0 / 16.0) * A * C * (3 * A * D + B * C) * F2
    Y[5, 4] = -(1.0 / 16.0) * B * D * (A * D + 3 * B * C) * F1
    Y[0, 5] = 0.5 * A * ADBC * mADBC
    Y[1, 5] = A * B * ADBC
    Y[2, 5] = ADBC
    Y[3, 5] = 0.0
    Y[4, 5] = 0.25 * A * C * ADBC * F2
    Y[5, 5] = -0.25 * B * D * ADBC * F1
    return Y


# ---------------------------------------------------------------------------
# critical angles and the kernel

def residual_F(theta: ThetaParam, tol: float = 1e-12) -> tuple[float, float]:
    """The two scalar root conditions evaluated from the quartet."""
    q = integral_quartet(theta, tol=tol)
    A, B, C, D = q.A, q.B, q.C, q.D
    c = theta.cos2t
    s2 = theta.sin2sq
    F1 = A * (B * B + 16 * D * D * s2) + 8 * (A * D + B * C) * (B * c - 4 * D * s2)
    F2 = B * (A * A + 16 * C * C * s2) - 8 * (A * D + B * C) * (A * c + 4 * C * s2)
    return F1, F2


@dataclass(frozen=True)
class CriticalAngles:
    """The two roots, with residual values and scan evidence."""

    theta1: float
    theta2: float
    F1_residual: float
    F2_residual: float
    scan_sign_changes: int


def _bisect(f, a: float, b: float, tol: float) -> float:
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fa * fm <= 0.0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def solve_critical_thetas(
    tol_root: float = 1e-12, scan_samples: int = 512
) -> CriticalAngles:
    """Locate the unique root of the first condition by scan plus bisection.

    Also root-solves the second condition independently and checks it lands
    at pi/2 minus the first root.
    """
    if tol_root <= 0.0:
        raise ValueError("tol_root must be positive")
    hi = math.pi / 2

    def f1(x):
        return residual_F(ThetaParam(x))[0]

    def f2(x):
        return residual_F(ThetaParam(x))[1]

    xs = [(k + 0.5) * hi / scan_samples for k in range(scan_samples)]
    vals = [f1(x) for x in xs]
    brackets = [
        (xs[i], xs[i + 1])
        for i in range(scan_samples - 1)
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0
    ]
    if len(brackets) != 1:
        raise ValueError(
            f"expected exactly one sign change of the root condition, "
            f"found {len(brackets)}"
        )
    theta1 = _bisect(f1, *brackets[0], tol=tol_root)
    theta2 = hi - theta1

    # independent root of the mirrored condition
    vals2 = [f2(x) for x in xs]
    brackets2 = [
        (xs[i], xs[i + 1])
        for i in range(scan_samples - 1)
        if vals2[i] == 0.0 or vals2[i] * vals2[i + 1] < 0.0
    ]
    if len(brackets2) == 1:
        root2 = _bisect(f2, *brackets2[0], tol=tol_root)
        if abs(root2 - theta2) > 2.0 * tol_root + 1e-10:
            raise ValueError(
                f"mirrored-condition root {root2} disagrees with pi/2 - theta1"
            )

    F1r, _ = residual_F(ThetaParam(theta1))
    _, F2r = residual_F(ThetaParam(theta2))
    return CriticalAngles(theta1, theta2, F1r, F2r, len(brackets))


def nullspace(sys: PeriodSystem, tol_rank: float = 1e-8):
    """Singular values and kernel basis of the system matrix.

    Returns (singular values, kernel vectors as rows).  Borderline singular
    values within a decade of the threshold trigger a warning entry instead
    of a silent decision.
    """
    _, svals, vt = np.linalg.svd(sys.M)
    rel = svals / svals[0]
    borderline = np.sum((rel >= tol_rank) & (rel < 10.0 * tol_rank))
    if borderline:
        import warnings

        warnings.warn(
            f"{borderline} singular value(s) in the indeterminate band "
            f"[{tol_rank:g}, {10 * tol_rank:g})",
            RuntimeWarning,
        )
    kernel = vt[rel < tol_rank]
    return svals, kernel


def closed_form_alpha_vector(q: IntegralQuartet, theta: ThetaParam) -> np.ndarray:
    """Closed-form coefficients (alpha_1..alpha_6) of the first kernel form."""
    A, B, C, D = q.A, q.B, q.C, q.D
    c = theta.cos2t
    ADBC = A * D + B * C
    return np.array(
        [
            -(A * D + 3 * B * C) / (4 * ADBC),
            -(A * D + 3 * B * C) / (4 * ADBC),
            1.0,
            (A * B + (A * D - B * C) * c) / (2 * ADBC),
            (A * B + 2 * ADBC * c) / (2 * ADBC),
            (3 * A * D + B * C) / (4 * ADBC),
        ],
        dtype=complex,
    )


def omega_pair_at(
    theta_crit: ThetaParam,
    tol_rank: float = 1e-8,
    check_tol: float = 1e-7,
    closed_form: bool = True,
) -> tuple[OneForm, OneForm]:
    """The two independent kernel forms at a critical angle.

    At the first critical angle the closed-form coefficient vector is
    available and the numerical kernel vector must be parallel to it; at the
    second, the numerical kernel alone is used (closed_form=False).
    """
    sys = assemble_system(theta_crit)
    svals, kernel = nullspace(sys, tol_rank=tol_rank)
    if kernel.shape[0] != 1:
        raise ValueError(
            f"kernel dimension {kernel.shape[0]} at theta={theta_crit.theta}; "
            "expected exactly 1"
        )
    y = kernel[0]
    alpha1 = decode_alpha(y, 1.0)

    if closed_form:
        target = closed_form_alpha_vector(sys.quartet, theta_crit)
        # compare directions
        ynorm = alpha1 / np.linalg.norm(alpha1)
        tnorm = target / np.linalg.norm(target)
        if abs(abs(np.vdot(ynorm, tnorm)) - 1.0) > check_tol:
            raise ValueError("kernel vector is not parallel to the closed form")
        alpha1 = target
        alpha2 = 1j * target * np.array([1, -1, 1, -1, 1, -1])
    else:
        # normalize so the z dz/w^3 coefficient is 1, matching the closed form
        alpha1 = alpha1 / alpha1[2]
        alpha2 = 1j * alpha1 * np.array([1, -1, 1, -1, 1, -1])
    return (
        OneForm.from_hbasis(alpha1, theta_crit),
        OneForm.from_hbasis(alpha2, theta_crit),
    )
