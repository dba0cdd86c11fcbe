"""Quartet integrals against a naive adaptive Simpson oracle.

The oracle integrates in the original t variable, splitting at t = 1 and
substituting t = u^2 (respectively t = 1/u^2) so both pieces become smooth
integrals over (0, 1].  It shares no code with the production
double-exponential quadrature.
"""

import math

import numpy as np
import pytest

from bolzaspec.params import ThetaParam
from bolzaspec.quadrature import QuadratureError, de_real_line, tanh_sinh
from bolzaspec.quartet import INTEGRAND_TAGS, integral_quartet


def _adaptive_simpson(f, a, b, tol, depth=40):
    def simpson(fa, fm, fb, a_, b_):
        return (b_ - a_) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a_, b_, fa, fm, fb, whole, tol_, d):
        m = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m), 0.5 * (m + b_)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a_, m)
        right = simpson(fm, frm, fb, m, b_)
        if d <= 0 or abs(left + right - whole) <= 15.0 * tol_:
            return left + right + (left + right - whole) / 15.0
        return recurse(a_, m, fa, flm, fm, left, 0.5 * tol_, d - 1) + recurse(
            m, b_, fm, frm, fb, right, 0.5 * tol_, d - 1
        )

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def simpson_oracle(k, m, sign, theta, tol=1e-12):
    """Integral of t^k (t (t^4 + 2 sign c t^2 + 1))^{-m/2} over (0, inf)."""
    c = sign * theta.cos2t

    def poly(u):
        u4 = u**4
        return u4 * u4 + 2.0 * c * u4 + 1.0

    # t in (0, 1], t = u^2: integrand 2 u^{2k - m + 1} poly(u)^{-m/2}
    def inner(u):
        return 2.0 * u ** (2 * k - m + 1) * poly(u) ** (-0.5 * m)

    # t in [1, inf), t = 1/u^2: integrand 2 u^{5m - 2k - 3} poly(u)^{-m/2}
    def outer(u):
        return 2.0 * u ** (5 * m - 2 * k - 3) * poly(u) ** (-0.5 * m)

    return _adaptive_simpson(inner, 0.0, 1.0, tol) + _adaptive_simpson(
        outer, 0.0, 1.0, tol
    )


@pytest.mark.parametrize("theta_val", [0.3, math.pi / 4, 0.658303986737837, 1.1])
def test_quartet_matches_simpson_oracle(theta_val):
    theta = ThetaParam(theta_val)
    q = integral_quartet(theta)
    values = {"A": q.A, "B": q.B, "C": q.C, "D": q.D}
    for tag, (k, m, sign) in INTEGRAND_TAGS.items():
        oracle = simpson_oracle(k, m, sign, theta)
        assert values[tag] == pytest.approx(oracle, abs=1e-10, rel=1e-10)


def test_quartet_positive_and_error_small():
    q = integral_quartet(ThetaParam(0.5))
    assert min(q.A, q.B, q.C, q.D) > 0.0
    assert q.err < 1e-10


def test_mirror_swaps_quartet():
    theta = ThetaParam(0.42)
    q = integral_quartet(theta)
    qm = integral_quartet(theta.mirror)
    assert q.A == pytest.approx(qm.B, rel=1e-11)
    assert q.C == pytest.approx(qm.D, rel=1e-11)


def test_de_real_line_gaussian():
    value, err = de_real_line(lambda x: math.exp(-x * x))
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert err < 1e-11


def test_tanh_sinh_endpoint_singularity():
    # int_0^1 ds / sqrt(s (1 - s)) = pi
    value, err = tanh_sinh(lambda s, oms: 1.0 / math.sqrt(s * oms))
    assert value == pytest.approx(math.pi, rel=1e-11)
    assert err < 1e-9


def test_de_real_line_nonconvergent_raises():
    with pytest.raises(QuadratureError):
        de_real_line(lambda x: np.sin(50.0 * x) ** 2, tol=1e-15, max_level=3)
