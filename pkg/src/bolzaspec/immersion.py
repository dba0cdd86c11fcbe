"""Weierstrass integrals, the Gauss normal, and support-function checks.

The position map is X(p) = Re of the integral of the vector integrand
t(1 - z^2, i (1 + z^2), 2 z) * omega from the base point p0 = (1, w0).
At a critical angle the real parts of all periods vanish, so X and the
support function u = <X, N> are single-valued; the symmetry identities and
the eigenvalue-2 equation for u are verified numerically on samples.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .params import ThetaParam
from .curve import (
    CONTINUATION_CAP,
    CONTINUATION_STEPS,
    CurvePoint,
    Path,
    Segment,
    SheetAmbiguityError,
    base_point,
    ramification_points,
    track_w,
)
from .forms import OneForm

#: clearance kept between routed paths and branch points in the z-plane
DETOUR_RADIUS = 0.05


class RoutingError(ValueError):
    """Raised when a path to the requested point cannot be realized."""


def _finite_branch_z(theta: ThetaParam) -> list[complex]:
    return [p.z for p in ramification_points(theta) if not p.at_infinity]


def _detour_polyline(theta: ThetaParam, z_from: complex, z_to: complex):
    """Segments from z_from to z_to, bypassing branch points by DETOUR_RADIUS.

    The straight chord is kept except where it cuts a branch-point disk; the
    cut chord piece is replaced by the shorter arc of the disk boundary.
    """
    r = DETOUR_RADIUS
    d = z_to - z_from
    length = abs(d)
    if length == 0.0:
        return []
    u = d / length
    hits = []
    for b in _finite_branch_z(theta):
        # foot of the perpendicular from b onto the chord
        t = ((b - z_from) / u).real
        if t <= 0.0 or t >= length:
            continue
        dist = abs(z_from + t * u - b)
        if dist >= r:
            continue
        if abs(z_to - b) < r or abs(z_from - b) < r:
            raise RoutingError(f"path endpoint inside the bypass disk of {b}")
        half = math.sqrt(r * r - dist * dist)
        hits.append((t - half, t + half, b))
    hits.sort()
    for (_, e0, _), (s1, _, _) in zip(hits, hits[1:]):
        if s1 < e0:
            raise RoutingError("overlapping branch-point bypasses")

    segs = []
    pos = z_from
    for t_in, t_out, b in hits:
        z_in = z_from + t_in * u
        z_out = z_from + t_out * u
        if abs(z_in - pos) > 0.0:
            segs.append(_line(pos, z_in))
        phi0 = cmath.phase(z_in - b)
        phi1 = cmath.phase(z_out - b)
        dphi = (phi1 - phi0) % (2.0 * math.pi)
        if dphi > math.pi:
            dphi -= 2.0 * math.pi  # take the shorter arc
        segs.append(_arc(b, r, phi0, dphi))
        pos = z_out
    if abs(z_to - pos) > 0.0:
        segs.append(_line(pos, z_to))
    return segs


def _line(z0: complex, z1: complex) -> Segment:
    d = z1 - z0
    return Segment(lambda s, oms: z0 + s * d, lambda s, oms: d)


def _arc(center: complex, radius: float, phi0: float, dphi: float) -> Segment:
    def zfun(s, oms):
        return center + radius * cmath.exp(1j * (phi0 + s * dphi))

    def dzfun(s, oms):
        return radius * 1j * dphi * cmath.exp(1j * (phi0 + s * dphi))

    return Segment(zfun, dzfun)


def sheet_swap_loop(theta: ThetaParam) -> Segment:
    """The canonical loop at z = 1: one positive turn around e^{i(pi/2-theta)}.

    The circle is centered at that branch point and passes through z = 1; a
    full z-turn around a single branch point swaps the sheets, so the loop
    connects p0 to its hyperelliptic image.
    """
    b = cmath.exp(1j * (math.pi / 2 - theta.theta))
    radius = abs(1.0 - b)
    for other in _finite_branch_z(theta):
        if other == b:
            continue
        if abs(abs(other - b) - radius) < DETOUR_RADIUS:
            raise RoutingError("canonical loop passes too close to a branch point")
    phi0 = cmath.phase(1.0 - b)
    return _arc(b, radius, phi0, 2.0 * math.pi)


def route_to(target: CurvePoint, theta: ThetaParam | None = None) -> Path:
    """A path from the base point to the target, on the correct sheet.

    The z-route is the bypassing polyline from 1 to z(target); if sheet
    tracking along it ends on the wrong sheet, the canonical swap loop is
    prepended at z = 1.
    """
    if theta is None:
        theta = target.theta
    p0 = base_point(theta)
    if target.at_infinity:
        raise RoutingError("routing to the point over infinity is not supported")
    segs = _detour_polyline(theta, 1.0 + 0.0j, target.z)
    w = p0.w
    for seg in segs:
        w = _track_end(seg, theta, w)
    scale = max(1.0, abs(target.w))
    if abs(w - target.w) <= 1e-6 * scale:
        return Path(p0, tuple(segs))
    if abs(w + target.w) <= 1e-6 * scale:
        return Path(p0, (sheet_swap_loop(theta),) + tuple(segs))
    raise RoutingError(
        f"tracked sheet {w} matches neither w nor -w of the target {target.w}"
    )


def _track_end(seg: Segment, theta: ThetaParam, w_start: complex) -> complex:
    n = CONTINUATION_STEPS
    while True:
        try:
            return track_w(seg, theta, w_start, [1.0], steps=n)[0]
        except SheetAmbiguityError:
            if n >= CONTINUATION_CAP:
                raise
            n *= 2


def _vector_density(form: OneForm, z: complex, w: complex) -> np.ndarray:
    f = form.density(z, w)
    z2 = z * z
    return np.array([(1.0 - z2) * f, 1j * (1.0 + z2) * f, 2.0 * z * f])


def weierstrass_integrate(
    form: OneForm, path: Path, tol: float = 1e-9, max_nodes: int = 4096
) -> np.ndarray:
    """Re of the integral of t(1-z^2, i(1+z^2), 2z) * omega along the path.

    Each segment is integrated by Gauss-Legendre with node doubling until
    the vector changes by less than tol; the sheet at the nodes is fixed by
    continuation from the running w-value.
    """
    theta = path.start.theta
    total = np.zeros(3, dtype=complex)
    w = path.start.w
    for seg in path.segments:
        prev = None
        n = 16
        while True:
            x, gw = np.polynomial.legendre.leggauss(n)
            svals = 0.5 * (x + 1.0)
            if seg.wfun is None:
                wvals = track_w(seg, theta, w, list(svals) + [1.0])
                w_end = wvals[-1]
                wvals = wvals[:-1]
            else:
                wvals = [seg.wfun(s, 1.0 - s) for s in svals]
                w_end = seg.wfun(1.0, 0.0)
            acc = np.zeros(3, dtype=complex)
            for s, wv, gwk in zip(svals, wvals, gw):
                z = seg.zfun(s, 1.0 - s)
                acc += gwk * _vector_density(form, z, wv) * seg.dzfun(s, 1.0 - s)
            acc *= 0.5
            if prev is not None and np.max(np.abs(acc - prev)) <= tol:
                break
            if n >= max_nodes:
                raise RoutingError(
                    f"segment quadrature did not converge at {max_nodes} nodes"
                )
            prev = acc
            n *= 2
        total += acc
        w = w_end
    return total.real


def gauss_normal(p: CurvePoint) -> np.ndarray:
    """The unit normal (2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2)."""
    if p.at_infinity:
        return np.array([0.0, 0.0, 1.0])
    z = p.z
    r2 = abs(z) ** 2
    return np.array([2.0 * z.real, 2.0 * z.imag, r2 - 1.0]) / (1.0 + r2)


def support_function(
    form: OneForm, p: CurvePoint, path: Path | None = None, tol: float = 1e-9
) -> float:
    """u = <X, N> at p, integrating along the given (or a routed) path."""
    if path is None:
        path = route_to(p)
    X = weierstrass_integrate(form, path, tol=tol)
    return float(np.dot(X, gauss_normal(p)))


# ---------------------------------------------------------------------------
# symmetry residuals

@dataclass(frozen=True)
class SymmetryReport:
    """Max residuals of the six pullback identities over a sample set."""

    s1_u1: float
    s1_u2: float
    s3_u1: float
    s3_u2: float
    j_u1: float
    j_u2: float
    c1: np.ndarray
    c2: np.ndarray
    n_samples: int

    def __post_init__(self) -> None:
        for name in ("s1_u1", "s1_u2", "s3_u1", "s3_u2", "j_u1", "j_u2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"residual {name} must be finite nonnegative")

    @property
    def max_residual(self) -> float:
        return max(self.s1_u1, self.s1_u2, self.s3_u1, self.s3_u2, self.j_u1, self.j_u2)


def translation_constants(
    form1: OneForm, form2: OneForm, tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    """The vectors c_i = X_{omega_i}(j(p0)) along the canonical swap loop."""
    theta = form1.theta
    p0 = base_point(theta)
    loop = Path(p0, (sheet_swap_loop(theta),))
    return (
        weierstrass_integrate(form1, loop, tol=tol),
        weierstrass_integrate(form2, loop, tol=tol),
    )


def sample_points(theta: ThetaParam, n: int, seed: int = 7) -> list[CurvePoint]:
    """n generic curve points on both sheets, clear of branch points."""
    rng = np.random.default_rng(seed)
    pts: list[CurvePoint] = []
    branches = _finite_branch_z(theta)
    while len(pts) < n:
        z = complex(rng.uniform(-0.85, 0.85), rng.uniform(-0.85, 0.85))
        if abs(z) < 0.15 or abs(z) > 0.85:
            continue
        if any(abs(z - b) < 2.0 * DETOUR_RADIUS for b in branches):
            continue
        w = cmath.sqrt(theta.curve_rhs(z))
        if rng.integers(2):
            w = -w
        pts.append(CurvePoint(z, w, theta))
    return pts


def symmetry_report(
    form1: OneForm, form2: OneForm, n: int = 20, tol: float = 1e-9, seed: int = 7
) -> SymmetryReport:
    """Residuals of the pullback identities for u1, u2 at a critical angle.

    Checks u1 and u2 composed with the three generators: the reflection
    s1 (u1 even, u2 odd), the inversion s3 (both even), and the sheet swap j
    (both flip up to the translation correction <c_i, N>).
    """
    from .curve import apply_symmetry

    theta = form1.theta
    c1, c2 = translation_constants(form1, form2, tol=tol)
    res = {k: 0.0 for k in ("s1_u1", "s1_u2", "s3_u1", "s3_u2", "j_u1", "j_u2")}
    for p in sample_points(theta, n, seed=seed):
        u1 = support_function(form1, p, tol=tol)
        u2 = support_function(form2, p, tol=tol)
        N = gauss_normal(p)
        for sym, key1, key2, sgn1, sgn2 in (
            ("s1", "s1_u1", "s1_u2", 1.0, -1.0),
            ("s3", "s3_u1", "s3_u2", 1.0, 1.0),
        ):
            q = apply_symmetry(sym, p)
            res[key1] = max(res[key1], abs(support_function(form1, q, tol=tol) - sgn1 * u1))
            res[key2] = max(res[key2], abs(support_function(form2, q, tol=tol) - sgn2 * u2))
        q = apply_symmetry("j", p)
        res["j_u1"] = max(
            res["j_u1"],
            abs(support_function(form1, q, tol=tol) + u1 - float(np.dot(c1, N))),
        )
        res["j_u2"] = max(
            res["j_u2"],
            abs(support_function(form2, q, tol=tol) + u2 - float(np.dot(c2, N))),
        )
    return SymmetryReport(n_samples=n, c1=c1, c2=c2, **res)


def inversion_density_residual(
    form: OneForm, sign: int, n: int = 20, seed: int = 11
) -> float:
    """Residual of the density identity for the composed inversion psi.

    psi (z, w) = (1/z, w/z^3) pulls the form back to sign * z^2 * itself:
    the pulled-back density -f(1/z, w/z^3)/z^2 must equal
    sign * z^2 * f(z, w) at every point.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    theta = form.theta
    for _ in range(n):
        z = complex(rng.uniform(0.4, 1.6), rng.uniform(-0.8, 0.8))
        w = cmath.sqrt(theta.curve_rhs(z))
        pulled = -form.density(1.0 / z, w / z**3) / z**2
        worst = max(worst, abs(pulled - sign * z * z * form.density(z, w)))
    return worst


# ---------------------------------------------------------------------------
# the eigenvalue-2 equation

def eigen_residual(
    form: OneForm,
    p: CurvePoint,
    h: float = 1e-3,
    tol: float = 1e-10,
) -> float:
    """|((1+|z|^2)^2 / 4) * (flat 5-point Laplacian of u) + 2 u| at p.

    The metric Laplacian in the z-chart is the flat one divided by the
    conformal factor, so the round-sphere eigenvalue equation for u becomes
    the displayed residual.  Stencil neighbors are reached by short straight
    integration legs from the center, so only O(h) of extra path error
    enters each u-value.
    """
    theta = p.theta
    if any(
        not b.at_infinity and abs(p.z - b.z) < 10.0 * h
        for b in ramification_points(theta)
    ):
        raise RoutingError("stencil too close to a branch point")
    path = route_to(p)
    Xc = weierstrass_integrate(form, path, tol=tol)
    uc = float(np.dot(Xc, gauss_normal(p)))
    lap = -4.0 * uc
    for dz in (h, -h, 1j * h, -1j * h):
        seg = _line(p.z, p.z + dz)
        w_end = _track_end(seg, theta, p.w)
        q = CurvePoint(p.z + dz, w_end, theta)
        Xq = Xc + weierstrass_integrate(form, Path(p, (seg,)), tol=tol)
        lap += float(np.dot(Xq, gauss_normal(q)))
    lap /= h * h
    r2 = abs(p.z) ** 2
    return abs(0.25 * (1.0 + r2) ** 2 * lap + 2.0 * uc)


def stencil_residual_of(values, center_u: float, z: complex, h: float) -> float:
    """The same residual for a precomputed 4-neighbor value list."""
    lap = (sum(values) - 4.0 * center_u) / (h * h)
    r2 = abs(z) ** 2
    return abs(0.25 * (1.0 + r2) ** 2 * lap + 2.0 * center_u)


def pullback_harmonic(z: complex) -> float:
    """The closed-form eigenvalue-2 function (|z|^2 - 1)/(|z|^2 + 1)."""
    r2 = abs(z) ** 2
    return (r2 - 1.0) / (r2 + 1.0)


# ---------------------------------------------------------------------------
# extra-eigenfunction evidence

def extra_check(points: list[CurvePoint], u_values) -> float:
    """Relative residual of fitting u by span{N1, N2, N3, 1} over samples.

    A value well above 0.1 evidences an eigenfunction that is not pulled
    back from a degree-1 spherical harmonic.
    """
    u = np.asarray(u_values, dtype=float)
    if len(points) < 10 or len(points) != len(u):
        raise ValueError("need at least 10 samples with matching u values")
    A = np.array([list(gauss_normal(p)) + [1.0] for p in points])
    if np.linalg.cond(A.T @ A) > 1e8:
        raise ValueError("degenerate sample geometry; resample")
    coef, _, _, _ = np.linalg.lstsq(A, u, rcond=None)
    resid = u - A @ coef
    scale = np.linalg.norm(u)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(resid) / scale)
