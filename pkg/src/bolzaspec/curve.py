"""Points, sheets, paths, symmetries and homology cycles on the curve.

The curve is w^2 = z (z^4 + 2 cos(2 theta) z^2 + 1), a genus-2 double cover
of the sphere branched over z in {0, e^{+-i(pi/2 +- theta)}, infinity}.
Points carry their w-value so the two sheets stay distinguishable; paths are
sequences of smooth parametrized arcs with w either given in closed form or
tracked by nearest-root continuation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .params import ThetaParam

INF = complex("inf")

#: relative tolerance for the curve-equation residual
EPS_CURVE = 1e-10

#: continuation step control
CONTINUATION_STEPS = 256
CONTINUATION_CAP = 1 << 16


class SheetAmbiguityError(RuntimeError):
    """Nearest-root tracking could not pick a sheet; refine the step count."""


def _is_inf(z: complex) -> bool:
    return z == INF or (isinstance(z, complex) and math.isinf(abs(z)))


@dataclass(frozen=True)
class CurvePoint:
    """A point (z, w) on the curve, validated at construction."""

    z: complex
    w: complex
    theta: ThetaParam

    def __post_init__(self) -> None:
        if _is_inf(self.z):
            return
        res = abs(self.w * self.w - self.theta.curve_rhs(self.z))
        if res > EPS_CURVE * (1.0 + abs(self.z) ** 5):
            raise ValueError(f"point ({self.z}, {self.w}) is not on the curve")

    @property
    def at_infinity(self) -> bool:
        return _is_inf(self.z)

    def close_to(self, other: "CurvePoint", tol: float = 1e-9) -> bool:
        if self.at_infinity or other.at_infinity:
            return self.at_infinity and other.at_infinity
        return abs(self.z - other.z) <= tol and abs(self.w - other.w) <= tol


def fiber(z: complex, theta: ThetaParam) -> tuple[complex, complex]:
    """The two w-values over z, principal root first.

    The principal square root has Re >= 0, with Im >= 0 on the cut, which is
    the fixed deterministic ordering used throughout.
    """
    r = cmath.sqrt(theta.curve_rhs(z))
    return r, -r


def ramification_points(theta: ThetaParam) -> list[CurvePoint]:
    """The six ramification points (0,0), (e^{+-i(pi/2+-theta)}, 0), (inf, inf)."""
    pts = [CurvePoint(0.0 + 0.0j, 0.0 + 0.0j, theta)]
    for phi in (
        math.pi / 2 - theta.theta,
        math.pi / 2 + theta.theta,
        -(math.pi / 2 - theta.theta),
        -(math.pi / 2 + theta.theta),
    ):
        pts.append(CurvePoint(cmath.exp(1j * phi), 0.0 + 0.0j, theta))
    pts.append(CurvePoint(INF, INF, theta))
    return pts


def base_point(theta: ThetaParam) -> CurvePoint:
    """The base point (1, sqrt(2 + 2 cos 2 theta)) on the principal sheet."""
    return CurvePoint(1.0 + 0.0j, math.sqrt(2.0 + 2.0 * theta.cos2t) + 0.0j, theta)


# ---------------------------------------------------------------------------
# symmetries

def _sym_j(z, w):
    return z, -w


def _sym_s1(z, w):
    return z.conjugate(), w.conjugate()


def _sym_s2(z, w):
    return -z.conjugate(), 1j * w.conjugate()


def _sym_s3(z, w):
    zb = z.conjugate()
    return 1.0 / zb, w.conjugate() / zb**3


def _sym_phi(z, w):
    return -z, 1j * w


def _sym_psi(z, w):
    return 1.0 / z, w / z**3


SYMMETRIES: dict[str, Callable] = {
    "j": _sym_j,
    "s1": _sym_s1,
    "s2": _sym_s2,
    "s3": _sym_s3,
    "phi": _sym_phi,
    "psi": _sym_psi,
}

#: symmetries whose formula has a pole at z = 0 (and a chart swap at infinity)
_CHART_SWAPPING = {"s3", "psi"}


def apply_symmetry(name: str, p: CurvePoint) -> CurvePoint:
    """Image of p under one of j, s1, s2, s3, phi, psi."""
    try:
        action = SYMMETRIES[name]
    except KeyError:
        raise ValueError(f"unknown symmetry {name!r}") from None
    if name in _CHART_SWAPPING:
        # 1/z swaps the ramification points over 0 and infinity
        if p.at_infinity:
            return CurvePoint(0.0 + 0.0j, 0.0 + 0.0j, p.theta)
        if p.z == 0:
            return CurvePoint(INF, INF, p.theta)
    elif p.at_infinity:
        return p
    z, w = action(p.z, p.w)
    return CurvePoint(z, w, p.theta)


# ---------------------------------------------------------------------------
# paths

@dataclass(frozen=True)
class Segment:
    """A smooth arc s in [0,1] -> z(s), with dz/ds and optionally w(s).

    The callables take (s, 1-s) so arcs reaching out to z = infinity can be
    evaluated without cancellation at the far endpoint.  When ``wfun`` is
    None the sheet is fixed by continuation from the w-value at s = 0.
    """

    zfun: Callable[[float, float], complex]
    dzfun: Callable[[float, float], complex]
    wfun: Optional[Callable[[float, float], complex]] = None

    def z_at(self, s: float) -> complex:
        return self.zfun(s, 1.0 - s)

    def w_at(self, s: float) -> complex:
        if self.wfun is None:
            raise ValueError("segment has no explicit sheet; use continuation")
        return self.wfun(s, 1.0 - s)


def line_segment(z0: complex, z1: complex) -> Segment:
    dz = z1 - z0
    return Segment(lambda s, oms: z0 + s * dz, lambda s, oms: dz)


def circle_segment(center: complex, radius: float, phi0: float, phi1: float) -> Segment:
    dphi = phi1 - phi0

    def zfun(s, oms):
        return center + radius * cmath.exp(1j * (phi0 + s * dphi))

    def dzfun(s, oms):
        return radius * 1j * dphi * cmath.exp(1j * (phi0 + s * dphi))

    return Segment(zfun, dzfun)


@dataclass(frozen=True)
class Path:
    """A piecewise-smooth path with a start point fixing the sheet."""

    start: CurvePoint
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if self.segments and not self.start.at_infinity:
            z0 = self.segments[0].z_at(0.0)
            if abs(z0 - self.start.z) > 1e-9 * (1.0 + abs(z0)):
                raise ValueError("path start does not match first segment")


def track_w(
    segment: Segment,
    theta: ThetaParam,
    w_start: complex,
    svals: Sequence[float],
    steps: int = CONTINUATION_STEPS,
) -> list[complex]:
    """w-values at the given sorted parameters, by nearest-root continuation.

    Intermediate uniform steps are inserted so the tracking grid is at least
    ``steps`` fine regardless of where the requested parameters lie.  Raises
    SheetAmbiguityError when the two candidate roots at some step are closer
    to each other than to the predecessor value.
    """
    grid = sorted(set([i / steps for i in range(steps + 1)] + list(svals)))
    w = w_start
    out: dict[float, complex] = {}
    if grid and grid[0] == 0.0:
        out[0.0] = w
        grid = grid[1:]
    for s in grid:
        r = cmath.sqrt(theta.curve_rhs(segment.z_at(s)))
        d_plus, d_minus = abs(r - w), abs(r + w)
        cand = r if d_plus <= d_minus else -r
        if 2.0 * abs(r) < min(d_plus, d_minus) and abs(r) > 0.0:
            raise SheetAmbiguityError(
                f"root tracking ambiguous at s={s}: refine the step count"
            )
        w = cand
        out[s] = w
    return [w_start if s == 0.0 else out[s] for s in svals]


def continue_sheet(
    path: Path, start: Optional[CurvePoint] = None, steps: int = CONTINUATION_STEPS
) -> tuple[CurvePoint, list[complex]]:
    """Analytic continuation of w along the path.

    Returns the endpoint and the per-segment end w-values.  On sheet
    ambiguity the step count is doubled up to the cap.
    """
    if start is None:
        start = path.start
    w = start.w
    trace: list[complex] = []
    theta = start.theta
    for seg in path.segments:
        if seg.wfun is not None:
            w = seg.w_at(1.0)
        else:
            n = steps
            while True:
                try:
                    w = track_w(seg, theta, w, [1.0], steps=n)[0]
                    break
                except SheetAmbiguityError:
                    if n >= CONTINUATION_CAP:
                        raise
                    n *= 2
        trace.append(w)
    z_end = path.segments[-1].z_at(1.0) if path.segments else start.z
    return CurvePoint(z_end, w, theta), trace


# ---------------------------------------------------------------------------
# homology cycles

CYCLE_KINDS = ("C4loop", "PhiC4loop", "C5loop", "PhiC5loop")


@dataclass(frozen=True)
class Cycle:
    """One of the four closed homology-basis loops, as a realized Path."""

    kind: str
    path: Path
    theta: ThetaParam = field(repr=False)


def _w_plus(t: float, twoc: float) -> float:
    # sqrt(t (t^4 + twoc t^2 + 1)) for t >= 0; the polynomial is positive
    return math.sqrt(t * (t * t * (t * t + twoc) + 1.0))


def _cycle_frame(theta: ThetaParam, kind: str):
    """(axis, phase, twoc) of a homology loop's outgoing branch."""
    if kind not in CYCLE_KINDS:
        raise ValueError(f"unknown cycle kind {kind!r}")
    twoc = 2.0 * theta.cos2t * (1.0 if kind in ("C4loop", "PhiC4loop") else -1.0)
    axis = 1.0 + 0.0j if kind in ("C4loop", "PhiC4loop") else 1j
    phase = 1.0 + 0.0j if kind in ("C4loop", "PhiC4loop") else cmath.exp(1j * math.pi / 4)
    if kind.startswith("Phi"):
        axis, phase = -axis, 1j * phase
    return axis, phase, twoc


def build_cycle(theta: ThetaParam, kind: str) -> Cycle:
    """Realize one of the homology-basis loops.

    The base loop runs 0 -> infinity along an axis on one sheet and back on
    the other (the hyperelliptic image reversed), split at |z| = 1 so each
    segment stays numerically bounded via the t -> 1/t parametrization.
    """
    axis, phase, twoc = _cycle_frame(theta, kind)

    def w_out(t: float) -> complex:
        return phase * _w_plus(t, twoc)

    segs = (
        # 0 -> 1 on the outgoing sheet
        Segment(lambda s, oms: axis * s, lambda s, oms: axis,
                lambda s, oms: w_out(s)),
        # 1 -> infinity, t = 1/(1-s)
        Segment(lambda s, oms: axis / oms, lambda s, oms: axis / (oms * oms),
                lambda s, oms: w_out(1.0 / oms)),
        # infinity -> 1 on the other sheet, t = 1/s
        Segment(lambda s, oms: axis / s, lambda s, oms: -axis / (s * s),
                lambda s, oms: -w_out(1.0 / s)),
        # 1 -> 0
        Segment(lambda s, oms: axis * oms, lambda s, oms: -axis,
                lambda s, oms: -w_out(oms)),
    )
    start = CurvePoint(0.0 + 0.0j, 0.0 + 0.0j, theta)
    return Cycle(kind, Path(start, segs), theta)


def build_detour_cycle(
    theta: ThetaParam,
    kind: str,
    delta: float = 0.25,
    radius_far: float = 4.0,
) -> Cycle:
    """A homologous loop that keeps away from the points over 0 and infinity.

    The passages through the two axis ramification points are replaced by
    full z-circles of radius delta (around 0) and radius_far (around
    infinity); a 2 pi turn in z is a sheet swap in the double cover, so the
    loop still closes after one outgoing and one returning leg.  Forms of
    the second kind with poles only over 0 and infinity have well-defined
    periods on this representative, equal to those of the basic loop when
    the latter converge.
    """
    if not 0.0 < delta < 1.0 < radius_far:
        raise ValueError("need 0 < delta < 1 < radius_far")
    axis, phase, _ = _cycle_frame(theta, kind)
    c = theta.cos2t

    def w_on_axis(t: float) -> complex:
        # the curve rhs at z = axis * t, via the kind's sign convention
        z = axis * t
        return phase * cmath.sqrt(abs(z * (z * z * z * z + 2.0 * c * z * z + 1.0)))

    w_near = w_on_axis(delta)
    w_far = w_on_axis(radius_far)

    def s_far(phi: float) -> complex:
        # sqrt(1 + 2c z^-2 + z^-4), principal; stays near 1 on the far circle
        zinv2 = (cmath.exp(-1j * phi) / (radius_far * axis)) ** 2
        return cmath.sqrt(1.0 + zinv2 * (2.0 * c + zinv2))

    def s_near(phi: float) -> complex:
        z2 = (delta * axis * cmath.exp(1j * phi)) ** 2
        return cmath.sqrt(1.0 + z2 * (2.0 * c + z2))

    span = radius_far - delta

    def far_circle(w_ref: complex) -> Segment:
        s0 = s_far(0.0)

        def zfun(s, oms):
            return radius_far * axis * cmath.exp(2j * math.pi * s)

        def dzfun(s, oms):
            return radius_far * axis * 2j * math.pi * cmath.exp(2j * math.pi * s)

        def wfun(s, oms):
            phi = 2.0 * math.pi * s
            return w_ref * cmath.exp(2.5j * phi) * s_far(phi) / s0

        return Segment(zfun, dzfun, wfun)

    def near_circle(w_ref: complex) -> Segment:
        s0 = s_near(0.0)

        def zfun(s, oms):
            return delta * axis * cmath.exp(2j * math.pi * s)

        def dzfun(s, oms):
            return delta * axis * 2j * math.pi * cmath.exp(2j * math.pi * s)

        def wfun(s, oms):
            phi = 2.0 * math.pi * s
            return w_ref * cmath.exp(0.5j * phi) * s_near(phi) / s0

        return Segment(zfun, dzfun, wfun)

    segs = (
        # outgoing leg, delta -> radius_far
        Segment(
            lambda s, oms: axis * (delta + s * span),
            lambda s, oms: axis * span,
            lambda s, oms: w_on_axis(delta + s * span),
        ),
        far_circle(w_far),
        # returning leg on the other sheet
        Segment(
            lambda s, oms: axis * (delta + oms * span),
            lambda s, oms: -axis * span,
            lambda s, oms: -w_on_axis(delta + oms * span),
        ),
        near_circle(-w_near),
    )
    start = CurvePoint(segs[0].z_at(0.0), segs[0].w_at(0.0), theta)
    return Cycle(kind, Path(start, segs), theta)
