"""Mixed Dirichlet/Neumann eigenproblems on the half-disk fundamental domain.

The round metric on the quotient half disk is conformally flat, so the
eigenproblem keeps the flat P1 stiffness matrix and puts the conformal
factor 4/(1+|z|^2)^2 into the mass matrix only.  Each of the eight symmetry
characters becomes a choice of Dirichlet or Neumann condition on the four
boundary arcs; eigenvalues below 2 and the cluster at 2 give the index and
nullity counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .params import ThetaParam

ARCS = ("G1", "G2", "G3", "G4")

#: dense generalized solve below this many unknowns, shift-invert above
DENSE_LIMIT = 3000

#: geometric grading toward corner and transition points
GRADING_RATIO = 0.7
GRADING_DEPTH = 8


class MeshResolutionError(ValueError):
    """Raised when the target edge length cannot resolve the boundary arcs."""


@dataclass(frozen=True)
class SectorSpec:
    """A character of the order-8 symmetry group, as boundary conditions.

    signs = (sign of s1, sign of j, sign of s3).  An arc inside the fixed
    set of a reflection is Neumann when the character is even under it:
    G1 = (0,1) on the real axis is fixed by s1, G2 = (-1,0) by j s1,
    G3 = the outer circle arcs by s3, G4 = the middle arc by j s3.
    """

    signs: tuple[int, int, int]

    def __post_init__(self) -> None:
        if tuple(abs(s) for s in self.signs) != (1, 1, 1):
            raise ValueError("signs must be a triple of +-1")

    @property
    def neumann(self) -> dict[str, bool]:
        s1, sj, s3 = self.signs
        return {
            "G1": s1 == 1,
            "G2": sj * s1 == 1,
            "G3": s3 == 1,
            "G4": sj * s3 == 1,
        }

    @property
    def label(self) -> str:
        return "".join("+" if s == 1 else "-" for s in self.signs)


def sector_table() -> list[SectorSpec]:
    """All eight sign triples, in a fixed lexicographic order."""
    return [
        SectorSpec((s1, sj, s3))
        for s1 in (1, -1)
        for sj in (1, -1)
        for s3 in (1, -1)
    ]


V1_SECTOR = SectorSpec((1, -1, 1))
V2_SECTOR = SectorSpec((-1, -1, 1))


# ---------------------------------------------------------------------------
# meshing

@dataclass(frozen=True)
class Mesh:
    """Conforming P1 triangulation of the upper half unit disk."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: tuple
    theta: ThetaParam
    h: float

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def flat_area(self) -> float:
        v = self.vertices
        t = self.triangles
        d1 = v[t[:, 1]] - v[t[:, 0]]
        d2 = v[t[:, 2]] - v[t[:, 0]]
        return float(np.sum(np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])) / 2.0)

    def weighted_area(self) -> float:
        _, M = assemble(self)
        return float(M.sum())


def graded_partition(
    a: float,
    b: float,
    target: float,
    ratio: float = GRADING_RATIO,
    depth: int = GRADING_DEPTH,
    grade_a: bool = True,
    grade_b: bool = True,
) -> np.ndarray:
    """Partition [a, b] with step ~ target, geometrically refined at the ends.

    The graded tail at each refined end consists of ``depth`` steps shrinking
    by ``ratio``; the tail is shortened automatically when the interval is
    too small to hold both tails and at least one interior step.
    """
    if not b > a:
        raise ValueError("need b > a")
    length = b - a
    d = depth
    while d > 0:
        tail = [target * ratio**k for k in range(d, 0, -1)]
        used = sum(tail) * (int(grade_a) + int(grade_b))
        if length - used > 0.5 * target:
            break
        d -= 1
    else:
        tail = []
    used = sum(tail) * (int(grade_a) + int(grade_b))
    middle = length - used
    n_mid = max(1, round(middle / target))
    steps = (tail if grade_a else []) + [middle / n_mid] * n_mid
    steps += tail[::-1] if grade_b else []
    nodes = a + np.concatenate([[0.0], np.cumsum(steps)])
    nodes[-1] = b
    return nodes


def mesh_fundamental_domain(theta: ThetaParam, h: float = 0.02) -> Mesh:
    """Polar tensor mesh of {|z| < 1, Im z > 0} with marked boundary arcs.

    Angular nodes include the transition angles pi/2 +- theta exactly; both
    the angular spans and the radial direction are geometrically graded
    toward the five corner/transition points (0, +-1, the two arc splits).
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    lo = math.pi / 2 - theta.theta
    hi = math.pi / 2 + theta.theta
    if hi - lo < 8.0 * h:
        raise MeshResolutionError(
            f"h={h:g} leaves fewer than 8 segments on the middle arc"
        )
    phis = np.concatenate(
        [
            graded_partition(0.0, lo, h),
            graded_partition(lo, hi, h)[1:],
            graded_partition(hi, math.pi, h)[1:],
        ]
    )
    rs = graded_partition(0.0, 1.0, h)[1:]  # r = 0 collapses to one vertex

    na = len(phis)
    nr = len(rs)
    verts = np.empty((1 + na * nr, 2))
    verts[0] = (0.0, 0.0)

    def vid(i_r: int, i_a: int) -> int:
        return 1 + i_r * na + i_a

    rr, pp = np.meshgrid(rs, phis, indexing="ij")
    verts[1:, 0] = (rr * np.cos(pp)).ravel()
    verts[1:, 1] = (rr * np.sin(pp)).ravel()

    tris = []
    for i_a in range(na - 1):
        tris.append((0, vid(0, i_a), vid(0, i_a + 1)))
    for i_r in range(nr - 1):
        for i_a in range(na - 1):
            v00 = vid(i_r, i_a)
            v01 = vid(i_r, i_a + 1)
            v10 = vid(i_r + 1, i_a)
            v11 = vid(i_r + 1, i_a + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))

    boundary = []
    # radial sides: phi = 0 is G1, phi = pi is G2
    boundary.append((0, vid(0, 0), "G1"))
    boundary.append((0, vid(0, na - 1), "G2"))
    for i_r in range(nr - 1):
        boundary.append((vid(i_r, 0), vid(i_r + 1, 0), "G1"))
        boundary.append((vid(i_r, na - 1), vid(i_r + 1, na - 1), "G2"))
    # outer circle: split by the transition angles
    for i_a in range(na - 1):
        mid = 0.5 * (phis[i_a] + phis[i_a + 1])
        marker = "G4" if lo < mid < hi else "G3"
        boundary.append((vid(nr - 1, i_a), vid(nr - 1, i_a + 1), marker))

    return Mesh(
        verts,
        np.array(tris, dtype=np.int64),
        tuple(boundary),
        theta,
        h,
    )


# ---------------------------------------------------------------------------
# assembly and solves

def conformal_weight(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """The round-metric density 4/(1+|z|^2)^2."""
    return 4.0 / (1.0 + x * x + y * y) ** 2


def assemble(mesh: Mesh):
    """Flat P1 stiffness and conformally weighted mass, as CSR matrices.

    The mass matrix uses the edge-midpoint rule, which is exact for
    quadratics and keeps the matrix well conditioned.
    """
    v = mesh.vertices
    t = mesh.triangles
    x = v[t, 0]
    y = v[t, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
    area = 0.5 * np.abs(area2)

    ke = (
        (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
        / (4.0 * area)[:, None, None]
    )

    # midpoint m_k is opposite vertex k; P1 hat values there are 0, 1/2, 1/2
    mx = 0.5 * (x[:, [1, 2, 0]] + x[:, [2, 0, 1]])
    my = 0.5 * (y[:, [1, 2, 0]] + y[:, [2, 0, 1]])
    rho = conformal_weight(mx, my)
    phi = 0.5 * (1.0 - np.eye(3))  # phi[i, k] = hat_i at midpoint k
    me = np.einsum("ek,ik,jk->eij", rho, phi, phi) * (area / 3.0)[:, None, None]

    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    K = scipy.sparse.csr_matrix((ke.ravel(), (rows, cols)), shape=(n, n))
    M = scipy.sparse.csr_matrix((me.ravel(), (rows, cols)), shape=(n, n))
    return K, M


def dirichlet_vertices(mesh: Mesh, spec: SectorSpec) -> np.ndarray:
    """Vertex indices clamped to zero under the sector's conditions."""
    neumann = spec.neumann
    fixed = set()
    for i, j, marker in mesh.boundary:
        if not neumann[marker]:
            fixed.add(i)
            fixed.add(j)
    return np.array(sorted(fixed), dtype=np.int64)


def solve_sector(
    theta: ThetaParam,
    spec: SectorSpec,
    k: int = 8,
    h: float = 0.02,
    mesh: Mesh | None = None,
    operators=None,
    return_vectors: bool = False,
):
    """The k smallest eigenvalues of the sector's mixed eigenproblem.

    Dirichlet arcs are imposed by eliminating their vertices from the
    generalized system K u = lambda M u.  Small systems are solved densely;
    larger ones by shift-invert Lanczos targeted at the bottom of the
    spectrum.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if mesh is None:
        mesh = mesh_fundamental_domain(theta, h)
    if operators is None:
        operators = assemble(mesh)
    K, M = operators
    fixed = dirichlet_vertices(mesh, spec)
    keep = np.setdiff1d(np.arange(mesh.n_vertices), fixed)
    Kr = K[np.ix_(keep, keep)]
    Mr = M[np.ix_(keep, keep)]
    n = len(keep)
    if k >= n:
        raise ValueError("k exceeds the number of free unknowns")
    if n < DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(
            Kr.toarray(), Mr.toarray(), subset_by_index=[0, k - 1]
        )
    else:
        vals, vecs = scipy.sparse.linalg.eigsh(
            Kr.tocsc(), k=k, M=Mr.tocsc(), sigma=-0.5, which="LM"
        )
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]
    vals = np.maximum(vals, 0.0) if vals[0] > -1e-9 else vals
    if not return_vectors:
        return vals
    full = np.zeros((mesh.n_vertices, k))
    full[keep] = vecs
    return vals, full


# ---------------------------------------------------------------------------
# merged spectra

@dataclass(frozen=True)
class SpectrumResult:
    """Merged sector spectrum with index and nullity counts."""

    theta: ThetaParam
    eigenvalues: np.ndarray
    sectors: tuple
    index: int
    nullity: int
    tol_cluster: float
    h: float
    richardson: bool
    error_estimate: float
    weighted_area: float
    per_sector: dict = field(repr=False)


def cluster_tolerance(error_estimate: float) -> float:
    """The documented schedule: max(5e-3, 3 x extrapolation error)."""
    return max(5e-3, 3.0 * error_estimate)


#: eigenvalues above this play no role in index or nullity counts
LOW_WINDOW = 3.5


def _low_window_error(vals_coarse: np.ndarray, vals_fine: np.ndarray) -> float:
    """Extrapolation error estimate restricted to the low spectral window."""
    sel = vals_fine < LOW_WINDOW
    if not np.any(sel):
        return 0.0
    return float(np.max(np.abs(vals_fine[sel] - vals_coarse[sel])) / 3.0)


def spectrum(
    theta: ThetaParam,
    k_per_sector: int = 8,
    h: float = 0.02,
    richardson: bool = True,
    sectors: list[SectorSpec] | None = None,
) -> SpectrumResult:
    """The merged low spectrum over the (sub)set of character sectors.

    With richardson on, each eigenvalue is extrapolated from meshes at h and
    h/2 and the worst observed change feeds the cluster tolerance.
    """
    if sectors is None:
        sectors = sector_table()
    mesh = mesh_fundamental_domain(theta, h)
    ops = assemble(mesh)
    per_sector: dict[str, np.ndarray] = {}
    err_est = 0.0
    if richardson:
        mesh2 = mesh_fundamental_domain(theta, h / 2.0)
        ops2 = assemble(mesh2)
    for spec in sectors:
        vals = solve_sector(theta, spec, k=k_per_sector, mesh=mesh, operators=ops)
        if richardson:
            vals2 = solve_sector(
                theta, spec, k=k_per_sector, mesh=mesh2, operators=ops2
            )
            err_est = max(err_est, _low_window_error(vals, vals2))
            vals = (4.0 * vals2 - vals) / 3.0
        per_sector[spec.label] = vals
    merged = []
    for spec in sectors:
        for v in per_sector[spec.label]:
            merged.append((float(v), spec.label))
    merged.sort()
    eigs = np.array([m[0] for m in merged])
    tags = tuple(m[1] for m in merged)
    tol = cluster_tolerance(err_est)
    index = int(np.sum(eigs < 2.0 - tol))
    nullity = int(np.sum(np.abs(eigs - 2.0) <= tol))
    Mw = ops[1]
    return SpectrumResult(
        theta,
        eigs,
        tags,
        index,
        nullity,
        tol,
        h,
        richardson,
        err_est,
        float(Mw.sum()),
        per_sector,
    )


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepResult:
    """Tracked v1/v2 branches over a theta grid, with crossing estimates."""

    thetas: np.ndarray
    branches: dict
    monotone: dict
    crossings: dict
    error_estimate: float
    h: float
    nullities: np.ndarray | None = None
    indices: np.ndarray | None = None
    tol_cluster: float = 0.0


def _interp_crossing(thetas, values, level: float = 2.0):
    """First upward crossing of the level, by inverse linear interpolation."""
    for i in range(len(values) - 1):
        if values[i] < level <= values[i + 1]:
            t0, t1 = thetas[i], thetas[i + 1]
            v0, v1 = values[i], values[i + 1]
            return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))
    return None


def sweep(
    theta_min: float,
    theta_max: float,
    steps: int,
    sectors: list[SectorSpec] | None = None,
    k: int = 4,
    h: float = 0.02,
    richardson: bool = True,
    snap_angles: tuple[float, ...] = (),
    count_clusters: bool = False,
) -> SweepResult:
    """Track the lowest eigenvalue branch of each sector across theta.

    Reports per-sector branch tables, nondecreasing flags for the tracked
    branch, and the angle where it crosses level 2 (inverse interpolation).
    Each angle in ``snap_angles`` that falls inside the window replaces the
    nearest grid sample, so features located exactly there (the nullity
    bump at a critical angle) are sampled where they occur rather than at a
    grid-phase-dependent offset.  With ``count_clusters`` the nullity and
    index are recorded per sample from all eight sectors.
    """
    if not 0.0 < theta_min < theta_max < math.pi / 2:
        raise ValueError("sweep range must sit inside (0, pi/2)")
    if sectors is None:
        sectors = [V1_SECTOR, V2_SECTOR]
    thetas = np.linspace(theta_min, theta_max, steps)
    for snap in snap_angles:
        if theta_min < snap < theta_max:
            thetas[np.argmin(np.abs(thetas - snap))] = snap
    branches: dict[str, np.ndarray] = {s.label: np.empty((steps, k)) for s in sectors}
    all_sectors = sector_table()
    cluster_specs = all_sectors if count_clusters else sectors
    extras = [s for s in cluster_specs if s not in sectors]
    nullities = np.zeros(steps, dtype=int) if count_clusters else None
    indices = np.zeros(steps, dtype=int) if count_clusters else None
    merged_per_sample: list[np.ndarray] = []
    err_est = 0.0
    for i, t in enumerate(thetas):
        tp = ThetaParam(float(t))
        mesh = mesh_fundamental_domain(tp, h)
        ops = assemble(mesh)
        if richardson:
            mesh2 = mesh_fundamental_domain(tp, h / 2.0)
            ops2 = assemble(mesh2)
        sample_vals = []
        for spec in sectors + extras:
            vals = solve_sector(tp, spec, k=k, mesh=mesh, operators=ops)
            if richardson:
                vals2 = solve_sector(tp, spec, k=k, mesh=mesh2, operators=ops2)
                err_est = max(err_est, _low_window_error(vals, vals2))
                vals = (4.0 * vals2 - vals) / 3.0
            if spec in sectors:
                branches[spec.label][i] = vals
            sample_vals.append(vals)
        if count_clusters:
            merged_per_sample.append(np.concatenate(sample_vals))
    if count_clusters:
        # one tolerance for the whole sweep, from the final error estimate
        tol = cluster_tolerance(err_est)
        for i, merged in enumerate(merged_per_sample):
            nullities[i] = int(np.sum(np.abs(merged - 2.0) <= tol))
            indices[i] = int(np.sum(merged < 2.0 - tol))
    monotone = {}
    crossings = {}
    for spec in sectors:
        lowest = branches[spec.label][:, 0]
        monotone[spec.label] = bool(np.all(np.diff(lowest) >= -1e-4))
        crossings[spec.label] = _interp_crossing(thetas, lowest)
    return SweepResult(
        thetas,
        branches,
        monotone,
        crossings,
        err_est,
        h,
        nullities,
        indices,
        cluster_tolerance(err_est),
    )
