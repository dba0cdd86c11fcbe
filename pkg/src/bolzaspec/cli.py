"""Command line interface: subcommand dispatch and structured reports.

Every subcommand wraps its payload in a fixed-order envelope with the tool
version, the echoed configuration, and a pass/fail summary of the checks it
ran.  Floats are serialized with 17 significant digits so a parse of the
output reproduces them bit for bit; CSV output uses comma separators and LF
line endings.  Exit status is 0 when all invoked checks pass, 1 when a
check fails, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import datetime
import math
import os
import sys

import numpy as np

from . import __version__
from .params import ThetaParam
from .quartet import integral_quartet
from .curve import ramification_points
from .forms import OneForm, residue_at
from .periods import (
    SECOND_KIND_TAGS,
    assemble_system,
    compute_period_table,
    decode_alpha,
    nullspace,
    omega_pair_at,
    reduction_period_residuals,
    solve_critical_thetas,
)
from .immersion import (
    eigen_residual,
    inversion_density_residual,
    sample_points,
    support_function,
    symmetry_report,
)
from .fem import (
    V1_SECTOR,
    V2_SECTOR,
    sector_table,
    spectrum,
    sweep,
)

#: default tolerances, echoed into every report (flags override one each)
DEFAULTS = {
    "tol_quadrature": 1e-12,
    "tol_root": 1e-12,
    "tol_rank": 1e-8,
    "tol_period": 1e-8,
    "h": 0.02,
    "k_per_sector": 8,
    "samples": 20,
}


def _format_float(v: float) -> str:
    if v != v:
        return "NaN"
    if v in (float("inf"), float("-inf")):
        return '"Infinity"' if v > 0 else '"-Infinity"'
    return format(v, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """Serialize with insertion-ordered keys and 17-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag}, indent)
    if obj is None:
        return "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for byte-stable reruns
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
    else:
        dt = datetime.datetime.now(datetime.timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def envelope(subcommand: str, config: dict, results, checks: list[dict]) -> dict:
    return {
        "tool": "bolzaspec",
        "version": __version__,
        "timestamp": _timestamp(),
        "subcommand": subcommand,
        "config": config,
        "results": results,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def check(name: str, value: float, tolerance: float, ok=None) -> dict:
    return {
        "name": name,
        "value": value,
        "tolerance": tolerance,
        "pass": bool(abs(value) <= tolerance if ok is None else ok),
    }


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


def _csv(rows: list[list], header: list[str]) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def cmd_integrals(args) -> dict:
    theta = ThetaParam(args.theta)
    q = integral_quartet(theta, tol=args.tol)
    qm = integral_quartet(theta.mirror, tol=args.tol)
    swap = max(abs(q.A - qm.B), abs(q.B - qm.A), abs(q.C - qm.D), abs(q.D - qm.C))
    results = {"A": q.A, "B": q.B, "C": q.C, "D": q.D, "quadrature_error": q.err}
    checks = [
        check("quadrature_error", q.err, max(args.tol, 5e-13 * q.D)),
        check("mirror_swap_residual", swap, 1e-9),
    ]
    return envelope("integrals", {"theta": args.theta, "tol": args.tol}, results, checks)


def cmd_find_theta(args) -> dict:
    ca = solve_critical_thetas(tol_root=args.tol)
    results = {
        "theta1": ca.theta1,
        "theta2": ca.theta2,
        "F1_residual": ca.F1_residual,
        "F2_residual": ca.F2_residual,
        "scan_sign_changes": ca.scan_sign_changes,
    }
    checks = [
        check("F1_residual", ca.F1_residual, 1e-10),
        check("scan_sign_changes", ca.scan_sign_changes - 1, 0.5),
        check(
            "theta_sum_minus_half_pi",
            ca.theta1 + ca.theta2 - math.pi / 2,
            2.0 * args.tol,
        ),
    ]
    return envelope("find-theta", {"tol": args.tol}, results, checks)


def cmd_nullspace(args) -> dict:
    theta = ThetaParam(args.theta)
    sys_ = assemble_system(theta)
    svals, kernel = nullspace(sys_, tol_rank=args.tol_rank)
    results = {
        "singular_values": list(svals),
        "nullity": kernel.shape[0],
    }
    if kernel.shape[0] == 1:
        alphas = decode_alpha(kernel[0])
        results["alpha_vector"] = [complex(a) for a in alphas]
    checks = [
        check(
            "kernel_residual",
            float(np.max(np.abs(sys_.M @ kernel.T))) if kernel.size else 0.0,
            1e-7,
        )
    ]
    return envelope(
        "nullspace", {"theta": args.theta, "tol_rank": args.tol_rank}, results, checks
    )


def cmd_periods(args):
    theta = ThetaParam(args.theta)
    table = compute_period_table(theta, tol=args.tol)
    rows = []
    for tag in SECOND_KIND_TAGS:
        for kind in ("C4loop", "PhiC4loop", "C5loop", "PhiC5loop"):
            num = table.numeric[(tag, kind)]
            ref = table.closed[(tag, kind)]
            rows.append(
                [tag, kind, num.real, num.imag, ref.real, ref.imag, abs(num - ref)]
            )
    text = _csv(
        rows,
        ["form", "cycle", "re", "im", "closed_form_re", "closed_form_im", "abs_err"],
    )
    ok = table.max_abs_err <= 1e-8
    return text, ok


def cmd_verify_omega(args) -> dict:
    if args.at_critical or args.theta is None:
        ca = solve_critical_thetas()
        theta = ThetaParam(ca.theta1)
        critical = True
    else:
        theta = ThetaParam(args.theta)
        critical = args.at_critical
    results: dict = {"theta": theta.theta}
    checks = []

    # residue table of the residue-free basis
    worst_res = 0.0
    table = []
    rams = ramification_points(theta)
    for i in range(6):
        coeffs = np.zeros(6)
        coeffs[i] = 1.0
        form = OneForm.from_hbasis(coeffs, theta)
        row = []
        for p in rams:
            r = abs(residue_at(form, p))
            worst_res = max(worst_res, r)
            row.append(r)
        table.append(row)
    results["residue_table"] = table
    checks.append(check("max_basis_residue", worst_res, 1e-8))

    red = reduction_period_residuals(theta)
    results["reduction_period_residuals"] = red
    checks.append(check("max_reduction_residual", max(red.values()), 1e-8))

    if critical:
        w1, w2 = omega_pair_at(theta)
        rep = symmetry_report(w1, w2, n=args.samples)
        results["symmetry_residuals"] = {
            "s1_u1": rep.s1_u1,
            "s1_u2": rep.s1_u2,
            "s3_u1": rep.s3_u1,
            "s3_u2": rep.s3_u2,
            "j_u1": rep.j_u1,
            "j_u2": rep.j_u2,
        }
        results["c1"] = list(rep.c1)
        results["c2"] = list(rep.c2)
        checks.append(check("max_symmetry_residual", rep.max_residual, 1e-6))
        checks.append(
            check(
                "inversion_density_residual",
                max(
                    inversion_density_residual(w1, -1),
                    inversion_density_residual(w2, +1),
                ),
                1e-10,
            )
        )
        pts = sample_points(theta, 10, seed=5)
        eig = [eigen_residual(w1, p, h=1e-3) for p in pts]
        results["eigen_residuals"] = eig
        checks.append(check("max_eigen_residual", max(eig), 1e-3))
        if args.csv is not None:
            rows = [
                [
                    p.z.real,
                    p.z.imag,
                    1 if p.w.real >= 0 else -1,
                    support_function(w1, p),
                    support_function(w2, p),
                ]
                for p in sample_points(theta, args.samples, seed=13)
            ]
            _emit(_csv(rows, ["re_z", "im_z", "sheet", "u1", "u2"]), args.csv)
    config = {
        "theta": theta.theta,
        "at_critical": critical,
        "samples": args.samples,
    }
    return envelope("verify-omega", config, results, checks)


def cmd_spectrum(args) -> dict:
    theta = ThetaParam(args.theta)
    res = spectrum(theta, k_per_sector=args.k, h=args.h, richardson=args.richardson)
    results = {
        "eigenvalues": list(res.eigenvalues),
        "sectors": list(res.sectors),
        "index": res.index,
        "nullity": res.nullity,
        "tol_cluster": res.tol_cluster,
        "error_estimate": res.error_estimate,
        "weighted_area": res.weighted_area,
    }
    checks = [
        check("weighted_area_vs_pi", res.weighted_area - math.pi, 20.0 * args.h**2),
        check("nullity_at_least_3", 0.0, 1.0, ok=res.nullity >= 3),
    ]
    config = {
        "theta": args.theta,
        "h": args.h,
        "k": args.k,
        "richardson": args.richardson,
    }
    return envelope("spectrum", config, results, checks)


def cmd_sweep(args):
    if args.sectors == "all":
        sectors = sector_table()
    else:
        sectors = [V1_SECTOR, V2_SECTOR]
    snap = ()
    if args.snap_critical:
        ca = solve_critical_thetas()
        snap = (ca.theta1, ca.theta2)
    res = sweep(
        getattr(args, "from"),
        args.to,
        args.steps,
        sectors=sectors,
        h=args.h,
        snap_angles=snap,
        count_clusters=args.clusters,
    )
    rows = []
    for label, table in res.branches.items():
        for i, t in enumerate(res.thetas):
            for b in range(table.shape[1]):
                rows.append([t, label, b, table[i, b]])
    text = _csv(rows, ["theta", "sector", "branch_index", "eigenvalue"])
    ok = all(res.monotone.values())
    return text, ok


def cmd_index_table(args):
    rows = []
    ok = True
    for t in args.thetas:
        res = spectrum(ThetaParam(t), k_per_sector=args.k, h=args.h)
        rows.append([t, res.index, res.nullity])
        ok = ok and res.nullity >= 3
    return _csv(rows, ["theta", "Ind", "Nul"]), ok


# ---------------------------------------------------------------------------
# dispatch

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bolzaspec",
        description="Numerical verification suite for the extremal genus-2 "
        "spectral family",
    )
    p.add_argument("--output", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("integrals", help="the quartet A, B, C, D at one theta")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--tol", type=float, default=DEFAULTS["tol_quadrature"])

    sp = sub.add_parser("find-theta", help="locate the two critical angles")
    sp.add_argument("--tol", type=float, default=DEFAULTS["tol_root"])

    sp = sub.add_parser("nullspace", help="SVD of the 6x6 period system")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--tol-rank", type=float, default=DEFAULTS["tol_rank"])

    sp = sub.add_parser("periods", help="CSV of numeric vs closed-form periods")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser(
        "verify-omega", help="residues, reductions, and the symmetry report"
    )
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument(
        "--at-critical",
        action="store_true",
        help="use the computed first critical angle and run the full report",
    )
    sp.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    sp.add_argument("--csv", help="also write (re z, im z, sheet, u1, u2) samples")

    sp = sub.add_parser("spectrum", help="merged sector spectrum at one theta")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--h", type=float, default=DEFAULTS["h"])
    sp.add_argument("--k", type=int, default=DEFAULTS["k_per_sector"])
    sp.add_argument(
        "--no-richardson", dest="richardson", action="store_false", default=True
    )

    sp = sub.add_parser("sweep", help="eigenvalue branches across a theta range")
    sp.add_argument("--from", type=float, required=True)
    sp.add_argument("--to", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--sectors", choices=["v1,v2", "all"], default="v1,v2")
    sp.add_argument("--h", type=float, default=DEFAULTS["h"])
    sp.add_argument("--snap-critical", action="store_true")
    sp.add_argument("--clusters", action="store_true")

    sp = sub.add_parser("index-table", help="CSV of (theta, Ind, Nul)")
    sp.add_argument(
        "--thetas", type=lambda s: [float(x) for x in s.split(",")], required=True
    )
    sp.add_argument("--h", type=float, default=DEFAULTS["h"])
    sp.add_argument("--k", type=int, default=DEFAULTS["k_per_sector"])

    return p


_JSON_COMMANDS = {
    "integrals": cmd_integrals,
    "find-theta": cmd_find_theta,
    "nullspace": cmd_nullspace,
    "verify-omega": cmd_verify_omega,
    "spectrum": cmd_spectrum,
}

_CSV_COMMANDS = {
    "periods": cmd_periods,
    "sweep": cmd_sweep,
    "index-table": cmd_index_table,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand in _JSON_COMMANDS:
        report = _JSON_COMMANDS[args.subcommand](args)
        _emit(to_json(report) + "\n", args.output)
        return 0 if report["pass"] else 1
    text, ok = _CSV_COMMANDS[args.subcommand](args)
    _emit(text, args.output)
    return 0 if ok else 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
