"""Command-line front end.

Exit codes: 0 ok, 1 certificate failure, 2 parse error, 3 domain or pole error.
``AKL_PRECISION`` sets the number of significant digits of printed floats
(default 17).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import certificates
from .algebra import AlgebraError, ParseError
from .connection import Connection2D, curvature, geodesic
from .family import (
    FamilyParams,
    InadmissibleParams,
    Regime,
    killing_basis,
    make_connection,
    normalize_delta,
)
from .group import GroupElement, RegimeMismatch, act, commutes, inverse, psi, sigma_residual, SIGMA_THRESHOLD
from .holonomy import check_verdict, classify_holonomy
from .killing import classify_connection
from .models import DomainError

EXIT_OK, EXIT_CERT, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def precision() -> int:
    raw = os.environ.get("AKL_PRECISION", "17")
    try:
        p = int(raw)
    except ValueError:
        raise UsageError(f"AKL_PRECISION must be an integer, got {raw!r}") from None
    if not 1 <= p <= 17:
        raise UsageError("AKL_PRECISION must be between 1 and 17")
    return p


def fmt_float(v: float) -> str:
    return f"{float(v):.{precision()}g}"


def _plain(obj):
    """Make an object JSON-ready with fixed float precision."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt_float(obj))
    return obj


def emit(obj) -> None:
    sys.stdout.write(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# parsing helpers


def parse_numbers(text: str, n: int, kind=float) -> tuple:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(kind(Fraction(t)) if kind is float else kind(t) for t in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"could not parse numbers in {text!r}") from None


def parse_params(text: str) -> FamilyParams:
    try:
        return FamilyParams.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --params {text!r}: {exc}") from None


def load_connection(path: str) -> tuple[Connection2D, tuple | None]:
    """Read a JSON connection spec: coefficient strings A..V and an optional base_point."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    data = dict(data)
    bp = data.pop("base_point", None)
    if bp is not None:
        bp = parse_numbers(",".join(str(v) for v in bp) if isinstance(bp, list) else str(bp), 2, Fraction)
    return Connection2D.from_strings(data), bp


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    conn, bp = load_connection(args.connection)
    point = parse_numbers(args.point, 2, Fraction) if args.point else (bp or (Fraction(0), Fraction(0)))
    conn.check_point(*point)
    report = classify_connection(conn, point, args.max_order)
    out = report.to_json()
    out["summary"] = (
        f"{report.label}: Killing algebra of dimension {report.dim} at ({point[0]}, {point[1]})"
        + ("" if report.stabilized else " (rank not stabilized)")
    )
    emit(out)
    return EXIT_OK


def cmd_family(args) -> int:
    p = parse_params(args.params)
    conn = make_connection(p)
    rep = curvature(conn)
    regime = Regime.of(p)
    p0, q = normalize_delta(p)
    out = {
        "params": [str(v) for v in p.as_tuple()],
        "connection": conn.to_strings(),
        "torsion": [str(v) for v in rep.torsion],
        "curvature": {"R(dx,dy)dx": [str(v) for v in rep.R_dx], "R(dx,dy)dy": [str(v) for v in rep.R_dy]},
        "curvature_coefficient": str(p.curvature_coefficient),
        "flat": rep.flat,
        "torsion_free": rep.torsion_free,
        "admissible": p.admissible,
        "regime": {"kind": regime.kind, "discriminant": str(regime.delta), "roots": [str(r) for r in regime.roots]},
        "delta_shift": str(q),
    }
    if p.admissible:
        out["killing_basis"] = [f.expr() for f in killing_basis(p0, regime)]
        # sigma is written in the coordinates where delta = 0
        res = sigma_residual(p0)
        out["sigma_isometry"] = res < SIGMA_THRESHOLD
        out["sigma_residual"] = res
    else:
        out["killing_basis"] = None
        out["notes"] = ["torsion and curvature both vanish: the connection is flat and torsion-free"]
    emit(out)
    return EXIT_OK


def _element(text: str, regime) -> GroupElement:
    return GroupElement.from_flat(parse_numbers(text, 4), regime)


def cmd_holonomy(args) -> int:
    p = parse_params(args.params)
    regime = Regime.of(p)
    g1, g2 = _element(args.g1, regime), _element(args.g2, regime)
    verdict = classify_holonomy(p, g1, g2)
    out = verdict.to_json()
    out["checks"] = check_verdict(p, verdict, g1, g2)
    emit(out)
    return EXIT_OK


def cmd_group(args) -> int:
    p = parse_params(args.params)
    regime = Regime.of(p)
    g1 = _element(args.g1, regime)
    out = {
        "regime": regime.kind,
        "g1": g1.flat().tolist(),
        "psi_h1": psi(g1.h, regime).tolist(),
        "inverse_g1": inverse(g1).flat().tolist(),
    }
    if args.g2:
        g2 = _element(args.g2, regime)
        out["g2"] = g2.flat().tolist()
        out["product"] = (g1 * g2).flat().tolist()
        out["commutes"] = commutes(g1, g2)
    if args.point:
        out["act_g1"] = list(act(g1, parse_numbers(args.point, 2)))
    emit(out)
    return EXIT_OK


def cmd_models(args) -> int:
    from .models import SUBMERSION_CASES, invariant_submersion, submersion_check

    rows = []
    ok = True
    for space, kind in SUBMERSION_CASES:
        s = invariant_submersion(space, kind)
        drift, grad = submersion_check(s)
        passed = drift < 1e-9 and grad > 1e-6
        ok &= passed
        rows.append((("PASS" if passed else "FAIL"), f"{space}/{kind}", s.expr, f"drift={fmt_float(drift)}", f"min|grad|={fmt_float(grad)}"))
    cross = certificates.run(["cross_models"])[0]
    ok &= cross.passed
    rows.append((("PASS" if cross.passed else "FAIL"), "cross_models", cross.detail, "", ""))
    for r in rows:
        print("  ".join(v for v in r if v))
    return EXIT_OK if ok else EXIT_CERT


def cmd_geodesic(args) -> int:
    conn, _ = load_connection(args.connection)
    p0 = parse_numbers(args.p0, 2)
    v0 = parse_numbers(args.v0, 2)
    rows = geodesic(conn, p0, v0, args.T, args.n)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "x", "y", "vx", "vy"])
    for r in rows:
        w.writerow([fmt_float(v) for v in r])
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.names or None
    unknown = [n for n in names or () if n not in certificates.CERTIFICATES]
    if unknown:
        raise UsageError(f"unknown certificates {unknown}; choose from {list(certificates.CERTIFICATES)}")
    results = certificates.run(names)
    if args.json:
        emit([c.to_json() for c in results])
    else:
        for c in results:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    failed = [c.name for c in results if not c.passed]
    if failed:
        print(f"failing certificates: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="akl", description="Killing algebras of affine connections on surfaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="Killing algebra of a connection at a point")
    p.add_argument("--connection", required=True, help="JSON file with coefficients A..V")
    p.add_argument("--point", help="base point x,y (rational); overrides base_point in the file")
    p.add_argument("--max-order", type=int, default=6)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("family", help="report on the family connection with the given parameters")
    p.add_argument("--params", required=True, help="alpha,beta,gamma,upsilon[,delta]")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("holonomy", help="classify a commuting holonomy pair")
    p.add_argument("--params", required=True)
    p.add_argument("--g1", required=True, help="s,t,u,v")
    p.add_argument("--g2", required=True, help="s,t,u,v")
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("group", help="group operations in G = H x| K")
    p.add_argument("--params", required=True)
    p.add_argument("--g1", required=True, help="s,t,u,v")
    p.add_argument("--g2", help="s,t,u,v")
    p.add_argument("--point", help="x,y to act on with g1")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("models", help="homogeneous model checks")
    p.add_argument("action", choices=["verify"])
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("geodesic", help="RK4 geodesic as CSV")
    p.add_argument("--connection", required=True)
    p.add_argument("--p0", required=True, help="x,y")
    p.add_argument("--v0", required=True, help="vx,vy")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("verify", help="run the certificate suite")
    p.add_argument("names", nargs="*", help=f"subset of {', '.join(certificates.CERTIFICATES)}")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (AlgebraError, DomainError, InadmissibleParams, RegimeMismatch) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
