"""Certificate suite behind ``akl verify``.

Each certificate is a function returning a ``Certificate`` with a name,
a pass flag and a short detail string.  Certificates look up the
functions they check through their modules at call time, so replacing
e.g. ``akl.group.psi`` or ``akl.killing.case6_target`` in a test makes
the corresponding certificate fail.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp

from . import family as fam
from . import group as grp
from . import holonomy as hol
from . import killing as kil
from . import models as mdl
from .algebra import ZERO, RationalFunction2, rank
from .connection import Connection2D, curvature, geodesic, pullback_residual, sample_grid


@dataclass(frozen=True)
class Certificate:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


GROUP_SAMPLES = 200
REGIME_PARAMS = {
    "RealDistinct": fam.FamilyParams(3, 2, 0, 1),
    "ComplexPair": fam.FamilyParams(1, 1, 0, 1),
    "RealDouble": fam.FamilyParams(2, 1, 0, 1),
}


# ---------------------------------------------------------------------------
# 1. case 6


def cert_case6() -> Certificate:
    try:
        det = kil.verify_case6()
    except kil.CertificateError as exc:
        return Certificate("case6", False, str(exc))
    kernel = kil.case6_solutions(1)
    lam = det.coeffs[-1] / kil.case6_target().coeffs[-1]
    ok = not kernel
    return Certificate("case6", ok, f"det = {det}, lambda = {lam}, kernel at s=1 has dim {len(kernel)}")


# ---------------------------------------------------------------------------
# 2. family dimension


FAMILY_GRID = dict(alpha=(0, 2, 3), beta=(0, 1, 2), gamma=(0, 1, -1), upsilon=(0, 1))


def family_grid() -> list[fam.FamilyParams]:
    """Grid points whose characteristic roots are rational (real or complex)."""
    out = []
    for a in FAMILY_GRID["alpha"]:
        for b in FAMILY_GRID["beta"]:
            if not fam.Regime.of(fam.FamilyParams(a, b)).exact:
                continue
            for g in FAMILY_GRID["gamma"]:
                for u in FAMILY_GRID["upsilon"]:
                    out.append(fam.FamilyParams(a, b, g, u))
    return out


def family_dimension_failures(p: fam.FamilyParams) -> list[str]:
    conn = fam.make_connection(p)
    bad = []
    reports = [kil.classify_connection(conn, pt) for pt in ((0, 0), (1, 1))]
    if not p.admissible:
        for r in reports:
            if r.dim != 6 or r.label != "FlatTorsionFree":
                bad.append(f"{p}: inadmissible gave dim {r.dim} {r.label}")
        return bad
    for r in reports:
        if r.dim != 4 or r.label != "Dim4Case":
            bad.append(f"{p} at {r.point}: dim {r.dim} {r.label}")
    jets = [list(f.jet_at_origin()) for f in fam.killing_basis(p)]
    if rank(jets, 6) != 4 or rank(jets + [list(j) for j in reports[0].basis], 6) != 4:
        bad.append(f"{p}: solved jet space differs from the closed-form basis")
    return bad


def cert_family_dimension() -> Certificate:
    grid = family_grid()
    bad = [msg for p in grid for msg in family_dimension_failures(p)]
    n_inad = sum(not p.admissible for p in grid)
    return Certificate(
        "family_dimension",
        not bad,
        f"{len(grid)} parameter points ({n_inad} inadmissible) at (0,0) and (1,1)" + (f"; {bad[:3]}" if bad else ""),
    )


# ---------------------------------------------------------------------------
# 3. sigma criterion

SIGMA_GRID = dict(
    alpha=(0, 1, 2, 3),
    gamma=(Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2)),
    upsilon=(Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)),
    beta=2,
)


def sigma_grid_results() -> list[tuple[fam.FamilyParams, bool, float]]:
    """(params, on_slice, residual) for the admissible points of the grid."""
    out = []
    for a in SIGMA_GRID["alpha"]:
        for g in SIGMA_GRID["gamma"]:
            for u in SIGMA_GRID["upsilon"]:
                p = fam.FamilyParams(a, SIGMA_GRID["beta"], g, u)
                if not p.admissible:
                    continue
                out.append((p, p.alpha == 2 * p.gamma and p.upsilon == 0, grp.sigma_residual(p)))
    return out


def cert_sigma() -> Certificate:
    res = sigma_grid_results()
    wrong = [str(p) for p, on, r in res if (r < grp.SIGMA_THRESHOLD) != on]
    on_max = max(r for _, on, r in res if on)
    off_min = min(r for _, on, r in res if not on)
    return Certificate(
        "sigma_criterion",
        not wrong,
        f"{len(res)} admissible points; max on-slice residual {on_max:.3g}, min off-slice {off_min:.3g}"
        + (f"; misclassified {wrong}" if wrong else ""),
    )


# ---------------------------------------------------------------------------
# 4. curvature formula


def symbolic_family_curvature():
    """R(d_x, d_y) d_x and R(d_x, d_y) d_y of the family, with indeterminate
    parameters, computed directly in sympy."""
    x, y, al, be, ga, up, de = sp.symbols("x y alpha beta gamma upsilon delta")
    G = [[[0, ga + up], [ga - up, be * x + de]], [[0, 0], [0, 2 * ga - al]]]  # G[k][i][j]
    v = (x, y)

    def R(i, j, l):
        return [
            sp.simplify(
                sp.diff(G[m][j][l], v[i])
                - sp.diff(G[m][i][l], v[j])
                + sum(G[k][j][l] * G[m][i][k] - G[k][i][l] * G[m][j][k] for k in range(2))
            )
            for m in range(2)
        ]

    return (al, be, ga, up, de), R(0, 1, 0), R(0, 1, 1)


def cert_curvature(n: int = 20, seed: int = 1) -> Certificate:
    syms, r_dx, r_dy = symbolic_family_curvature()
    al, be, ga, up, de = syms
    expected = be + (ga + up) * (ga + up - al)
    if any(sp.simplify(e) != 0 for e in r_dx) or sp.simplify(r_dy[0] - expected) != 0 or r_dy[1] != 0:
        return Certificate("curvature", False, f"symbolic curvature {r_dx}, {r_dy}")
    rng = random.Random(seed)
    bad = []
    for _ in range(n):
        p = fam.FamilyParams(*(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(5)))
        rep = curvature(fam.make_connection(p))
        if rep.R_dx != (ZERO, ZERO) or rep.R_dy != (RationalFunction2.const(p.curvature_coefficient), ZERO):
            bad.append(str(p))
    return Certificate("curvature", not bad, f"symbolic identity plus {n} rational tuples" + (f"; {bad}" if bad else ""))


# ---------------------------------------------------------------------------
# 5. group and action


def _random_element(rng: np.random.Generator, regime) -> grp.GroupElement:
    return grp.GroupElement.from_flat(rng.uniform(-1.0, 1.0, size=4), regime)


def _commuting_pair(rng: np.random.Generator, regime) -> tuple:
    """Two time-flows of a common Killing field, which always commute."""
    s, t, u, v = rng.uniform(-1.0, 1.0, size=4)
    W = fam.KillingField(s, t, (u, v), regime)
    return grp.flow(W, float(rng.uniform(-1, 1))), grp.flow(W, float(rng.uniform(-1, 1)))


def group_errors(p: fam.FamilyParams, n: int = GROUP_SAMPLES, seed: int = 2) -> dict:
    regime = fam.Regime.of(p)
    rng = np.random.default_rng(seed)
    conn = fam.make_connection(fam.normalize_delta(p)[0])
    pts = sample_grid(-1.0, 1.0, 3)
    err = dict(representation=0.0, associativity=0.0, inverse=0.0, left_action=0.0, isometry=0.0)
    disagreements = 0
    for i in range(n):
        h1, h2 = rng.uniform(-1, 1, size=2), rng.uniform(-1, 1, size=2)
        err["representation"] = max(
            err["representation"],
            float(np.max(np.abs(grp.psi(h1 + h2, regime) - grp.psi(h1, regime) @ grp.psi(h2, regime)))),
        )
        a, b, c = (_random_element(rng, regime) for _ in range(3))
        err["associativity"] = max(err["associativity"], ((a * b) * c).distance(a * (b * c)))
        err["inverse"] = max(err["inverse"], (a * grp.inverse(a)).distance(grp.GroupElement.identity(regime)))
        pt = tuple(rng.uniform(-1, 1, size=2))
        lhs = np.array(grp.act(a * b, pt))
        rhs = np.array(grp.act(a, grp.act(b, pt)))
        err["left_action"] = max(err["left_action"], float(np.max(np.abs(lhs - rhs))))
        err["isometry"] = max(err["isometry"], pullback_residual(conn, grp.as_map(a), pts))
        g1, g2 = _commuting_pair(rng, regime) if i % 2 else (a, b)
        if grp.commutes(g1, g2) != (grp.commutator_defect(g1, g2) < grp.GROUP_TOL):
            disagreements += 1
    err["commutes_disagreements"] = disagreements
    return err


def cert_group() -> Certificate:
    worst = []
    ok = True
    for kind, p in REGIME_PARAMS.items():
        e = group_errors(p)
        tol_ok = all(e[k] < grp.GROUP_TOL for k in ("representation", "associativity", "inverse", "left_action"))
        ok = ok and tol_ok and e["isometry"] < 1e-4 and e["commutes_disagreements"] == 0
        worst.append(
            f"{kind}: rep {e['representation']:.1e}, assoc {e['associativity']:.1e}, "
            f"action {e['left_action']:.1e}, isometry {e['isometry']:.1e}, comb mismatches {e['commutes_disagreements']}"
        )
    return Certificate("group_action", ok, "; ".join(worst))


# ---------------------------------------------------------------------------
# 6. holonomy branches


def holonomy_cases() -> list[tuple[str, fam.FamilyParams, grp.GroupElement, grp.GroupElement]]:
    """One constructed input per branch of the case analysis: (expected branch, p, g1, g2)."""
    pos = fam.FamilyParams(3, 2, 0, 1)  # roots -1, -2
    rp = fam.Regime.of(pos)
    a1, a2 = rp.float_roots
    dbl = fam.FamilyParams(0, 0, 0, 1)
    rd = fam.Regime.of(dbl)
    neg = fam.FamilyParams(0, 1, 0, 1)
    rn = fam.Regime.of(neg)
    W1 = fam.KillingField(a1, 1.0, (0.0, 0.0), rp)
    W2 = fam.KillingField(a2, 1.0, (1.0, 0.0), rp)
    Z1 = fam.KillingField(0.0, 0.0, (1.0, 0.0), rp)
    generic = grp.GroupElement((1.0, 0.5), (0.2, 0.3), rp)
    return [
        ("both-in-H", pos, generic, generic * generic),
        ("I_F0", pos, grp.GroupElement((0, 0), (1, 0), rp), grp.GroupElement((0, 0), (0, 1), rp)),
        ("delta>0 subcase 1", pos, grp.flow(W1, 1.0), grp.flow(Z1, 0.5)),
        ("delta>0 subcase 2", pos, grp.flow(W1, 1.0), grp.flow(W2, 1.0)),
        (
            "delta<0",
            neg,
            grp.GroupElement((0, 2 * math.pi), (1, 0), rn),
            grp.GroupElement((0, 4 * math.pi), (0, 1), rn),
        ),
        ("delta=0", dbl, grp.GroupElement((0, 1), (0, 1), rd), grp.GroupElement((0, 2), (0, 2), rd)),
    ]


def cert_holonomy() -> Certificate:
    bad, details = [], []
    for branch, p, g1, g2 in holonomy_cases():
        v = hol.classify_holonomy(p, g1, g2)
        if v.branch != branch:
            bad.append(f"expected {branch}, got {v.branch}")
            continue
        if v.outcome == hol.COMMUTING:
            chk = hol.check_verdict(p, v, g1, g2)
            if not chk["passed"] or chk["invariance"] > 1e-8:
                bad.append(f"{branch}: {chk}")
            details.append(f"{branch}: flow {chk['flow_residual']:.1e}, bracket {chk['commutator']:.1e}")
        else:
            details.append(f"{branch}: {v.outcome}")
    return Certificate("holonomy", not bad, "; ".join(bad or details))


# ---------------------------------------------------------------------------
# 7. cross models


def cert_cross_models() -> Certificate:
    cases = [
        ("hyperbolic", mdl.hyperbolic_connection(), (0, 1), 3, "SL2"),
        ("sphere", mdl.sphere_connection(), (0, 0), 3, "SO3"),
        ("zero", Connection2D(), (0, 0), 6, "FlatTorsionFree"),
    ]
    bad, detail = [], []
    for name, c, pt, dim, label in cases:
        r = kil.classify_connection(c, pt)
        detail.append(f"{name}: {r.dim} {r.label}")
        if (r.dim, r.label) != (dim, label):
            bad.append(name)
    for name, c in (("hyperbolic", mdl.hyperbolic_connection()), ("sphere", mdl.sphere_connection())):
        if not (c.U.is_zero() and c.V.is_zero()):
            bad.append(f"{name} torsion")
    return Certificate("cross_models", not bad, "; ".join(detail))


# ---------------------------------------------------------------------------
# 8. submersions


def cert_submersions() -> Certificate:
    bad, worst, grad = [], 0.0, math.inf
    for space, kind in mdl.SUBMERSION_CASES:
        d, g = mdl.submersion_check(mdl.invariant_submersion(space, kind))
        worst, grad = max(worst, d), min(grad, g)
        if d >= 1e-9 or g <= 1e-6:
            bad.append(f"{space}/{kind}")
    return Certificate(
        "submersions",
        not bad,
        f"{len(mdl.SUBMERSION_CASES)} cases; max orbit drift {worst:.1e}, min gradient {grad:.2g}" + (f"; {bad}" if bad else ""),
    )


# ---------------------------------------------------------------------------
# 9. geodesic convergence


def geodesic_errors(ns=(8, 16, 32)) -> list[float]:
    """Endpoint errors for family(0,1,0,0,0) from (1, 0) with velocity (0, 1):
    y = t and x'' = -x, so x(1) = cos(1)."""
    c = fam.make_connection(fam.FamilyParams(0, 1, 0, 0, 0))
    out = []
    for n in ns:
        t, x, y, vx, vy = geodesic(c, (1.0, 0.0), (0.0, 1.0), 1.0, n)[-1]
        out.append(max(abs(x - math.cos(1.0)), abs(vx + math.sin(1.0)), abs(y - 1.0)))
    return out


def cert_geodesic() -> Certificate:
    errs = geodesic_errors()
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(12 <= r <= 20 for r in ratios)
    return Certificate("geodesic_convergence", ok, "ratios " + ", ".join(f"{r:.2f}" for r in ratios))


CERTIFICATES: dict[str, Callable[[], Certificate]] = {
    "case6": cert_case6,
    "family_dimension": cert_family_dimension,
    "sigma_criterion": cert_sigma,
    "curvature": cert_curvature,
    "group_action": cert_group,
    "holonomy": cert_holonomy,
    "cross_models": cert_cross_models,
    "submersions": cert_submersions,
    "geodesic_convergence": cert_geodesic,
}


def run(names=None) -> list[Certificate]:
    """Run the named certificates (all by default) in a fixed order.

    An exception inside a certificate counts as a failure of that certificate.
    """
    names = list(CERTIFICATES) if names is None else list(names)
    out = []
    for name in names:
        try:
            out.append(CERTIFICATES[name]())
        except Exception as exc:  # noqa: BLE001 - reported as a failed certificate
            out.append(Certificate(name, False, f"{type(exc).__name__}: {exc}"))
    return out
