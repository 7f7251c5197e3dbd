"""Killing fields of a 2D affine connection by jet prolongation.

A Killing field ``a d_x + b d_y`` is determined by its 1-jet
``(a, b, a_x, a_y, b_x, b_y)`` at a point: the Killing equations give
every second derivative as a linear combination of the 1-jet.  Those
relations, their integrability conditions and the torsion-preservation
pair are differentiated and evaluated at the base point, producing exact
linear constraints on the 6-dimensional jet space.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    ONE,
    ZERO,
    AlgebraError,
    PolyS,
    RationalFunction2,
    as_fraction,
    det_polyS,
    nullspace,
    rank,
    rref,
    signature,
    solve_in_span,
)
from .connection import COEFFS, Connection2D, is_flat, is_torsion_free

JET = ("a", "b", "a_x", "a_y", "b_x", "b_y")
SECOND = ("a_xx", "b_xx", "a_xy", "b_xy", "a_yy", "b_yy")
N = 6

KillingJet = tuple  # six Fractions, ordered as JET


class CertificateError(AssertionError):
    pass


def killing_residuals(K: dict, dK: dict, j: Sequence, j2: Sequence) -> tuple:
    """Right-hand sides of the eight Killing equations.

    ``K`` maps coefficient names to values, ``dK`` to (d/dx, d/dy) pairs,
    ``j`` is the 1-jet, ``j2`` the second derivatives ordered as SECOND.
    Works over any ring whose elements support + and *.
    """
    A, B, C, D, E, F, U, V = (K[k] for k in COEFFS)
    a, b, ax, ay, bx, by = j
    axx, bxx, axy, bxy, ayy, byy = j2

    def lie(name):
        dx, dy = dK[name]
        return dx * a + dy * b

    return (
        axx + A * ax - B * ay + 2 * C * bx + lie("A"),
        bxx + 2 * B * ax + (2 * D - A) * bx - B * by + lie("B"),
        axy + (A - D) * ay + E * bx + C * by + lie("C"),
        bxy + D * ax + B * ay + (F - C) * bx + lie("D"),
        ayy - E * ax + (2 * C - F) * ay + 2 * E * by + lie("E"),
        byy + 2 * D * ay - E * bx + F * by + lie("F"),
        lie("U") - ay * V + by * U,
        lie("V") + ax * V - bx * U,
    )


@dataclass(frozen=True)
class KillingSystem:
    """``second[name]`` expresses that second derivative as a 6-vector of
    coefficients on the 1-jet; ``constraints`` are linear forms that vanish."""

    second: dict
    constraints: tuple

    def rhs(self, name: str) -> tuple:
        return self.second[name]


def assemble(c: Connection2D) -> KillingSystem:
    K = {k: getattr(c, k) for k in COEFFS}
    dK = {k: (v.diff("x"), v.diff("y")) for k, v in K.items()}
    zero2 = (ZERO,) * N
    columns = []
    for i in range(N):
        unit = tuple(ONE if k == i else ZERO for k in range(N))
        columns.append(killing_residuals(K, dK, unit, zero2))
    # row r of the residual is  second_r + sum_i columns[i][r] * jet_i
    second = {name: tuple(-columns[i][r] for i in range(N)) for r, name in enumerate(SECOND)}
    constraints = tuple(tuple(columns[i][r] for i in range(N)) for r in (6, 7))
    return KillingSystem(second=second, constraints=constraints)


# ---------------------------------------------------------------------------
# total derivatives on linear forms in the 1-jet

_DX_TARGET = ("a_x", "b_x", "a_xx", "a_xy", "b_xx", "b_xy")
_DY_TARGET = ("a_y", "b_y", "a_xy", "a_yy", "b_xy", "b_yy")


def _unit(name: str) -> tuple:
    return tuple(ONE if k == name else ZERO for k in JET)


def _target(system: KillingSystem, name: str) -> tuple:
    return _unit(name) if name in JET else system.second[name]


def _sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def total_derivative(system: KillingSystem, expr: Sequence, var: str) -> tuple:
    """D_var of sum_i expr_i * jet_i, reduced to a form in the 1-jet."""
    targets = _DX_TARGET if var == "x" else _DY_TARGET
    out = [e.diff(var) for e in expr]
    for i, e in enumerate(expr):
        if e.is_zero():
            continue
        t = _target(system, targets[i])
        for k in range(N):
            if not t[k].is_zero():
                out[k] = out[k] + e * t[k]
    return tuple(out)


def integrability_conditions(system: KillingSystem) -> tuple:
    """Mixed third derivatives computed two ways must agree."""
    D = functools.partial(total_derivative, system)
    s = system.second
    return (
        _sub(D(s["a_xx"], "y"), D(s["a_xy"], "x")),
        _sub(D(s["a_yy"], "x"), D(s["a_xy"], "y")),
        _sub(D(s["b_xx"], "y"), D(s["b_xy"], "x")),
        _sub(D(s["b_yy"], "x"), D(s["b_xy"], "y")),
    )


def _eval_row(expr, p) -> list[Fraction]:
    return [e(*p) for e in expr]


@dataclass(frozen=True)
class Prolongation:
    basis: list
    stabilized: bool
    ranks: list
    rows: list = field(repr=False)
    second_at_p: list = field(repr=False)


@functools.lru_cache(maxsize=256)
def _prolong(c: Connection2D, p: tuple, max_order: int) -> Prolongation:
    c.check_point(*p)
    system = assemble(c)
    base = [e for e in (*system.constraints, *integrability_conditions(system)) if any(not v.is_zero() for v in e)]
    rows: list[list[Fraction]] = []
    ranks: list[int] = []
    # level[b][i] = D_x^i D_y^(k-i) base[b]
    level = [[e] for e in base]
    stabilized = False
    for order in range(max_order + 1):
        if order > 0:
            nxt = []
            for derivs in level:
                new = [total_derivative(system, d, "y") for d in derivs]
                new.append(total_derivative(system, derivs[-1], "x"))
                nxt.append(new)
            level = nxt
        for derivs in level:
            for d in derivs:
                row = _eval_row(d, p)
                if any(row):
                    rows.append(row)
        ranks.append(rank(rows, N) if rows else 0)
        if ranks[-1] == N or (len(ranks) >= 3 and ranks[-1] == ranks[-2] == ranks[-3]):
            stabilized = True
            break
    basis = [tuple(v) for v in nullspace(rows, N)] if rows else [
        tuple(Fraction(int(i == k)) for i in range(N)) for k in range(N)
    ]
    second_at_p = [_eval_row(system.second[name], p) for name in SECOND]
    return Prolongation(basis, stabilized, ranks, rows, second_at_p)


def _point(p) -> tuple:
    return (as_fraction(p[0]), as_fraction(p[1]))


def prolong(c: Connection2D, p, max_order: int = 6) -> Prolongation:
    """Full prolongation record: basis, stabilization flag, rank per order."""
    return _prolong(c, _point(p), max_order)


def solve(c: Connection2D, p, max_order: int = 6) -> tuple[list, bool]:
    """Basis of the jet-solution space at ``p`` and whether ranks stabilized."""
    pr = prolong(c, p, max_order)
    return pr.basis, pr.stabilized


def second_derivatives(c: Connection2D, p, jet: Sequence) -> dict:
    pr = prolong(c, p)
    return {name: sum((r * as_fraction(v) for r, v in zip(row, jet)), Fraction(0))
            for name, row in zip(SECOND, pr.second_at_p)}


def _in_space(rows, jet) -> bool:
    return all(sum((r * as_fraction(v) for r, v in zip(row, jet)), Fraction(0)) == 0 for row in rows)


def bracket(j1: Sequence, j2: Sequence, c: Connection2D, p) -> tuple:
    """Jet at ``p`` of the vector-field bracket [X1, X2] = X1(X2) - X2(X1)."""
    pr = prolong(c, p)
    for j in (j1, j2):
        if not _in_space(pr.rows, j):
            raise AlgebraError(f"jet {tuple(map(str, j))} is not in the solved subspace")

    def parts(j):
        j = [as_fraction(v) for v in j]
        s = second_derivatives(c, p, j)
        v = (j[0], j[1])
        J = ((j[2], j[3]), (j[4], j[5]))  # J[k][i] = d_i X^k
        H = (
            ((s["a_xx"], s["a_xy"]), (s["a_xy"], s["a_yy"])),
            ((s["b_xx"], s["b_xy"]), (s["b_xy"], s["b_yy"])),
        )  # H[k][l][i] = d_l d_i X^k
        return v, J, H

    v1, J1, H1 = parts(j1)
    v2, J2, H2 = parts(j2)
    val = [sum(v1[i] * J2[k][i] - v2[i] * J1[k][i] for i in range(2)) for k in range(2)]
    der = [
        [
            sum(
                J1[i][l] * J2[k][i] + v1[i] * H2[k][l][i] - J2[i][l] * J1[k][i] - v2[i] * H1[k][l][i]
                for i in range(2)
            )
            for l in range(2)
        ]
        for k in range(2)
    ]
    return (val[0], val[1], der[0][0], der[0][1], der[1][0], der[1][1])


# ---------------------------------------------------------------------------
# algebra classification


@dataclass
class AlgebraReport:
    dim: int
    basis: list
    structure: list  # structure[i][j][k] = c^k_ij with [e_i, e_j] = sum_k c^k_ij e_k
    label: str
    homogeneous_at_point: bool
    point: tuple = (Fraction(0), Fraction(0))
    stabilized: bool = True
    ranks: list = field(default_factory=list)
    flat: bool | None = None
    torsion_free: bool | None = None
    killing_form_signature: tuple | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "dim": self.dim,
            "point": [str(v) for v in self.point],
            "homogeneous_at_point": self.homogeneous_at_point,
            "stabilized": self.stabilized,
            "ranks": list(self.ranks),
            "flat": self.flat,
            "torsion_free": self.torsion_free,
            "killing_form_signature": list(self.killing_form_signature) if self.killing_form_signature else None,
            "jet_order": list(JET),
            "basis": [[str(v) for v in j] for j in self.basis],
            "structure_constants": [
                {"i": i, "j": j, "k": k, "value": str(self.structure[i][j][k])}
                for i in range(self.dim)
                for j in range(self.dim)
                for k in range(self.dim)
                if self.structure[i][j][k] != 0
            ],
            "notes": list(self.notes),
        }


def structure_constants(basis: Sequence, c: Connection2D, p) -> list:
    d = len(basis)
    C = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            br = bracket(basis[i], basis[j], c, p)
            coeffs = solve_in_span(basis, br)
            if coeffs is None:
                raise AlgebraError(f"bracket of basis jets {i}, {j} leaves the span")
            for k in range(d):
                C[i][j][k] = coeffs[k]
                C[j][i][k] = -coeffs[k]
    return C


def check_lie_algebra(C: list) -> None:
    d = len(C)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if C[i][j][k] != -C[j][i][k]:
                    raise AlgebraError("structure constants are not antisymmetric")
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for m in range(d):
                    # [[e_i, e_j], e_k] + cyclic, component m
                    s = sum(
                        C[i][j][l] * C[l][k][m] + C[j][k][l] * C[l][i][m] + C[k][i][l] * C[l][j][m]
                        for l in range(d)
                    )
                    if s != 0:
                        raise AlgebraError("Jacobi identity fails")


def killing_form(C: list) -> list:
    d = len(C)
    return [
        [sum(C[i][l][k] * C[j][k][l] for k in range(d) for l in range(d)) for j in range(d)]
        for i in range(d)
    ]


def _derived(C: list) -> list:
    """Basis (coordinate vectors) of the derived algebra [g, g]."""
    d = len(C)
    vecs = [C[i][j] for i in range(d) for j in range(i + 1, d) if any(C[i][j])]
    return rref(vecs, d)[0] if vecs else []


def _bracket_vec(C, u, v):
    d = len(C)
    return [sum(u[i] * v[j] * C[i][j][k] for i in range(d) for j in range(d)) for k in range(d)]


def is_homogeneous(basis: Sequence, p=None) -> bool:
    """Values of the solved jets span the tangent plane at the base point."""
    return bool(basis) and rank([[j[0], j[1]] for j in basis], 2) == 2


def classify_algebra(basis: Sequence, c: Connection2D, p) -> AlgebraReport:
    p = _point(p)
    d = len(basis)
    C = structure_constants(basis, c, p)
    check_lie_algebra(C)
    flat, tfree = is_flat(c), is_torsion_free(c)
    sig = None
    notes = []
    if d == 6 and flat and tfree:
        label = "FlatTorsionFree"
    elif d == 4:
        der = _derived(C)
        abelian = all(not any(_bracket_vec(C, u, v)) for u in der for v in der)
        label = "Dim4Case" if len(der) == 2 and abelian else "Other(4)"
        if label == "Other(4)":
            notes.append(f"derived algebra has dimension {len(der)}, abelian={abelian}")
    elif d == 3:
        sig = signature(killing_form(C))
        pos, neg, zero = sig
        if zero:
            label = "Other(3)"
        elif neg == 3:
            label = "SO3"
        else:
            label = "SL2"
    elif d == 2:
        label = "Abelian2" if not any(C[0][1]) else "Affine2"
    elif d <= 1:
        label = f"LowRank({d})"
    else:
        label = f"Other({d})"
    return AlgebraReport(
        dim=d,
        basis=list(basis),
        structure=C,
        label=label,
        homogeneous_at_point=is_homogeneous(basis, p),
        point=p,
        flat=flat,
        torsion_free=tfree,
        killing_form_signature=sig,
        notes=notes,
    )


def classify_connection(c: Connection2D, p, max_order: int = 6) -> AlgebraReport:
    pr = prolong(c, p, max_order)
    report = classify_algebra(pr.basis, c, p)
    report.stabilized = pr.stabilized
    report.ranks = list(pr.ranks)
    report.notes.append("dimension is the jet-solution dimension at the base point")
    if not report.homogeneous_at_point:
        report.notes.append("not locally homogeneous at the base point: the jet dimension may exceed the local Killing dimension")
    if not pr.stabilized:
        report.notes.append(f"constraint rank did not stabilize by order {max_order}")
    return report


# ---------------------------------------------------------------------------
# rotation-invariant constant connections


def case6_target() -> PolyS:
    s = PolyS.s()
    return (s * s + 9) * (s * s + 1) ** 3


def case6_matrix() -> list:
    """8x8 system over Q[s]: d_x, d_y and (s x + y) d_x + (s y - x) d_y are
    Killing for a connection with constant coefficients (A, ..., V)."""
    s = PolyS.s()
    zero = PolyS()
    jet = (zero, zero, s, PolyS((1,)), PolyS((-1,)), s)  # a, b, a_x, a_y, b_x, b_y
    second = (zero,) * N
    dK = {k: (zero, zero) for k in COEFFS}
    cols = []
    for m in COEFFS:
        K = {k: PolyS((int(k == m),)) for k in COEFFS}
        cols.append([PolyS._coerce(r) for r in killing_residuals(K, dK, jet, second)])
    return [[cols[m][r] for m in range(len(COEFFS))] for r in range(len(COEFFS))]


def verify_case6(target: PolyS | None = None) -> PolyS:
    """Determinant of the case-6 system; raises CertificateError unless it
    is a nonzero rational multiple of ``target``."""
    target = case6_target() if target is None else target
    det = det_polyS(case6_matrix())
    if det.is_zero():
        raise CertificateError("case-6 determinant vanishes identically")
    q, r = divmod(det, target)
    if not r.is_zero() or q.degree != 0:
        raise CertificateError(f"case-6 determinant {det} is not a multiple of {target}")
    return det


def case6_solutions(s_value) -> list:
    """Kernel of the case-6 system at a rational value of s."""
    M = [[entry(as_fraction(s_value)) for entry in row] for row in case6_matrix()]
    return nullspace(M, len(COEFFS))
