"""Commuting holonomy pairs in G = H x| K and the Killing fields they preserve.

Given two commuting elements (the images of the generators of Z^2), the
classifier normalizes them by a K-conjugation and a swap of generators,
then either produces two commuting Killing fields invariant under both,
or names the obstruction to a compact quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .connection import pullback_residual, sample_grid
from .family import FamilyParams, KillingField, Regime, make_connection, normalize_delta, vector_field_bracket
from .group import (
    GROUP_TOL,
    GroupElement,
    adjoint,
    canonical_q,
    commutes,
    conjugate_by_k,
    flow_map,
    one_minus_psi,
)

COMMUTING = "CommutingFields"
OBSTRUCTED_Y = "ObstructedSubmersionY"
OBSTRUCTED_NEG = "ObstructedDeltaNegative"
NOT_COMMUTING = "NotCommuting"

FLOW_EPS = 1e-3
FLOW_TOL = 1e-5
BRACKET_TOL = 1e-8


@dataclass(frozen=True)
class DegeneracyCurve:
    """Zero set of coef_x * x + k . (h1(y), h2(y)): where two fields of the
    form (sigma x + w(y)) d_x + tau d_y are linearly dependent."""

    coef_x: float
    k: tuple
    regime: Regime

    def __call__(self, x: float, y: float) -> float:
        return self.coef_x * x + float(np.dot(self.k, self.regime.z(y)))

    def x_of_y(self, y: float) -> float:
        return -float(np.dot(self.k, self.regime.z(y))) / self.coef_x

    def __str__(self):
        z1, z2 = self.regime.z_exprs()
        rhs = " + ".join(
            f"{-v:.17g}*{z}" for v, z in zip(self.k, (z1, z2)) if abs(v) > GROUP_TOL
        ) or "0"
        return f"{self.coef_x:.17g}*x = {rhs}"


def degeneracy_curve(f1: KillingField, f2: KillingField, tol: float = GROUP_TOL) -> DegeneracyCurve | None:
    """Locus where f1, f2 are dependent, or None when they are independent everywhere."""
    coef_x = float(f1.sigma) * float(f2.tau) - float(f2.sigma) * float(f1.tau)
    k = tuple(float(f2.tau) * float(a) - float(f1.tau) * float(b) for a, b in zip(f1.w, f2.w))
    curve = DegeneracyCurve(coef_x, k, f1.regime)
    if abs(coef_x) > tol:
        return curve
    k1, k2 = k
    kind = f1.regime.kind
    if abs(k1) <= tol and abs(k2) <= tol:
        return curve  # dependent everywhere
    if kind == "RealDistinct" and k1 * k2 < 0:
        return curve
    if kind == "RealDouble" and abs(k2) > tol:
        return curve
    if kind == "ComplexPair":
        return curve
    return None


@dataclass
class HolonomyVerdict:
    outcome: str
    branch: str
    fields: tuple = ()
    normalized_fields: tuple = ()
    degeneracy: DegeneracyCurve | None = None
    c: float | None = None
    conjugator: tuple = (0.0, 0.0)
    swapped_generators: bool = False
    swapped_roots: bool = False
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "branch": self.branch,
            "fields": [f.expr() for f in self.fields],
            "normalized_fields": [f.expr() for f in self.normalized_fields],
            "degeneracy_curve": str(self.degeneracy) if self.degeneracy else None,
            "c": self.c,
            "conjugator": list(self.conjugator),
            "swapped_generators": self.swapped_generators,
            "swapped_roots": self.swapped_roots,
            "notes": list(self.notes),
        }


def _invertible(g: GroupElement, tol: float = GROUP_TOL) -> bool:
    return bool(np.min(np.linalg.svd(one_minus_psi(g.h, g.regime), compute_uv=False)) > tol)


def _h_conjugator(g1: GroupElement, g2: GroupElement, tol: float):
    """q putting both elements in H: canonical_q of an element with
    1 - Psi_h invertible, or q = 0 when both already lie in H."""
    for g in (g1, g2):
        if _invertible(g, tol):
            return canonical_q(g)
    if all(max(abs(v) for v in g.k) <= tol for g in (g1, g2)):
        return np.zeros(2)
    return None


def _field(regime, sigma=0.0, tau=0.0, w=(0.0, 0.0)) -> KillingField:
    return KillingField(sigma, tau, tuple(w), regime)


def _undo_conjugation(q, fields):
    back = GroupElement((0.0, 0.0), tuple(-np.asarray(q, dtype=float)), fields[0].regime)
    return tuple(adjoint(back, f) for f in fields)


def classify_holonomy(p: FamilyParams, g1: GroupElement, g2: GroupElement, tol: float = GROUP_TOL) -> HolonomyVerdict:
    regime = Regime.of(p)
    for g in (g1, g2):
        if not g.regime.same_group(regime):
            raise ValueError("group elements do not belong to the group of these parameters")
    if not commutes(g1, g2, tol):
        return HolonomyVerdict(NOT_COMMUTING, "not-commuting")

    X = _field(regime, sigma=1.0)
    Y = _field(regime, tau=1.0)

    # both conjugate into H by a common (0, q)
    q = _h_conjugator(g1, g2, tol)
    if q is not None:
        normalized = (X, Y)
        fields = _undo_conjugation(q, normalized)
        return HolonomyVerdict(
            COMMUTING,
            "both-in-H",
            fields=fields,
            normalized_fields=normalized,
            degeneracy=degeneracy_curve(*fields),
            conjugator=tuple(float(v) for v in q),
            notes=["fields x d/dx and d/dy degenerate along {x = 0} in normalized coordinates"],
        )

    if abs(g1.h[1]) <= tol and abs(g2.h[1]) <= tol:
        return HolonomyVerdict(
            OBSTRUCTED_Y,
            "I_F0",
            notes=["holonomy preserves y, which would descend to a submersion of a compact surface onto R"],
        )

    swapped = False
    if abs(g1.h[1]) <= tol:
        g1, g2 = g2, g1
        swapped = True

    if regime.kind == "ComplexPair":
        a, b = regime.float_roots
        ms = [g.h[1] * b / (2 * math.pi) for g in (g1, g2)]
        return HolonomyVerdict(
            OBSTRUCTED_NEG,
            "delta<0",
            swapped_generators=swapped,
            notes=[
                f"h_i = (2 pi a m_i / b, 2 pi m_i / b) with m = {[round(m) for m in ms]}",
                "up to a finite cover, a closed leaf of the d/dx foliation would have trivial holonomy",
            ],
        )

    if regime.kind == "RealDouble":
        (a,) = regime.float_roots
        s1, t1 = g1.h
        c = g1.k[1] / t1
        normalized = (_field(regime, w=(1.0, 0.0)), _field(regime, sigma=a, tau=1.0, w=(0.0, c)))
        return HolonomyVerdict(
            COMMUTING,
            "delta=0",
            fields=normalized,
            normalized_fields=normalized,
            degeneracy=degeneracy_curve(*normalized),
            c=c,
            swapped_generators=swapped,
        )

    # RealDistinct
    r1, r2 = regime.float_roots
    s1, t1 = g1.h
    swap_roots = False
    if abs(s1 - r1 * t1) > tol:
        if abs(s1 - r2 * t1) > tol:
            raise ArithmeticError("1 - Psi_h is singular but h is on neither root line")
        r1, r2 = r2, r1
        swap_roots = True
    perm = (lambda v: (v[1], v[0])) if swap_roots else (lambda v: tuple(v))
    # kill the second local K-coordinate of g1
    v1 = perm(g1.k)[1]
    q_local = (0.0, -v1 / (1.0 - math.exp((r1 - r2) * t1)))
    q = perm(q_local)
    n1, n2 = conjugate_by_k(q, g1), conjugate_by_k(q, g2)
    u2, v2 = perm(n2.k)
    s2, t2 = n2.h
    z1 = perm((1.0, 0.0))  # regime coordinates of Z_{r1}
    W1 = _field(regime, sigma=r1, tau=1.0)
    if abs(s2 - r1 * t2) <= tol or abs(t2) <= tol:
        normalized = (W1, _field(regime, w=z1))
        branch, c = "delta>0 subcase 1", None
    else:
        c = u2 * (r1 - r2) / (1.0 - math.exp((r2 - r1) * t2))
        normalized = (W1, _field(regime, sigma=r2, tau=1.0, w=(c * z1[0], c * z1[1])))
        branch = "delta>0 subcase 2"
    fields = _undo_conjugation(q, normalized)
    return HolonomyVerdict(
        COMMUTING,
        branch,
        fields=fields,
        normalized_fields=normalized,
        degeneracy=degeneracy_curve(*fields),
        c=c,
        conjugator=tuple(q),
        swapped_generators=swapped,
        swapped_roots=swap_roots,
    )


# ---------------------------------------------------------------------------
# checks on a verdict


def killing_flow_residual(p: FamilyParams, f: KillingField, eps: float = FLOW_EPS, samples=None) -> float:
    samples = sample_grid(-1.0, 1.0, 4) if samples is None else samples
    conn = make_connection(normalize_delta(p)[0])
    return pullback_residual(conn, flow_map(f, eps), samples)


def commutator_residual(f1: KillingField, f2: KillingField, samples=None) -> float:
    samples = sample_grid(-1.0, 1.0, 4) if samples is None else samples
    return max(float(np.max(np.abs(vector_field_bracket(f1, f2, x, y)))) for x, y in samples)


def invariance_residual(g: GroupElement, f: KillingField) -> float:
    a = adjoint(g, f)
    return float(
        max(abs(a.sigma - f.sigma), abs(a.tau - f.tau), abs(a.w[0] - f.w[0]), abs(a.w[1] - f.w[1]))
    )


def check_verdict(p: FamilyParams, verdict: HolonomyVerdict, g1=None, g2=None) -> dict:
    """Residuals certifying a CommutingFields verdict."""
    if verdict.outcome != COMMUTING:
        return {}
    f1, f2 = verdict.fields
    out = {
        "flow_residual": max(killing_flow_residual(p, f1), killing_flow_residual(p, f2)),
        "commutator": commutator_residual(f1, f2),
    }
    if g1 is not None and g2 is not None:
        out["invariance"] = max(invariance_residual(g, f) for g in (g1, g2) for f in (f1, f2))
    out["passed"] = out["flow_residual"] < FLOW_TOL and out["commutator"] < BRACKET_TOL
    return out
