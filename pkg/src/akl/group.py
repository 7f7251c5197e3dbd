"""The isometry group G = H x| K of a family connection and its action.

H = R^2 acts by (s, t).(x, y) = (x e^s, y + t); K = R^2 acts by
(u, v).(x, y) = (x + u h1(y) + v h2(y), y) where (h1, h2) is the regime
basis of solutions of h'' + alpha h' + beta h = 0.  The element (h, k)
acts first by h, then by k, and

    (h1, k1) . (h2, k2) = (h1 + h2, Psi_{h1}(k2) + k1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .connection import NumericMap, pullback_residual, sample_grid
from .family import FamilyParams, KillingField, Regime, make_connection

GROUP_TOL = 1e-9


class RegimeMismatch(ValueError):
    pass


def psi(h, regime: Regime) -> np.ndarray:
    """Psi_h as a 2x2 matrix on K in the (Z1, Z2) basis."""
    s, t = float(h[0]), float(h[1])
    if regime.kind == "RealDistinct":
        a1, a2 = regime.float_roots
        return np.array([[math.exp(s - a1 * t), 0.0], [0.0, math.exp(s - a2 * t)]])
    if regime.kind == "ComplexPair":
        a, b = regime.float_roots
        e = math.exp(s - a * t)
        c, sn = math.cos(b * t), math.sin(b * t)
        return np.array([[e * c, -e * sn], [e * sn, e * c]])
    (a,) = regime.float_roots
    e = math.exp(s - a * t)
    return np.array([[e, -t * e], [0.0, e]])


@dataclass(frozen=True)
class GroupElement:
    h: tuple
    k: tuple
    regime: Regime

    def __post_init__(self):
        object.__setattr__(self, "h", (float(self.h[0]), float(self.h[1])))
        object.__setattr__(self, "k", (float(self.k[0]), float(self.k[1])))

    @classmethod
    def identity(cls, regime: Regime) -> "GroupElement":
        return cls((0.0, 0.0), (0.0, 0.0), regime)

    @classmethod
    def from_flat(cls, values, regime: Regime) -> "GroupElement":
        s, t, u, v = (float(x) for x in values)
        return cls((s, t), (u, v), regime)

    def flat(self) -> np.ndarray:
        return np.array([*self.h, *self.k])

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def distance(self, other: "GroupElement") -> float:
        return float(np.max(np.abs(self.flat() - other.flat())))


def _check(g1: GroupElement, g2: GroupElement) -> None:
    if not g1.regime.same_group(g2.regime):
        raise RegimeMismatch("group elements belong to different (alpha, beta)")


def multiply(g1: GroupElement, g2: GroupElement) -> GroupElement:
    _check(g1, g2)
    h = (g1.h[0] + g2.h[0], g1.h[1] + g2.h[1])
    k = psi(g1.h, g1.regime) @ np.array(g2.k) + np.array(g1.k)
    return GroupElement(h, tuple(k), g1.regime)


def inverse(g: GroupElement) -> GroupElement:
    mh = (-g.h[0], -g.h[1])
    k = -psi(mh, g.regime) @ np.array(g.k)
    return GroupElement(mh, tuple(k), g.regime)


def act(g: GroupElement, pt) -> tuple[float, float]:
    x, y = float(pt[0]), float(pt[1])
    s, t = g.h
    y1 = y + t
    return (x * math.exp(s) + float(np.dot(g.k, g.regime.z(y1))), y1)


def act_jacobian(g: GroupElement, pt) -> np.ndarray:
    s, t = g.h
    y1 = float(pt[1]) + t
    return np.array([[math.exp(s), float(np.dot(g.k, g.regime.dz(y1)))], [0.0, 1.0]])


def as_map(g: GroupElement) -> NumericMap:
    return NumericMap(lambda x, y: act(g, (x, y)), lambda x, y: act_jacobian(g, (x, y)), f"act{g.flat().tolist()}")


def one_minus_psi(h, regime: Regime) -> np.ndarray:
    return np.eye(2) - psi(h, regime)


def commutes(g1: GroupElement, g2: GroupElement, tol: float = GROUP_TOL) -> bool:
    """(1 - Psi_{h1}) k2 == (1 - Psi_{h2}) k1."""
    _check(g1, g2)
    lhs = one_minus_psi(g1.h, g1.regime) @ np.array(g2.k)
    rhs = one_minus_psi(g2.h, g2.regime) @ np.array(g1.k)
    return bool(np.max(np.abs(lhs - rhs)) < tol)


def commutator_defect(g1: GroupElement, g2: GroupElement) -> float:
    return (g1 * g2).distance(g2 * g1)


def conjugate_by_k(q, g: GroupElement) -> GroupElement:
    """(0, q) g (0, -q) = (h, (1 - Psi_h) q + k)."""
    k = one_minus_psi(g.h, g.regime) @ np.asarray(q, dtype=float) + np.array(g.k)
    return GroupElement(g.h, tuple(k), g.regime)


def canonical_q(g: GroupElement) -> np.ndarray:
    """q with conjugate_by_k(q, g) having zero K-part; needs 1 - Psi_h invertible."""
    return -np.linalg.solve(one_minus_psi(g.h, g.regime), np.array(g.k))


# ---------------------------------------------------------------------------
# matrix model: block-diag(A(h), [[Psi_h, k], [0, 1]]) is a faithful homomorphism


def matrix_of(g: GroupElement) -> np.ndarray:
    m = np.eye(6)
    m[0, 2], m[1, 2] = g.h
    m[3:5, 3:5] = psi(g.h, g.regime)
    m[3:5, 5] = g.k
    return m


def from_matrix(m: np.ndarray, regime: Regime) -> GroupElement:
    return GroupElement((m[0, 2], m[1, 2]), (m[3, 5], m[4, 5]), regime)


def flow(field: KillingField, time: float) -> GroupElement:
    """Time-``time`` flow of a Killing field, as a group element."""
    return from_matrix(expm(time * field.algebra_matrix()), field.regime)


def flow_map(field: KillingField, time: float) -> NumericMap:
    return as_map(flow(field, time))


def adjoint(g: GroupElement, field: KillingField) -> KillingField:
    """Push-forward of a Killing field by the isometry act(g, .)."""
    m = matrix_of(g)
    a = m @ field.algebra_matrix() @ np.linalg.inv(m)
    return KillingField(a[0, 2], a[1, 2], (a[3, 5], a[4, 5]), field.regime)


# ---------------------------------------------------------------------------
# the extra isometry sigma


def sigma_map(p: FamilyParams) -> NumericMap:
    """sigma(x, y) = (-e^{alpha y} x, -y)."""
    al = float(p.alpha)

    def fwd(x, y):
        return (-math.exp(al * y) * x, -y)

    def jac(x, y):
        e = math.exp(al * y)
        return np.array([[-e, -al * e * x], [0.0, -1.0]])

    return NumericMap(fwd, jac, "sigma")


def kappa_map() -> NumericMap:
    """kappa(x, y) = (-x, y), an orientation-reversing isometry."""
    return NumericMap(lambda x, y: (-x, y), lambda x, y: np.array([[-1.0, 0.0], [0.0, 1.0]]), "kappa")


SIGMA_THRESHOLD = 1e-4


def sigma_residual(p: FamilyParams) -> float:
    return pullback_residual(make_connection(p), sigma_map(p), sample_grid(-1.0, 1.0, 5))


def sigma_test(p: FamilyParams) -> bool:
    """Whether sigma is an isometry of the family connection (5x5 sample grid).

    Inadmissible (flat, torsion-free) parameters are accepted too: the
    residual is still well defined, and the criterion alpha = 2 gamma,
    upsilon = 0 is only claimed for admissible ones.
    """
    return sigma_residual(p) < SIGMA_THRESHOLD
