"""Affine connections on a 2-dimensional chart.

A connection is stored through eight coefficient functions::

    nabla_x d_x = A d_x + B d_y
    nabla_x d_y = (C + U/2) d_x + (D + V/2) d_y
    nabla_y d_x = (C - U/2) d_x + (D - V/2) d_y
    nabla_y d_y = E d_x + F d_y

so that (A, ..., F) is the symmetric part and (U, V) the torsion.
Christoffel symbols are indexed ``G[k][i][j]`` with ``nabla_i d_j = G[k][i][j] d_k``
and indices 0 = x, 1 = y.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from .algebra import ONE, ZERO, AlgebraError, ParseError, PoleError, RationalFunction2, parse_rf

COEFFS = ("A", "B", "C", "D", "E", "F", "U", "V")
HALF = ONE / 2


@dataclass(frozen=True)
class Connection2D:
    A: RationalFunction2 = ZERO
    B: RationalFunction2 = ZERO
    C: RationalFunction2 = ZERO
    D: RationalFunction2 = ZERO
    E: RationalFunction2 = ZERO
    F: RationalFunction2 = ZERO
    U: RationalFunction2 = ZERO
    V: RationalFunction2 = ZERO

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, RationalFunction2):
                object.__setattr__(self, f.name, RationalFunction2(v))

    @classmethod
    def from_strings(cls, spec: dict) -> "Connection2D":
        """Build from a mapping of coefficient names to grammar strings.

        Missing coefficients default to zero; unknown keys are rejected.
        """
        unknown = set(spec) - set(COEFFS)
        if unknown:
            raise ValueError(f"unknown connection coefficients: {sorted(unknown)}")
        out = {}
        for k, v in spec.items():
            try:
                out[k] = parse_rf(str(v))
            except ParseError as exc:
                raise ParseError(f"coefficient {k}: {exc}") from None
        return cls(**out)

    def to_strings(self) -> dict[str, str]:
        return {k: str(getattr(self, k)) for k in COEFFS}

    def coefficients(self) -> tuple[RationalFunction2, ...]:
        return tuple(getattr(self, k) for k in COEFFS)

    def symmetric_part(self) -> "Connection2D":
        return Connection2D(self.A, self.B, self.C, self.D, self.E, self.F)

    def check_point(self, x, y) -> None:
        """Raise PoleError if some coefficient has a pole at the rational point (x, y)."""
        for name in COEFFS:
            try:
                getattr(self, name)(x, y)
            except PoleError as exc:
                raise PoleError(f"coefficient {name}: {exc}") from None


@dataclass(frozen=True)
class Christoffel:
    """``G[k][i][j]``: component along d_k of nabla_{d_i} d_j."""

    G: tuple

    def __getitem__(self, idx):
        k, i, j = idx
        return self.G[k][i][j]


@dataclass(frozen=True)
class TensorReport:
    torsion: tuple[RationalFunction2, RationalFunction2]
    R_dx: tuple[RationalFunction2, RationalFunction2]  # R(d_x, d_y) d_x
    R_dy: tuple[RationalFunction2, RationalFunction2]  # R(d_x, d_y) d_y

    @property
    def flat(self) -> bool:
        return all(c.is_zero() for c in (*self.R_dx, *self.R_dy))

    @property
    def torsion_free(self) -> bool:
        return all(c.is_zero() for c in self.torsion)


def to_christoffel(c: Connection2D) -> Christoffel:
    G = (
        ((c.A, c.C + c.U * HALF), (c.C - c.U * HALF, c.E)),
        ((c.B, c.D + c.V * HALF), (c.D - c.V * HALF, c.F)),
    )
    return Christoffel(G)


def from_christoffel(ch: Christoffel) -> Connection2D:
    G = ch.G
    return Connection2D(
        A=G[0][0][0],
        B=G[1][0][0],
        C=(G[0][0][1] + G[0][1][0]) * HALF,
        D=(G[1][0][1] + G[1][1][0]) * HALF,
        E=G[0][1][1],
        F=G[1][1][1],
        U=G[0][0][1] - G[0][1][0],
        V=G[1][0][1] - G[1][1][0],
    )


def torsion(c: Connection2D) -> tuple[RationalFunction2, RationalFunction2]:
    """Components of T(d_x, d_y)."""
    return (c.U, c.V)


def _riemann(G, i: int, j: int, l: int) -> tuple[RationalFunction2, RationalFunction2]:
    var = "xy"
    out = []
    for m in range(2):
        r = G[m][j][l].diff(var[i]) - G[m][i][l].diff(var[j])
        for k in range(2):
            r = r + G[k][j][l] * G[m][i][k] - G[k][i][l] * G[m][j][k]
        out.append(r)
    return tuple(out)


def curvature(c: Connection2D) -> TensorReport:
    """Torsion and R(d_x, d_y) on both coordinate fields, with
    R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X, Y]."""
    G = to_christoffel(c).G
    return TensorReport(torsion=torsion(c), R_dx=_riemann(G, 0, 1, 0), R_dy=_riemann(G, 0, 1, 1))


def is_flat(c: Connection2D) -> bool:
    return curvature(c).flat


def is_torsion_free(c: Connection2D) -> bool:
    return c.U.is_zero() and c.V.is_zero()


# ---------------------------------------------------------------------------
# numeric layer


def christoffel_at(c: Connection2D, x: float, y: float) -> np.ndarray:
    """Float array G[k, i, j] at (x, y)."""
    A, B, C, D, E, F, U, V = (f.evalf(x, y) for f in c.coefficients())
    return np.array(
        [
            [[A, C + U / 2], [C - U / 2, E]],
            [[B, D + V / 2], [D - V / 2, F]],
        ]
    )


@dataclass(frozen=True)
class NumericMap:
    """A smooth map of the plane given with its analytic Jacobian."""

    forward: Callable[[float, float], tuple[float, float]]
    jacobian: Callable[[float, float], np.ndarray]
    tag: str = ""

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self.forward(x, y)

    def jacobian_error(self, x: float, y: float, h: float = 1e-6) -> float:
        """Relative deviation of the Jacobian from central differences of forward."""
        J = np.asarray(self.jacobian(x, y), dtype=float)
        fd = np.empty((2, 2))
        for i, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            p = np.array(self.forward(x + dx, y + dy))
            q = np.array(self.forward(x - dx, y - dy))
            fd[:, i] = (p - q) / (2 * h)
        return float(np.max(np.abs(fd - J)) / max(1.0, np.max(np.abs(J))))


def identity_map() -> NumericMap:
    return NumericMap(lambda x, y: (x, y), lambda x, y: np.eye(2), "identity")


def translation_map(dx: float, dy: float) -> NumericMap:
    return NumericMap(lambda x, y: (x + dx, y + dy), lambda x, y: np.eye(2), f"translate({dx},{dy})")


def pullback_residual(
    c: Connection2D,
    m: NumericMap,
    samples: Sequence[tuple[float, float]],
    h: float = 1e-6,
    reference: Connection2D | None = None,
) -> float:
    """Max |Christoffel(m^* c) - Christoffel(reference)| over the sample points.

    ``reference`` defaults to ``c``, so a small value means ``m`` is an
    isometry of ``c``.  Second derivatives of ``m`` are central differences
    of its Jacobian.
    """
    reference = c if reference is None else reference
    worst = 0.0
    for x, y in samples:
        J = np.asarray(m.jacobian(x, y), dtype=float)
        det = np.linalg.det(J)
        if abs(det) < 1e-12:
            raise AlgebraError(f"singular Jacobian of {m.tag or 'map'} at ({x}, {y})")
        Jinv = np.linalg.inv(J)
        # d2[m, i, j] = d_i d_j m^m
        d2 = np.empty((2, 2, 2))
        for i, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            Jp = np.asarray(m.jacobian(x + dx, y + dy), dtype=float)
            Jm = np.asarray(m.jacobian(x - dx, y - dy), dtype=float)
            d2[:, i, :] = (Jp - Jm) / (2 * h)
        fx, fy = m.forward(x, y)
        Gt = christoffel_at(c, fx, fy)
        inner = d2 + np.einsum("mab,ai,bj->mij", Gt, J, J)
        pulled = np.einsum("km,mij->kij", Jinv, inner)
        worst = max(worst, float(np.max(np.abs(pulled - christoffel_at(reference, x, y)))))
    return worst


def sample_grid(lo: float, hi: float, n: int) -> list[tuple[float, float]]:
    pts = np.linspace(lo, hi, n)
    return [(float(a), float(b)) for a in pts for b in pts]


def geodesic(
    c: Connection2D,
    p0: Sequence[float],
    v0: Sequence[float],
    T: float,
    n: int,
) -> list[tuple[float, float, float, float, float]]:
    """Fixed-step classical RK4 for x''^k + G^k_(ij) x'^i x'^j = 0.

    Only the symmetric part of the connection enters, so torsion never
    changes the trajectory.  Returns ``n + 1`` rows ``(t, x, y, vx, vy)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    A, B, C, D, E, F = (f.evalf for f in c.coefficients()[:6])
    step = 0

    def rhs(s):
        x, y, vx, vy = s
        try:
            a, b, cc, d, e, f = A(x, y), B(x, y), C(x, y), D(x, y), E(x, y), F(x, y)
        except PoleError as exc:
            raise PoleError(f"step {step}: {exc}") from None
        return np.array([
            vx,
            vy,
            -(a * vx * vx + 2 * cc * vx * vy + e * vy * vy),
            -(b * vx * vx + 2 * d * vx * vy + f * vy * vy),
        ])

    h = float(T) / n
    s = np.array([p0[0], p0[1], v0[0], v0[1]], dtype=float)
    out = [(0.0, *map(float, s))]
    for step in range(1, n + 1):
        k1 = rhs(s)
        k2 = rhs(s + h / 2 * k1)
        k3 = rhs(s + h / 2 * k2)
        k4 = rhs(s + h * k3)
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise PoleError(f"step {step}: trajectory left the domain (non-finite state)")
        out.append((step * h, *map(float, s)))
    return out
