"""The four-parameter family of connections with 4-dimensional Killing algebra.

    nabla_x d_x = 0,   nabla_x d_y = (gamma + upsilon) d_x,
    nabla_y d_x = (gamma - upsilon) d_x,
    nabla_y d_y = (beta x + delta) d_x + (2 gamma - alpha) d_y

Its Killing algebra is spanned by X = x d_x, Y = d_y and the fields
h(y) d_x with h'' + alpha h' + beta h = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import ONE, X, Y, ZERO, RationalFunction2, as_fraction
from .connection import Connection2D


class InadmissibleParams(ValueError):
    """Torsion and curvature vanish together: the connection is flat."""


@dataclass(frozen=True)
class FamilyParams:
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    gamma: Fraction = Fraction(0)
    upsilon: Fraction = Fraction(0)
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "upsilon", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))

    @classmethod
    def parse(cls, text: str) -> "FamilyParams":
        parts = [t.strip() for t in text.split(",")]
        if len(parts) not in (4, 5):
            raise ValueError("expected 4 or 5 comma-separated parameters")
        return cls(*(Fraction(t) for t in parts))

    def as_tuple(self) -> tuple:
        return (self.alpha, self.beta, self.gamma, self.upsilon, self.delta)

    @property
    def curvature_coefficient(self) -> Fraction:
        """beta + (gamma + upsilon)(gamma + upsilon - alpha)."""
        g = self.gamma + self.upsilon
        return self.beta + g * (g - self.alpha)

    @property
    def admissible(self) -> bool:
        return not (self.upsilon == 0 and self.curvature_coefficient == 0)

    @property
    def discriminant(self) -> Fraction:
        return self.alpha**2 - 4 * self.beta

    def __str__(self):
        return ",".join(str(v) for v in self.as_tuple())


def make_connection(p: FamilyParams) -> Connection2D:
    return Connection2D(
        C=RationalFunction2.const(p.gamma),
        E=p.beta * X + p.delta,
        F=RationalFunction2.const(2 * p.gamma - p.alpha),
        U=RationalFunction2.const(2 * p.upsilon),
    )


def normalize_delta(p: FamilyParams) -> tuple[FamilyParams, RationalFunction2]:
    """Return (params with delta = 0, q) where q(y) solves
    q'' + alpha q' + beta q + delta = 0.

    The map (x, y) -> (x + q(y), y) pulls the connection with ``delta``
    back to the one with delta = 0.
    """
    a, b, d = p.alpha, p.beta, p.delta
    if d == 0:
        q = ZERO
    elif b != 0:
        q = RationalFunction2.const(-d / b)
    elif a != 0:
        q = (-d / a) * Y
    else:
        q = (-d / 2) * Y * Y
    return FamilyParams(p.alpha, p.beta, p.gamma, p.upsilon, 0), q


def rescale(p: FamilyParams, mu) -> FamilyParams:
    """Parameters after the coordinate rescaling y -> mu y (delta scales like beta)."""
    mu = as_fraction(mu)
    if mu == 0:
        raise ValueError("rescaling factor must be nonzero")
    return FamilyParams(mu * p.alpha, mu**2 * p.beta, mu * p.gamma, mu * p.upsilon, mu**2 * p.delta)


def _exact_sqrt(q: Fraction):
    """Exact square root of a nonnegative Fraction, or None."""
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class Regime:
    """Root structure of P(xi) = xi^2 + alpha xi + beta.

    kind is "RealDistinct" (roots a1 > a2), "ComplexPair" (a +- i b, b > 0)
    or "RealDouble" (a).  Roots are Fractions when the discriminant is a
    rational square, floats otherwise.
    """

    alpha: Fraction
    beta: Fraction
    delta: Fraction
    kind: str
    roots: tuple
    exact: bool

    @classmethod
    def of(cls, p) -> "Regime":
        alpha, beta = (p.alpha, p.beta) if isinstance(p, FamilyParams) else map(as_fraction, p)
        D = alpha**2 - 4 * beta
        if D == 0:
            return cls(alpha, beta, D, "RealDouble", (-alpha / 2,), True)
        r = _exact_sqrt(abs(D))
        exact = r is not None
        if r is None:
            r = math.sqrt(abs(D))
            half_alpha = -float(alpha) / 2
        else:
            half_alpha = -alpha / 2
        if D > 0:
            return cls(alpha, beta, D, "RealDistinct", (half_alpha + r / 2, half_alpha - r / 2), exact)
        return cls(alpha, beta, D, "ComplexPair", (half_alpha, r / 2), exact)

    @property
    def float_roots(self) -> tuple:
        return tuple(float(r) for r in self.roots)

    def generator(self) -> np.ndarray:
        """L with Psi(s, t) = exp(s I - t L) on K in the (Z1, Z2) basis."""
        if self.kind == "RealDistinct":
            a1, a2 = self.float_roots
            return np.array([[a1, 0.0], [0.0, a2]])
        if self.kind == "ComplexPair":
            a, b = self.float_roots
            return np.array([[a, b], [-b, a]])
        (a,) = self.float_roots
        return np.array([[a, 1.0], [0.0, a]])

    def z(self, y: float) -> np.ndarray:
        """Coefficient functions (h1(y), h2(y)) of Z1, Z2."""
        if self.kind == "RealDistinct":
            a1, a2 = self.float_roots
            return np.array([math.exp(a1 * y), math.exp(a2 * y)])
        if self.kind == "ComplexPair":
            a, b = self.float_roots
            e = math.exp(a * y)
            return np.array([e * math.cos(b * y), e * math.sin(b * y)])
        (a,) = self.float_roots
        e = math.exp(a * y)
        return np.array([e, y * e])

    def dz(self, y: float) -> np.ndarray:
        if self.kind == "RealDistinct":
            a1, a2 = self.float_roots
            return np.array([a1 * math.exp(a1 * y), a2 * math.exp(a2 * y)])
        if self.kind == "ComplexPair":
            a, b = self.float_roots
            e = math.exp(a * y)
            c, s = math.cos(b * y), math.sin(b * y)
            return np.array([e * (a * c - b * s), e * (a * s + b * c)])
        (a,) = self.float_roots
        e = math.exp(a * y)
        return np.array([a * e, e * (1 + a * y)])

    def z_exprs(self) -> tuple[str, str]:
        def fmt(v):
            return str(v) if isinstance(v, Fraction) else repr(v)

        def lin(v):
            if v == 1:
                return "y"
            if v == -1:
                return "-y"
            return f"{fmt(v)}*y"

        def ex(v):
            return "1" if v == 0 else f"exp({lin(v)})"

        def times(a, b):
            return b if a == "1" else f"{a}*{b}"

        if self.kind == "RealDistinct":
            a1, a2 = self.roots
            return (ex(a1), ex(a2))
        if self.kind == "ComplexPair":
            a, b = self.roots
            return (times(ex(a), f"cos({lin(b)})"), times(ex(a), f"sin({lin(b)})"))
        (a,) = self.roots
        return (ex(a), times("y", ex(a)) if a != 0 else "y")

    def z_jets_at_origin(self) -> tuple[tuple, tuple]:
        """(h(0), h'(0)) for Z1 and Z2, exact when the roots are."""
        if self.kind == "RealDistinct":
            a1, a2 = self.roots
            return ((1, a1), (1, a2))
        if self.kind == "ComplexPair":
            a, b = self.roots
            return ((1, a), (0, b))
        (a,) = self.roots
        return ((1, a), (0, 1))

    def same_group(self, other: "Regime") -> bool:
        return (self.alpha, self.beta) == (other.alpha, other.beta)


@dataclass(frozen=True)
class KillingField:
    """sigma X + tau Y + w1 Z1 + w2 Z2 with X = x d_x, Y = d_y.

    As a vector field: (sigma x + w1 h1(y) + w2 h2(y)) d_x + tau d_y.
    """

    sigma: float
    tau: float
    w: tuple
    regime: Regime

    def value(self, x: float, y: float) -> np.ndarray:
        return np.array([float(self.sigma) * x + float(np.dot(self._w, self.regime.z(y))), float(self.tau)])

    def jacobian(self, x: float, y: float) -> np.ndarray:
        return np.array([[float(self.sigma), float(np.dot(self._w, self.regime.dz(y)))], [0.0, 0.0]])

    @property
    def _w(self) -> np.ndarray:
        return np.array([float(self.w[0]), float(self.w[1])])

    def algebra_matrix(self) -> np.ndarray:
        """Image in the 6x6 matrix algebra of the group (see group.matrix_of)."""
        m = np.zeros((6, 6))
        m[0, 2] = float(self.sigma)
        m[1, 2] = float(self.tau)
        m[3:5, 3:5] = float(self.sigma) * np.eye(2) - float(self.tau) * self.regime.generator()
        m[3:5, 5] = self._w
        return m

    def jet_at_origin(self) -> tuple:
        """(a, b, a_x, a_y, b_x, b_y) at (0, 0); exact for exact regimes and
        rational coefficients."""
        (h1, dh1), (h2, dh2) = self.regime.z_jets_at_origin()
        w1, w2 = self.w
        return (w1 * h1 + w2 * h2, self.tau, self.sigma, w1 * dh1 + w2 * dh2, 0, 0)

    def expr(self) -> str:
        """Closed form as a string over x, y, exp, cos, sin."""
        terms = []
        z1, z2 = self.regime.z_exprs()

        def coef(v, body):
            if v == 0:
                return None
            if v == 1:
                return body
            if v == -1:
                return f"-{body}"
            return f"{_fmt(v)}*{body}"

        for v, body in ((self.sigma, "x"), (self.w[0], z1), (self.w[1], z2)):
            t = coef(v, body)
            if t:
                terms.append(t)
        a = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"({a})*d/dx + ({_fmt(self.tau)})*d/dy"

    def __add__(self, other: "KillingField") -> "KillingField":
        return KillingField(
            self.sigma + other.sigma,
            self.tau + other.tau,
            (self.w[0] + other.w[0], self.w[1] + other.w[1]),
            self.regime,
        )

    def scale(self, c) -> "KillingField":
        return KillingField(c * self.sigma, c * self.tau, (c * self.w[0], c * self.w[1]), self.regime)

    def __str__(self):
        return self.expr()


def _fmt(v) -> str:
    if isinstance(v, (int, Fraction)):
        return str(v)
    return f"{float(v):.17g}"


def vector_field_bracket(f: KillingField, g: KillingField, x: float, y: float) -> np.ndarray:
    """[f, g] = f(g) - g(f) evaluated at a point."""
    return g.jacobian(x, y) @ f.value(x, y) - f.jacobian(x, y) @ g.value(x, y)


def killing_basis(p: FamilyParams, regime: Regime | None = None) -> list[KillingField]:
    """[X, Y, Z1, Z2] for admissible params with delta = 0."""
    if not p.admissible:
        raise InadmissibleParams(f"params {p} give a flat torsion-free connection")
    if p.delta != 0:
        raise ValueError("normalize delta to 0 first (normalize_delta)")
    regime = Regime.of(p) if regime is None else regime
    one, zero = Fraction(1), Fraction(0)
    return [
        KillingField(one, zero, (zero, zero), regime),
        KillingField(zero, one, (zero, zero), regime),
        KillingField(zero, zero, (one, zero), regime),
        KillingField(zero, zero, (zero, one), regime),
    ]
