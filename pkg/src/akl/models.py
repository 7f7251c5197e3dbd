"""Homogeneous models: SL(2, R) one-parameter subgroups acting on three
homogeneous spaces, their holonomy-invariant submersions, the
Levi-Civita connections of the hyperbolic and round metrics, and the
affine group Aff+(R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import ONE, X, Y
from .connection import Connection2D

SPACES = ("PuncturedPlane", "DiagonalComplement", "HalfPlane", "Aff")
KINDS = ("semisimple", "orthogonal", "unipotent")


class DomainError(ValueError):
    """A point lies outside its model space."""


class ChartError(DomainError):
    """The image of a point leaves the affine chart."""


@dataclass(frozen=True)
class Mat2:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def distance(self, o: "Mat2") -> float:
        return float(np.max(np.abs(self.array() - o.array())))


def sl2_flow(kind: str, t: float) -> Mat2:
    if kind == "semisimple":
        return Mat2(math.exp(t), 0.0, 0.0, math.exp(-t))
    if kind == "orthogonal":
        return Mat2(math.cos(t), math.sin(t), -math.sin(t), math.cos(t))
    if kind == "unipotent":
        return Mat2(1.0, t, 0.0, 1.0)
    raise ValueError(f"unknown one-parameter subgroup {kind!r}")


def lower_unipotent(t: float) -> Mat2:
    """[[1, 0], [-t, 1]]: the unipotent subgroup conjugated by a quarter turn."""
    return Mat2(1.0, 0.0, -t, 1.0)


def _check_point(space: str, p) -> None:
    if space == "PuncturedPlane":
        if p[0] == 0 and p[1] == 0:
            raise DomainError("the origin is not in the punctured plane")
    elif space == "DiagonalComplement":
        if p[0] == p[1]:
            raise DomainError(f"point {p} lies on the diagonal")
    elif space == "HalfPlane":
        if not complex(p).imag > 0:
            raise DomainError(f"{p} is not in the upper half-plane")
    else:
        raise ValueError(f"unknown model space {space!r}")


def _mobius(m: Mat2, x, eps: float = 1e-14):
    den = m.c * x + m.d
    if abs(den) <= eps:
        raise ChartError(f"{x} is sent to infinity")
    return (m.a * x + m.b) / den


def model_act(space: str, m: Mat2, p):
    """Action of m on a point of the model space."""
    _check_point(space, p)
    if space == "PuncturedPlane":
        x, y = p
        return (m.a * x + m.b * y, m.c * x + m.d * y)
    if space == "DiagonalComplement":
        return (_mobius(m, p[0]), _mobius(m, p[1]))
    return _mobius(m, complex(p))


# ---------------------------------------------------------------------------
# affine group


@dataclass(frozen=True)
class AffElement:
    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("Aff+ elements need a > 0")

    def __mul__(self, o: "AffElement") -> "AffElement":
        return aff_multiply(self, o)

    def distance(self, o: "AffElement") -> float:
        return max(abs(self.a - o.a), abs(self.b - o.b))


AFF_IDENTITY = AffElement(1.0, 0.0)


def aff_multiply(e1: AffElement, e2: AffElement) -> AffElement:
    """(a1, b1).(a2, b2) = (a1 a2, a1 b2 + b1), composition of t -> a t + b."""
    return AffElement(e1.a * e2.a, e1.a * e2.b + e1.b)


def aff_inverse(e: AffElement) -> AffElement:
    return AffElement(1.0 / e.a, -e.b / e.a)


def aff_commutes(e1: AffElement, e2: AffElement, tol: float = 1e-10) -> bool:
    return abs(e2.b * (e1.a - 1) - e1.b * (e2.a - 1)) <= tol


# ---------------------------------------------------------------------------
# invariant submersions


@dataclass(frozen=True)
class Submersion:
    space: str
    kind: str
    expr: str
    f: Callable
    grad: Callable
    flow: Callable  # t -> group element acting on the space
    act: Callable  # (element, point) -> point

    def __call__(self, x, y) -> float:
        return self.f(x, y)


def _sl2_act(space):
    return lambda m, p: model_act(space, m, p)


def _aff_left(e: AffElement, p):
    g = aff_multiply(e, AffElement(*p))
    return (g.a, g.b)


def invariant_submersion(space: str, kind: str) -> Submersion:
    """Holonomy-invariant function for a one-parameter holonomy group.

    For Aff, ``kind`` is "diagonal" (the subgroup {(a, 0)}) or
    "translation" (the subgroup {(1, b)}), acting by left translation on
    points (a, b).
    """
    table = {
        ("PuncturedPlane", "semisimple"): (
            "x*y",
            lambda x, y: x * y,
            lambda x, y: (y, x),
            lambda t: sl2_flow("semisimple", t),
        ),
        ("PuncturedPlane", "orthogonal"): (
            "x^2 + y^2",
            lambda x, y: x * x + y * y,
            lambda x, y: (2 * x, 2 * y),
            lambda t: sl2_flow("orthogonal", t),
        ),
        ("PuncturedPlane", "unipotent"): (
            "x",
            lambda x, y: x,
            lambda x, y: (1.0, 0.0),
            lower_unipotent,
        ),
        ("DiagonalComplement", "semisimple"): (
            "x/y",
            lambda x, y: x / y,
            lambda x, y: (1 / y, -x / (y * y)),
            lambda t: sl2_flow("semisimple", t),
        ),
        ("DiagonalComplement", "orthogonal"): (
            "(1 + x*y)/(x - y)",
            lambda x, y: (1 + x * y) / (x - y),
            lambda x, y: (-(1 + y * y) / (x - y) ** 2, (1 + x * x) / (x - y) ** 2),
            lambda t: sl2_flow("orthogonal", t),
        ),
        ("DiagonalComplement", "unipotent"): (
            "1/(x - y)",
            lambda x, y: 1 / (x - y),
            lambda x, y: (-1 / (x - y) ** 2, 1 / (x - y) ** 2),
            lambda t: sl2_flow("unipotent", t),
        ),
        ("Aff", "diagonal"): (
            "b/a",
            lambda a, b: b / a,
            lambda a, b: (-b / (a * a), 1 / a),
            lambda t: AffElement(math.exp(t), 0.0),
        ),
        ("Aff", "translation"): (
            "a",
            lambda a, b: a,
            lambda a, b: (1.0, 0.0),
            lambda t: AffElement(1.0, t),
        ),
    }
    try:
        expr, f, grad, fl = table[(space, kind)]
    except KeyError:
        raise ValueError(f"no invariant submersion for ({space}, {kind})") from None
    act = _aff_left if space == "Aff" else _sl2_act(space)
    return Submersion(space, kind, expr, f, grad, fl, act)


SUBMERSION_CASES = (
    ("PuncturedPlane", "semisimple"),
    ("PuncturedPlane", "orthogonal"),
    ("PuncturedPlane", "unipotent"),
    ("DiagonalComplement", "semisimple"),
    ("DiagonalComplement", "orthogonal"),
    ("DiagonalComplement", "unipotent"),
    ("Aff", "diagonal"),
    ("Aff", "translation"),
)


def _sample_point(space: str, rng: np.random.Generator):
    if space == "Aff":
        return (float(rng.uniform(0.2, 3.0)), float(rng.uniform(-2.0, 2.0)))
    while True:
        x, y = (float(v) for v in rng.uniform(-2.0, 2.0, size=2))
        if space == "DiagonalComplement" and abs(x - y) < 0.1:
            continue
        if space == "PuncturedPlane" and math.hypot(x, y) < 0.1:
            continue
        return (x, y)


def submersion_check(s: Submersion, n: int = 50, seed: int = 0) -> tuple[float, float]:
    """(max |f(g.p) - f(p)|, min |grad f(p)|) over n sampled orbit points.

    Samples whose image leaves the affine chart, or comes within 0.05 of
    the diagonal, are redrawn.
    """
    rng = np.random.default_rng(seed)
    worst, smallest = 0.0, math.inf
    done = 0
    while done < n:
        p = _sample_point(s.space, rng)
        t = float(rng.uniform(-1.0, 1.0))
        try:
            q = s.act(s.flow(t), p)
        except ChartError:
            continue
        if s.space == "DiagonalComplement" and abs(q[0] - q[1]) < 0.05:
            continue
        worst = max(worst, abs(s(*q) - s(*p)))
        smallest = min(smallest, math.hypot(*s.grad(*p)))
        done += 1
    return worst, smallest


# ---------------------------------------------------------------------------
# Levi-Civita connections


def hyperbolic_connection() -> Connection2D:
    """Levi-Civita connection of (dx^2 + dy^2)/y^2 on y > 0."""
    inv = ONE / Y
    return Connection2D(B=inv, C=-inv, F=-inv)


def sphere_connection() -> Connection2D:
    """Levi-Civita connection of 4(dx^2 + dy^2)/(1 + x^2 + y^2)^2.

    For a conformal metric e^{2 phi}(dx^2 + dy^2) the symbols are
    phi_x, phi_y and their signed copies.
    """
    w = ONE + X * X + Y * Y
    px = -2 * X / w
    py = -2 * Y / w
    return Connection2D(A=px, B=-py, C=py, D=px, E=-px, F=py)
