import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from akl.algebra import ONE, X, Y, ZERO, AlgebraError, PoleError, RationalFunction2, parse_rf
from akl.connection import (
    Connection2D,
    NumericMap,
    christoffel_at,
    curvature,
    from_christoffel,
    geodesic,
    identity_map,
    is_flat,
    is_torsion_free,
    pullback_residual,
    sample_grid,
    to_christoffel,
    torsion,
    translation_map,
)
from akl.family import FamilyParams, make_connection
from akl.group import kappa_map
from akl.models import hyperbolic_connection
from oracles import HYPERBOLIC_METRIC, christoffel_symbols, levi_civita, x, y


def fam(*args):
    return make_connection(FamilyParams(*args))


def test_zero_connection_christoffel():
    G = to_christoffel(Connection2D()).G
    assert all(G[k][i][j] == ZERO for k in range(2) for i in range(2) for j in range(2))


def test_family_christoffel_only_e():
    ch = to_christoffel(fam(0, 1, 0, 0, 0))
    assert ch[0, 1, 1] == X
    others = [ch[k, i, j] for k in range(2) for i in range(2) for j in range(2) if (k, i, j) != (0, 1, 1)]
    assert all(v == ZERO for v in others)


def test_torsion_part_of_christoffel():
    ch = to_christoffel(Connection2D(U=RationalFunction2.const(2)))
    assert ch[0, 0, 1] == ONE and ch[0, 1, 0] == -ONE


def test_round_trip():
    rng = random.Random(0)
    for _ in range(10):
        c = Connection2D(*(RationalFunction2.const(Fraction(rng.randint(-5, 5), rng.randint(1, 4))) + X * rng.randint(-2, 2) for _ in range(8)))
        assert from_christoffel(to_christoffel(c)) == c


def test_torsion_examples():
    assert torsion(Connection2D()) == (ZERO, ZERO)
    assert torsion(fam(0, 0, 0, 3, 0)) == (RationalFunction2.const(6), ZERO)
    assert torsion(Connection2D(U=X, V=Y)) == (X, Y)
    assert is_torsion_free(Connection2D()) and not is_torsion_free(Connection2D(V=Y))


def test_curvature_zero():
    rep = curvature(Connection2D())
    assert rep.flat and rep.torsion_free


def test_family_curvature_bracket():
    a, b, g, u = Fraction(3, 2), Fraction(-2), Fraction(1, 3), Fraction(5)
    rep = curvature(make_connection(FamilyParams(a, b, g, u, 7)))
    assert rep.R_dx == (ZERO, ZERO)
    assert rep.R_dy == (RationalFunction2.const(b + (g + u) * (g + u - a)), ZERO)


def test_flatness_examples():
    assert is_flat(Connection2D())
    assert not is_flat(fam(0, 1, 0, 0))
    assert is_flat(fam(2, 1, 1, 0))


def test_curvature_against_sympy_oracle_on_torsion_connection():
    c = Connection2D.from_strings({"A": "x*y", "B": "1/(1+x^2)", "C": "y", "D": "x-y", "E": "2", "F": "x^2", "U": "y^2", "V": "x"})
    G = christoffel_symbols(c)
    v = (x, y)

    def R(i, j, l, m):
        return sp.simplify(
            sp.diff(G[m][j][l], v[i]) - sp.diff(G[m][i][l], v[j])
            + sum(G[k][j][l] * G[m][i][k] - G[k][i][l] * G[m][j][k] for k in range(2))
        )

    rep = curvature(c)
    for l, comp in ((0, rep.R_dx), (1, rep.R_dy)):
        for m in range(2):
            ours = sp.sympify(str(comp[m]).replace("^", "**"), locals={"x": x, "y": y})
            assert sp.simplify(ours - R(0, 1, l, m)) == 0


def test_hyperbolic_curvature_is_constant_minus_one():
    # For a metric of constant curvature K, R(X, Y)Z = K (g(Y, Z) X - g(X, Z) Y).
    c = hyperbolic_connection()
    G = levi_civita(HYPERBOLIC_METRIC)
    assert christoffel_symbols(c) == G
    rep = curvature(c)
    # g(dy, dy) = 1/y^2 -> R(dx,dy)dy = K * (1/y^2) dx; R(dx,dy)dx = -K * (1/y^2) dy
    assert rep.R_dy == (-ONE / (Y * Y), ZERO)
    assert rep.R_dx == (ZERO, ONE / (Y * Y))


def test_christoffel_at():
    G = christoffel_at(Connection2D(C=X, U=2 * Y), 1.0, 2.0)
    assert G[0, 0, 1] == pytest.approx(3.0) and G[0, 1, 0] == pytest.approx(-1.0)


# ---------------------------------------------------------------- pullback


def test_identity_pullback():
    for c in (Connection2D(), fam(1, 2, 3, 4, 5), hyperbolic_connection()):
        pts = [(0.3, 0.7), (-0.5, 1.5), (1.0, 2.0)]
        assert pullback_residual(c, identity_map(), pts) < 1e-9


def test_kappa_is_isometry():
    assert pullback_residual(fam(0, 1, 0, 0), kappa_map(), sample_grid(-1, 1, 4)) < 1e-6


def test_translation_in_y_is_isometry():
    rng = random.Random(7)
    for _ in range(5):
        p = FamilyParams(*(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(5)))
        assert pullback_residual(make_connection(p), translation_map(0.0, 1.0), sample_grid(-1, 1, 3)) < 1e-6


def test_non_isometry_detected():
    assert pullback_residual(fam(0, 1, 0, 0), translation_map(1.0, 0.0), sample_grid(-1, 1, 3)) > 0.5


def test_pullback_reference_connection():
    # the shift (x, y) -> (x + 5, y) pulls E = x back to E = x + 5
    shift = translation_map(5.0, 0.0)
    assert pullback_residual(fam(0, 1, 0, 0, 0), shift, sample_grid(-1, 1, 3), reference=fam(0, 1, 0, 0, 5)) < 1e-8


def test_singular_jacobian():
    m = NumericMap(lambda x, y: (x, 0.0), lambda x, y: np.array([[1.0, 0.0], [0.0, 0.0]]), "flatten")
    with pytest.raises(AlgebraError, match="singular"):
        pullback_residual(Connection2D(), m, [(0.0, 0.0)])


def test_jacobian_consistency():
    assert kappa_map().jacobian_error(0.3, 0.4) < 1e-6


# ---------------------------------------------------------------- geodesics


def test_straight_line():
    t, x1, y1, vx, vy = geodesic(Connection2D(), (0, 0), (1, 0), 1.0, 10)[-1]
    assert abs(x1 - 1) < 1e-12 and abs(y1) < 1e-12


def test_family_geodesic_cos():
    rows = geodesic(fam(0, 1, 0, 0), (1, 0), (0, 1), 1.0, 100)
    assert len(rows) == 101
    assert abs(rows[-1][1] - math.cos(1)) < 1e-8


def test_hyperbolic_vertical_geodesic():
    rows = geodesic(hyperbolic_connection(), (0, 1), (0, 1), 1.0, 200)
    t, x1, y1, vx, vy = rows[-1]
    assert abs(x1) < 1e-12 and abs(y1 - math.e) < 1e-8


def test_geodesic_ignores_torsion():
    base = Connection2D(E=X, C=Y)
    twisted = Connection2D(E=X, C=Y, U=parse_rf("x^2+3"), V=parse_rf("y-1"))
    assert geodesic(base, (0.5, 0.1), (0.2, 1), 1.0, 20) == geodesic(twisted, (0.5, 0.1), (0.2, 1), 1.0, 20)


def test_geodesic_pole_reports_step():
    c = Connection2D(A=ONE / (X - 1))
    with pytest.raises(PoleError, match="step"):
        geodesic(c, (1.0, 0.0), (1.0, 0.0), 1.0, 4)


def test_geodesic_needs_steps():
    with pytest.raises(ValueError):
        geodesic(Connection2D(), (0, 0), (1, 0), 1.0, 0)


def test_from_strings_rejects_unknown():
    with pytest.raises(ValueError):
        Connection2D.from_strings({"Q": "x"})
