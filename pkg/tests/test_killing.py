from fractions import Fraction

import pytest
import sympy as sp

from akl.algebra import ONE, X, ZERO, AlgebraError, PolyS, rank
from akl.connection import Connection2D
from akl.family import FamilyParams, killing_basis, make_connection
from akl.killing import (
    JET,
    SECOND,
    CertificateError,
    assemble,
    bracket,
    case6_matrix,
    case6_solutions,
    case6_target,
    check_lie_algebra,
    classify_connection,
    is_homogeneous,
    killing_residuals,
    prolong,
    solve,
    structure_constants,
    verify_case6,
)
from akl.models import hyperbolic_connection, sphere_connection
from oracles import christoffel_symbols, lie_derivative_residuals, x, y

F = Fraction


def jet_of(a, b, pt):
    """Exact 1-jet (a, b, a_x, a_y, b_x, b_y) of a sympy field at a point."""
    sub = {x: pt[0], y: pt[1]}
    a, b = sp.sympify(a), sp.sympify(b)
    vals = [a, b, sp.diff(a, x), sp.diff(a, y), sp.diff(b, x), sp.diff(b, y)]
    return tuple(F(str(sp.nsimplify(v.subs(sub)))) for v in vals)


def span_equal(A, B):
    A, B = [list(v) for v in A], [list(v) for v in B]
    return rank(A, 6) == rank(B, 6) == rank(A + B, 6)


# ---------------------------------------------------------------- equations


def test_residuals_match_general_lie_derivative():
    c = Connection2D.from_strings({"A": "x*y", "B": "1/(1+x^2)", "C": "y", "D": "x-y", "E": "2", "F": "x^2", "U": "y^2", "V": "x"})
    G = christoffel_symbols(c)
    a = x**3 * y + 2 * y**2 - x
    b = x * y**2 + sp.Rational(1, 3) * x**2
    L = lie_derivative_residuals(G, a, b)
    names = ("A", "B", "C", "D", "E", "F", "U", "V")
    s = {k: sp.sympify(v.replace("^", "**"), locals={"x": x, "y": y}) for k, v in c.to_strings().items()}
    dK = {k: (sp.diff(s[k], x), sp.diff(s[k], y)) for k in names}
    j = (a, b, sp.diff(a, x), sp.diff(a, y), sp.diff(b, x), sp.diff(b, y))
    j2 = (sp.diff(a, x, 2), sp.diff(b, x, 2), sp.diff(a, x, y), sp.diff(b, x, y), sp.diff(a, y, 2), sp.diff(b, y, 2))
    eqs = killing_residuals(s, dK, j, j2)
    expected = (
        L[0, 0, 0],
        L[1, 0, 0],
        (L[0, 0, 1] + L[0, 1, 0]) / 2,
        (L[1, 0, 1] + L[1, 1, 0]) / 2,
        L[0, 1, 1],
        L[1, 1, 1],
        L[0, 0, 1] - L[0, 1, 0],
        L[1, 0, 1] - L[1, 1, 0],
    )
    for ours, ref in zip(eqs, expected):
        assert sp.simplify(ours - ref) == 0


def test_assemble_zero_connection():
    sysm = assemble(Connection2D())
    assert all(v == ZERO for name in SECOND for v in sysm.second[name])
    assert all(v == ZERO for row in sysm.constraints for v in row)


def test_assemble_family():
    g, u = F(3), F(2)
    sysm = assemble(make_connection(FamilyParams(1, 5, g, u, 0)))
    # a_xx = -2 gamma b_x
    assert sysm.second["a_xx"] == tuple(-2 * g * ONE if n == "b_x" else ZERO for n in JET)
    # constraints are upsilon b_y = 0 and upsilon b_x = 0 up to scaling
    rows = [[v(0, 0) for v in r] for r in sysm.constraints]
    assert rank(rows, 6) == 2
    assert all(r[JET.index(n)] == 0 for r in rows for n in ("a", "b", "a_x", "a_y"))


def test_case6_system_matches_substitution():
    # s = 0: the rotation field y d_x - x d_y
    M = [[e(0) for e in row] for row in case6_matrix()]
    assert len(M) == 8 and all(len(r) == 8 for r in M)


# ---------------------------------------------------------------- solver


def test_zero_connection_dimension_six():
    basis, stab = solve(Connection2D(), (0, 0))
    assert len(basis) == 6 and stab


def test_family_dimension_four_and_closed_form_span():
    p = FamilyParams(0, 1, 0, 0, 0)
    basis, stab = solve(make_connection(p), (0, 0))
    assert stab and len(basis) == 4
    closed = [f.jet_at_origin() for f in killing_basis(p)]
    assert span_equal(basis, closed)
    # cos(y) d_x and sin(y) d_x
    assert span_equal(closed[2:], [jet_of(sp.cos(y), 0, (0, 0)), jet_of(sp.sin(y), 0, (0, 0))])


def test_hyperbolic_known_fields():
    c = hyperbolic_connection()
    G = christoffel_symbols(c)
    fields = [(sp.Integer(1), sp.Integer(0)), (x, y), (x**2 - y**2, 2 * x * y)]
    for a, b in fields:
        assert all(v == 0 for v in lie_derivative_residuals(G, a, b).values())
    basis, _ = solve(c, (0, 1))
    assert len(basis) == 3
    assert span_equal(basis, [jet_of(a, b, (0, 1)) for a, b in fields])


def test_sphere_rotation_fields():
    c = sphere_connection()
    G = christoffel_symbols(c)
    fields = [(-y, x), ((1 + x**2 - y**2) / 2, x * y), (x * y, (1 - x**2 + y**2) / 2)]
    for a, b in fields:
        assert all(v == 0 for v in lie_derivative_residuals(G, a, b).values())
    basis, _ = solve(c, (0, 0))
    assert span_equal(basis, [jet_of(a, b, (0, 0)) for a, b in fields])


def test_pole_at_base_point():
    from akl.algebra import PoleError

    with pytest.raises(PoleError):
        solve(hyperbolic_connection(), (0, 0))


def test_solution_jets_satisfy_all_constraints():
    for c, pt in ((make_connection(FamilyParams(3, 2, 1, 1)), (1, 1)), (hyperbolic_connection(), (2, 3))):
        pr = prolong(c, pt)
        for j in pr.basis:
            assert all(sum(r * v for r, v in zip(row, j)) == 0 for row in pr.rows)


def test_dimension_is_base_point_independent():
    for args in ((0, 1, 0, 0), (3, 2, 1, 1), (1, 1, 0, 2), (2, 1, -1, 0)):
        c = make_connection(FamilyParams(*args))
        assert len(solve(c, (0, 0))[0]) == len(solve(c, (1, 1))[0]) == 4


def test_not_stabilized_is_reported():
    pr = prolong(make_connection(FamilyParams(0, 1, 0, 0)), (0, 0), max_order=1)
    assert not pr.stabilized


# ---------------------------------------------------------------- brackets


def _family_jets():
    p = FamilyParams(0, 1, 0, 0, 0)
    c = make_connection(p)
    X_, Y_, cos_, sin_ = (f.jet_at_origin() for f in killing_basis(p))
    return c, X_, Y_, cos_, sin_


def test_bracket_self_is_zero():
    c, X_, Y_, cos_, sin_ = _family_jets()
    assert bracket(cos_, cos_, c, (0, 0)) == (0,) * 6


def test_bracket_y_cos():
    c, X_, Y_, cos_, sin_ = _family_jets()
    # [d_y, cos(y) d_x] = -sin(y) d_x
    assert bracket(Y_, cos_, c, (0, 0)) == tuple(-v for v in sin_)
    assert bracket(Y_, cos_, c, (0, 0)) == jet_of(-sp.sin(y), 0, (0, 0))


def test_bracket_x_h():
    c, X_, Y_, cos_, sin_ = _family_jets()
    assert bracket(X_, cos_, c, (0, 0)) == tuple(-v for v in cos_)


def test_bracket_rejects_outside_jets():
    c, *_ = _family_jets()
    with pytest.raises(AlgebraError):
        bracket((0, 1, 0, 0, 1, 0), (1, 0, 0, 0, 0, 0), c, (0, 0))


def test_structure_constants_satisfy_jacobi():
    c = make_connection(FamilyParams(3, 2, 1, 1))
    basis, _ = solve(c, (0, 0))
    C = structure_constants(basis, c, (0, 0))
    check_lie_algebra(C)


# ---------------------------------------------------------------- classification


@pytest.mark.parametrize(
    "c, pt, dim, label",
    [
        (Connection2D(), (0, 0), 6, "FlatTorsionFree"),
        (make_connection(FamilyParams(0, 1, 0, 0)), (0, 0), 4, "Dim4Case"),
        (make_connection(FamilyParams(2, 1, 1, 0)), (0, 0), 6, "FlatTorsionFree"),
        (hyperbolic_connection(), (0, 1), 3, "SL2"),
        (sphere_connection(), (0, 0), 3, "SO3"),
    ],
)
def test_classify(c, pt, dim, label):
    r = classify_connection(c, pt)
    assert (r.dim, r.label) == (dim, label)
    assert r.homogeneous_at_point


def test_killing_form_signatures():
    assert classify_connection(hyperbolic_connection(), (0, 1)).killing_form_signature == (2, 1, 0)
    assert classify_connection(sphere_connection(), (0, 0)).killing_form_signature == (0, 3, 0)


def test_torsion_family_is_dim4():
    r = classify_connection(make_connection(FamilyParams(1, 0, 0, 1)), (0, 0))
    assert r.dim == 4 and r.label == "Dim4Case" and not r.torsion_free


def test_translation_invariant_torsion_connection_is_abelian_or_larger():
    # constant coefficients with torsion: d_x and d_y are Killing
    c = Connection2D(A=ONE, U=2 * ONE)
    r = classify_connection(c, (0, 0))
    assert r.dim >= 2 and r.homogeneous_at_point


def test_inhomogeneous_generic_connection():
    c = Connection2D.from_strings(
        {"A": "x*y^5+1", "B": "x^2-3*y+1", "C": "2*x*y^2-x", "D": "y^3+x", "E": "x^3-2", "F": "x*y+y^2", "U": "3*x-y^2", "V": "x^2*y"}
    )
    r0, r1 = classify_connection(c, (0, 0)), classify_connection(c, (1, 1))
    assert r0.dim == r1.dim < 2
    assert not r0.homogeneous_at_point and not is_homogeneous(r0.basis)
    assert any("not locally homogeneous" in n for n in r0.notes)


def test_report_json_round_trips():
    import json

    r = classify_connection(hyperbolic_connection(), (0, 1))
    data = r.to_json()
    assert json.loads(json.dumps(data)) == data
    assert data["label"] == "SL2" and data["dim"] == 3


# ---------------------------------------------------------------- case 6


def test_case6_determinant():
    det = verify_case6()
    assert det == case6_target()  # lambda = 1 with this row scaling
    s = PolyS.s()
    assert case6_target() == s**8 + 12 * s**6 + 30 * s**4 + 28 * s**2 + 9
    assert det(0) == 9


def test_case6_no_real_roots():
    s = PolyS.s()
    q, r = divmod(verify_case6(), (s * s + 9) * (s * s + 1) ** 3)
    assert r.is_zero() and q.degree == 0


def test_case6_unique_solution_at_one():
    assert case6_solutions(1) == []


def test_case6_wrong_target_fails():
    s = PolyS.s()
    with pytest.raises(CertificateError):
        verify_case6((s * s + 4) * (s * s + 1) ** 3)
