"""Independent reference computations used by several test modules.

Everything here is written directly in sympy from textbook formulas and
does not go through the akl symbolic layer.
"""

import sympy as sp

from akl.algebra import parse_rf
from akl.connection import Connection2D

x, y = sp.symbols("x y")


def levi_civita(g):
    """Christoffel symbols G[k][i][j] of a 2x2 sympy metric in (x, y)."""
    g = sp.Matrix(g)
    ginv = g.inv()
    v = (x, y)
    return [
        [
            [
                sp.simplify(
                    sum(
                        ginv[k, l] * (sp.diff(g[j, l], v[i]) + sp.diff(g[i, l], v[j]) - sp.diff(g[i, j], v[l]))
                        for l in range(2)
                    )
                    / 2
                )
                for j in range(2)
            ]
            for i in range(2)
        ]
        for k in range(2)
    ]


def connection_from_symbols(G) -> Connection2D:
    """Symmetric Christoffel symbols (sympy rational functions) as a Connection2D."""

    def rf(e):
        return parse_rf(str(sp.together(e)).replace("**", "^"))

    return Connection2D(
        A=rf(G[0][0][0]),
        B=rf(G[1][0][0]),
        C=rf(G[0][0][1]),
        D=rf(G[1][0][1]),
        E=rf(G[0][1][1]),
        F=rf(G[1][1][1]),
    )


HYPERBOLIC_METRIC = [[1 / y**2, 0], [0, 1 / y**2]]
SPHERE_METRIC = [[4 / (1 + x**2 + y**2) ** 2, 0], [0, 4 / (1 + x**2 + y**2) ** 2]]


def lie_derivative_residuals(G, a, b):
    """(L_X nabla)(d_i, d_j)^k for X = a d_x + b d_y, from the general formula

        (L_X nabla)^k_ij = X(G^k_ij) + G^k_lj d_i X^l + G^k_il d_j X^l
                           - G^l_ij d_l X^k + d_i d_j X^k

    with G[k][i][j] the component along d_k of nabla_{d_i} d_j.
    """
    X = (a, b)
    v = (x, y)
    out = {}
    for k in range(2):
        for i in range(2):
            for j in range(2):
                e = a * sp.diff(G[k][i][j], x) + b * sp.diff(G[k][i][j], y)
                e += sum(G[k][l][j] * sp.diff(X[l], v[i]) + G[k][i][l] * sp.diff(X[l], v[j]) for l in range(2))
                e -= sum(G[l][i][j] * sp.diff(X[k], v[l]) for l in range(2))
                e += sp.diff(X[k], v[i], v[j])
                out[(k, i, j)] = sp.simplify(e)
    return out


def christoffel_symbols(c: Connection2D):
    """Sympy Christoffel array of a Connection2D, via its string form."""
    s = {k: sp.sympify(v.replace("^", "**"), locals={"x": x, "y": y}) for k, v in c.to_strings().items()}
    half = sp.Rational(1, 2)
    return [
        [[s["A"], s["C"] + half * s["U"]], [s["C"] - half * s["U"], s["E"]]],
        [[s["B"], s["D"] + half * s["V"]], [s["D"] - half * s["V"], s["F"]]],
    ]
