"""Exact arithmetic: bivariate rational functions over Q, rational matrices,
and univariate polynomials in ``s``.

Rational numbers are :class:`fractions.Fraction`.  Bivariate rational
functions are backed by sympy's sparse fraction field ``QQ(x, y)``, which
keeps every value gcd-reduced with a positive leading denominator
coefficient, so structural equality is mathematical equality.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.fields import field

__all__ = [
    "Fraction",
    "AlgebraError",
    "PoleError",
    "ParseError",
    "Poly2",
    "RationalFunction2",
    "PolyS",
    "X",
    "Y",
    "ZERO",
    "ONE",
    "as_fraction",
    "rf_arith",
    "rf_partial",
    "rf_eval",
    "parse_rf",
    "rref",
    "rank",
    "nullspace",
    "solve_in_span",
    "det_polyS",
    "det_fraction",
    "signature",
]

_FIELD, _FX, _FY = field("x,y", QQ)
_RING = _FIELD.ring
_GX, _GY = _RING.gens


class AlgebraError(ArithmeticError):
    pass


class PoleError(AlgebraError):
    """A rational function was evaluated where its denominator vanishes."""


class ParseError(ValueError):
    pass


def as_fraction(v) -> Fraction:
    """Coerce ints, Fractions, sympy/gmpy rationals and ``"p/q"`` strings."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass a Fraction or string")
    num = getattr(v, "numerator", None)
    den = getattr(v, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot convert {v!r} to Fraction")


def _qq(v):
    f = as_fraction(v)
    return QQ(f.numerator, f.denominator)


class Poly2:
    """Polynomial in x, y with rational coefficients, stored sparsely."""

    __slots__ = ("_p",)

    def __init__(self, p):
        self._p = p

    @classmethod
    def from_terms(cls, terms: dict) -> "Poly2":
        p = _RING.zero
        for (i, j), c in terms.items():
            p += _RING({(i, j): _qq(c)}) if c else _RING.zero
        return cls(p)

    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return {m: as_fraction(c) for m, c in self._p.terms()}

    def is_zero(self) -> bool:
        return not self._p

    def degree(self) -> int:
        return max((i + j for i, j in self._p.monoms()), default=-1)

    def __eq__(self, other):
        return isinstance(other, Poly2) and self._p == other._p

    def __hash__(self):
        return hash(self._p)

    def __repr__(self):
        return f"Poly2({self._p.as_expr()})"


class RationalFunction2:
    """Immutable exact element of Q(x, y) in canonical form."""

    __slots__ = ("_f", "_float_cache")

    def __init__(self, value=0):
        if isinstance(value, RationalFunction2):
            f = value._f
        elif hasattr(value, "numer") and hasattr(value, "denom"):
            f = value
        else:
            f = _FIELD(_qq(value))
        object.__setattr__(self, "_f", f)
        object.__setattr__(self, "_float_cache", None)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction2 is immutable")

    # construction ------------------------------------------------------
    @classmethod
    def const(cls, c) -> "RationalFunction2":
        return cls(_FIELD(_qq(c)))

    @classmethod
    def parse(cls, text: str) -> "RationalFunction2":
        return parse_rf(text)

    # structure ---------------------------------------------------------
    @property
    def num(self) -> Poly2:
        return Poly2(self._f.numer)

    @property
    def den(self) -> Poly2:
        return Poly2(self._f.denom)

    def is_zero(self) -> bool:
        return not self._f.numer

    def is_constant(self) -> bool:
        return self._f.numer.is_ground and self._f.denom.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise AlgebraError(f"{self} is not constant")
        return as_fraction(self._f.numer.LC) / as_fraction(self._f.denom.LC) if self._f.numer else Fraction(0)

    # arithmetic --------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction2):
            return other._f
        if isinstance(other, (int, Fraction)):
            return _FIELD(_qq(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RationalFunction2(self._f + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RationalFunction2(self._f - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RationalFunction2(o - self._f)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RationalFunction2(self._f * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not o.numer:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction2(self._f / o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction2(o / self._f)

    def __neg__(self):
        return RationalFunction2(-self._f)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of the zero rational function")
            return RationalFunction2(self._f ** n)
        return RationalFunction2(self._f ** n)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._f == o

    def __hash__(self):
        return hash(self._f)

    def __bool__(self):
        return not self.is_zero()

    # calculus / evaluation ----------------------------------------------
    def diff(self, var: str) -> "RationalFunction2":
        return rf_partial(self, var)

    def __call__(self, x, y):
        """Exact value at a rational point."""
        return rf_eval(self, (x, y))

    def evalf(self, x: float, y: float) -> float:
        """Float value; raises PoleError when the denominator is zero."""
        cache = self._float_cache
        if cache is None:
            num = [(float(as_fraction(c)), i, j) for (i, j), c in self._f.numer.terms()]
            den = [(float(as_fraction(c)), i, j) for (i, j), c in self._f.denom.terms()]
            cache = (num, den)
            object.__setattr__(self, "_float_cache", cache)
        num, den = cache
        d = sum(c * x**i * y**j for c, i, j in den)
        if d == 0.0:
            raise PoleError(f"pole at ({x}, {y}): denominator {self._f.denom.as_expr()} vanishes")
        return sum(c * x**i * y**j for c, i, j in num) / d

    def __str__(self):
        return _to_grammar(self._f)

    def __repr__(self):
        return f"RationalFunction2({str(self)!r})"


def _poly_str(p) -> str:
    if not p:
        return "0"
    parts = []
    for (i, j), c in sorted(p.terms(), reverse=True):
        c = as_fraction(c)
        mon = "*".join(
            s for s in (
                "x" if i == 1 else (f"x^{i}" if i else ""),
                "y" if j == 1 else (f"y^{j}" if j else ""),
            ) if s
        )
        mag = abs(c)
        if mon:
            if mag == 1:
                body = mon
            elif mag.denominator == 1:
                body = f"{mag.numerator}*{mon}"
            else:
                body = f"{mag.numerator}*{mon}/{mag.denominator}"
        else:
            body = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _to_grammar(f) -> str:
    """Render in the parser's grammar, so ``parse_rf(str(f)) == f``."""
    num = _poly_str(f.numer)
    if f.denom == 1:
        return num
    return f"({num})/({_poly_str(f.denom)})"


X = RationalFunction2(_FX)
Y = RationalFunction2(_FY)
ZERO = RationalFunction2(0)
ONE = RationalFunction2(1)


def rf_arith(f: RationalFunction2, g: RationalFunction2, op: str) -> RationalFunction2:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    raise ValueError(f"unknown op {op!r}")


def rf_partial(f: RationalFunction2, var: str) -> RationalFunction2:
    if var == "x":
        return RationalFunction2(f._f.diff(_FX))
    if var == "y":
        return RationalFunction2(f._f.diff(_FY))
    raise ValueError(f"unknown variable {var!r}")


def rf_eval(f: RationalFunction2, p) -> Fraction:
    x, y = (_qq(c) for c in p)
    point = [(_GX, x), (_GY, y)]
    d = f._f.denom.evaluate(point)
    if d == 0:
        raise PoleError(
            f"pole at ({as_fraction(x)}, {as_fraction(y)}): "
            f"denominator {f._f.denom.as_expr()} vanishes"
        )
    return as_fraction(f._f.numer.evaluate(point)) / as_fraction(d)


# ---------------------------------------------------------------------------
# parser:  expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
#          unary := ('+'|'-') unary | power ; power := atom ('^' unary)?
#          atom := INT | x | y | '(' expr ')'

_TOKEN = re.compile(r"\s*(?:(\d+)|([xy])|([-+*/^()]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r} at position {pos}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            got = "end of input" if tok is None else repr(tok)
            raise ParseError(f"expected {expected or 'a token'}, got {got}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise ParseError("empty expression")
        v = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at {self.peek()!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            v = v + self.term() if self.take() == "+" else v - self.term()
        return v

    def term(self):
        v = self.unary()
        while self.peek() in ("*", "/"):
            if self.take() == "*":
                v = v * self.unary()
            else:
                d = self.unary()
                if d.is_zero():
                    raise ParseError("division by zero")
                v = v / d
        return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            e = self.unary()
            if not e.is_constant() or e.constant_value().denominator != 1:
                raise ParseError("exponent must be an integer constant")
            n = int(e.constant_value())
            if n < 0 and base.is_zero():
                raise ParseError("division by zero")
            return base**n
        return base

    def atom(self):
        tok = self.take()
        if tok == "(":
            v = self.expr()
            self.take(")")
            return v
        if tok == "x":
            return X
        if tok == "y":
            return Y
        if tok.isdigit():
            return RationalFunction2.const(int(tok))
        raise ParseError(f"unexpected token {tok!r}")


def parse_rf(text: str) -> RationalFunction2:
    """Parse ``+ - * / ^ ( ) x y`` with integer literals."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# univariate polynomials in s


class PolyS:
    """Polynomial in ``s`` with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("PolyS is immutable")

    @classmethod
    def s(cls) -> "PolyS":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @staticmethod
    def _coerce(other) -> "PolyS":
        if isinstance(other, PolyS):
            return other
        return PolyS((as_fraction(other),))

    def __add__(self, other):
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return PolyS(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return PolyS(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return PolyS()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return PolyS(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PolyS((1,))
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(o.coeffs) + 1, 0)
        lead = o.coeffs[-1]
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + len(o.coeffs) - 1] / lead
            q[k] = c
            if c:
                for j, b in enumerate(o.coeffs):
                    rem[k + j] -= c * b
        return PolyS(q), PolyS(rem)

    def exact_div(self, other) -> "PolyS":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise AlgebraError("inexact polynomial division")
        return q

    def __call__(self, s):
        acc = Fraction(0) if not isinstance(s, float) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + (c if not isinstance(s, float) else float(c))
        return acc

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PolyS((other,))
        return isinstance(other, PolyS) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"PolyS({str(self)})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mon = "" if k == 0 else ("s" if k == 1 else f"s^{k}")
            mag = abs(c)
            body = (str(mag) if (mag != 1 or not mon) else "") + ("*" if mon and mag != 1 else "") + mon
            terms.append(("-" if c < 0 else "+", body))
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def det_polyS(M: Sequence[Sequence]) -> PolyS:
    """Determinant by fraction-free (Bareiss) elimination over Q[s]."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix must be square")
    if n == 0:
        return PolyS((1,))
    a = [[PolyS._coerce(v) for v in row] for row in M]
    sign = 1
    prev = PolyS((1,))
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return PolyS()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


# ---------------------------------------------------------------------------
# rational linear algebra


def rref(M: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    rows = [[as_fraction(v) for v in row] for row in M]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(M: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(M, ncols)[1])


def nullspace(M: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ker(M); one vector per free column, with a 1 in that column."""
    if ncols is None:
        ncols = len(M[0]) if M else 0
    rows, pivots = rref(M, ncols) if M else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve_in_span(basis: Sequence[Sequence], target: Sequence) -> list[Fraction] | None:
    """Coefficients c with sum c_i basis_i == target, or None."""
    n = len(basis)
    m = len(target)
    aug = [[as_fraction(basis[j][i]) for j in range(n)] + [as_fraction(target[i])] for i in range(m)]
    rows, pivots = rref(aug, n + 1)
    if n in pivots:
        return None
    coeffs = [Fraction(0)] * n
    for row, p in zip(rows, pivots):
        coeffs[p] = row[n]
    return coeffs


def det_fraction(M: Sequence[Sequence]) -> Fraction:
    a = [[as_fraction(v) for v in row] for row in M]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                a[i] = [u - f * v for u, v in zip(a[i], a[k])]
    return det


def signature(S: Sequence[Sequence]) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of a symmetric rational matrix, by congruence."""
    a = [[as_fraction(v) for v in row] for row in S]
    n = len(a)
    pos = neg = 0
    k = 0
    size = n
    while k < size:
        # bring a nonzero diagonal entry to position k
        piv = next((i for i in range(k, size) if a[i][i] != 0), None)
        if piv is None:
            off = next(((i, j) for i in range(k, size) for j in range(i + 1, size) if a[i][j] != 0), None)
            if off is None:
                break
            i, j = off
            # e_i <- e_i + e_j makes a[i][i] = 2 a[i][j] + a[j][j] = 2 a[i][j] (a[j][j] == 0)
            for c in range(size):
                a[i][c] += a[j][c]
            for r in range(size):
                a[r][i] += a[r][j]
            piv = i
        a[k], a[piv] = a[piv], a[k]
        for row in a:
            row[k], row[piv] = row[piv], row[k]
        d = a[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, size):
            f = a[i][k] / d
            if f:
                for c in range(size):
                    a[i][c] -= f * a[k][c]
                for r in range(size):
                    a[r][i] -= f * a[r][k]
        k += 1
    return pos, neg, n - pos - neg
