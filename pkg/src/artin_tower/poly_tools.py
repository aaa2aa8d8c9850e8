"""Polynomials over tower levels, minimal polynomials, normal-basis test."""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .tower_field import DTYPE, ConsistencyError, LevelError, TowerContext, TowerElement

DEFAULT_DEGREE_BUDGET = 128


class DegreeBudgetExceeded(RuntimeError):
    pass


class DensePoly:
    """Polynomial with coefficients in L_level, lowest degree first.

    Coefficients are kept as a ``(deg + 1, p**(level+1))`` array, trimmed so
    the leading row is nonzero; the zero polynomial has no rows.
    """

    __slots__ = ("p", "level", "_c")

    def __init__(self, p: int, level: int, rows):
        width = p ** (level + 1)
        arr = np.asarray(rows, dtype=DTYPE).reshape(-1, width) % p
        nz = np.flatnonzero(arr.any(axis=1))
        arr = arr[: nz[-1] + 1] if len(nz) else arr[:0]
        arr.setflags(write=False)
        self.p = p
        self.level = level
        self._c = arr

    @classmethod
    def from_ints(cls, p: int, coeffs: Sequence[int]) -> "DensePoly":
        """F_p polynomial from residues, lowest degree first."""
        return cls(p, -1, [[c] for c in coeffs])

    @classmethod
    def from_elements(cls, coeffs: Sequence[TowerElement]) -> "DensePoly":
        levels = {c.level for c in coeffs}
        if len(levels) != 1:
            raise LevelError("coefficients at mixed levels")
        p = coeffs[0].p
        return cls(p, levels.pop(), np.stack([c.values for c in coeffs]))

    @classmethod
    def monomial(cls, p: int, level: int, degree: int, coeff: int = 1) -> "DensePoly":
        rows = np.zeros((degree + 1, p ** (level + 1)), dtype=DTYPE)
        rows[degree, 0] = coeff
        return cls(p, level, rows)

    @property
    def rows(self) -> np.ndarray:
        return self._c

    @property
    def coeffs(self) -> tuple[TowerElement, ...]:
        return tuple(TowerElement(self.p, self.level, r) for r in self._c)

    def int_coeffs(self) -> list[int]:
        """Residues of an F_p polynomial, lowest degree first."""
        if self.level != -1:
            raise LevelError("only F_p polynomials have integer coefficients")
        return [int(r[0]) for r in self._c]

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def is_monic(self) -> bool:
        return not self.is_zero() and self._c[-1][0] == 1 and not self._c[-1][1:].any()

    def _pad(self, n: int) -> np.ndarray:
        out = np.zeros((n, self._c.shape[1]), dtype=DTYPE)
        out[: len(self._c)] = self._c
        return out

    def _compatible(self, other: "DensePoly") -> None:
        if self.p != other.p or self.level != other.level:
            raise LevelError(
                f"polynomials over (p={self.p}, L_{self.level}) and (p={other.p}, L_{other.level})"
            )

    def __add__(self, other: "DensePoly") -> "DensePoly":
        self._compatible(other)
        n = max(len(self._c), len(other._c))
        return DensePoly(self.p, self.level, self._pad(n) + other._pad(n))

    def __sub__(self, other: "DensePoly") -> "DensePoly":
        self._compatible(other)
        n = max(len(self._c), len(other._c))
        return DensePoly(self.p, self.level, self._pad(n) - other._pad(n))

    def __neg__(self) -> "DensePoly":
        return DensePoly(self.p, self.level, -self._c)

    def __eq__(self, other):
        if not isinstance(other, DensePoly):
            return NotImplemented
        return (
            self.p == other.p and self.level == other.level and np.array_equal(self._c, other._c)
        )

    def __hash__(self):
        return hash((self.p, self.level, self._c.tobytes()))

    def __str__(self):
        return format_poly(self) if self.level == -1 else repr(self)

    def __repr__(self):
        if self.level == -1:
            return f"DensePoly(p={self.p}, {format_poly(self)})"
        return f"DensePoly(p={self.p}, level={self.level}, degree={self.degree})"


def _scale_rows(ctx: TowerContext | None, p: int, level: int, rows: np.ndarray, c: np.ndarray):
    """Multiply every row (an L_level element) by the single element ``c``."""
    if level == -1:
        return rows * c[0] % p
    if ctx is None:
        raise ValueError("a TowerContext is required for coefficients above F_p")
    return ctx.mul_batch(level, rows, np.broadcast_to(c, rows.shape))


def poly_mul(f: DensePoly, g: DensePoly, ctx: TowerContext | None = None) -> DensePoly:
    f._compatible(g)
    if f.is_zero() or g.is_zero():
        return DensePoly(f.p, f.level, [])
    p, level = f.p, f.level
    out = np.zeros((f.degree + g.degree + 1, f.rows.shape[1]), dtype=DTYPE)
    short, long_ = (f, g) if len(f.rows) <= len(g.rows) else (g, f)
    for k, c in enumerate(short.rows):
        if c.any():
            out[k : k + len(long_.rows)] += _scale_rows(ctx, p, level, long_.rows, c)
    return DensePoly(p, level, out)


def poly_compose(f: DensePoly, g: DensePoly, ctx: TowerContext | None = None) -> DensePoly:
    """``f(g(X))`` by Horner's rule."""
    f._compatible(g)
    acc = DensePoly(f.p, f.level, [])
    for row in f.rows[::-1]:
        acc = poly_mul(acc, g, ctx) + DensePoly(f.p, f.level, row[None, :])
    return acc


def poly_pow(f: DensePoly, e: int, ctx: TowerContext | None = None) -> DensePoly:
    result = DensePoly.monomial(f.p, f.level, 0)
    for bit in bin(e)[2:]:
        result = poly_mul(result, result, ctx)
        if bit == "1":
            result = poly_mul(result, f, ctx)
    return result


def poly_arith(f: DensePoly, g: DensePoly, op: str, ctx: TowerContext | None = None) -> DensePoly:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return poly_mul(f, g, ctx)
    if op == "compose":
        return poly_compose(f, g, ctx)
    raise ValueError(f"unknown op {op!r}")


def evaluate(ctx: TowerContext, f: DensePoly, x: TowerElement) -> TowerElement:
    """``f(x)`` with the coefficients embedded into the level of ``x``."""
    if f.level > x.level:
        raise LevelError("coefficients live above the evaluation point")
    acc = ctx.zero(x.level)
    for c in reversed(f.coeffs):
        acc = ctx.mul(acc, x) + ctx.embed(c, x.level)
    return acc


# -- text form ---------------------------------------------------------------


def format_poly(f: DensePoly) -> str:
    """``X^4 + X + 1`` style, descending degree, zero terms omitted."""
    if f.is_zero():
        return "0"
    terms = []
    for k, c in reversed(list(enumerate(f.int_coeffs()))):
        if c == 0:
            continue
        mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return " + ".join(terms)


_TERM = re.compile(r"^(\d*)\s*\*?\s*(X(?:\^(\d+))?)?$")


def parse_poly(p: int, text: str) -> DensePoly:
    coeffs: dict[int, int] = {}
    for raw in text.split("+"):
        term = raw.strip()
        m = _TERM.match(term)
        if not term or not m or (not m.group(1) and not m.group(2)):
            raise ValueError(f"malformed term {term!r}")
        c = int(m.group(1)) if m.group(1) else 1
        k = 0 if not m.group(2) else int(m.group(3) or 1)
        coeffs[k] = (coeffs.get(k, 0) + c) % p
    top = max(coeffs, default=0)
    return DensePoly.from_ints(p, [coeffs.get(k, 0) for k in range(top + 1)])


# -- minimal polynomials -----------------------------------------------------


def frobenius_orbit(ctx: TowerContext, x: TowerElement, limit: int) -> list[TowerElement]:
    """``[x, x^p, x^(p^2), ...]`` up to the first repeat of ``x``."""
    orbit = [x]
    y = ctx.frobenius(x)
    while y != x:
        if len(orbit) >= limit:
            raise DegreeBudgetExceeded(f"Frobenius orbit longer than {limit}")
        orbit.append(y)
        y = ctx.frobenius(y)
    return orbit


def minimal_polynomial(
    ctx: TowerContext, x: TowerElement, budget: int = DEFAULT_DEGREE_BUDGET
) -> DensePoly:
    """Minimal polynomial over F_p as the product of ``X - y`` over the orbit of ``x``."""
    if x.level >= 0 and ctx.dim(x.level) > budget:
        raise DegreeBudgetExceeded(f"L_{x.level} has degree {ctx.dim(x.level)} > budget {budget}")
    orbit = frobenius_orbit(ctx, x, budget)
    p, level = ctx.p, x.level
    width = ctx.dim(level)
    # running product, lowest degree first
    acc = np.zeros((len(orbit) + 1, width), dtype=DTYPE)
    acc[0, 0] = 1
    deg = 0
    for y in orbit:
        shifted = np.zeros_like(acc)
        shifted[1 : deg + 2] = acc[: deg + 1]
        if level == -1:
            scaled = acc[: deg + 1] * y.values[0] % p
        else:
            scaled = ctx.mul_batch(level, acc[: deg + 1], np.broadcast_to(y.values, (deg + 1, width)))
        shifted[: deg + 1] -= scaled
        acc = shifted % p
        deg += 1
    if acc[:, 1:].any():
        raise ConsistencyError("orbit product has a coefficient outside F_p")
    return DensePoly(p, -1, acc[:, :1])


def _fp(p: int, coeffs: Sequence[int]) -> DensePoly:
    return DensePoly.from_ints(p, coeffs)


def artin_schreier_substitution(p: int) -> DensePoly:
    """``X^p - X`` over F_p."""
    return _fp(p, [0, -1] + [0] * (p - 2) + [1])


def degree_check(ctx: TowerContext, i: int, budget: int = DEFAULT_DEGREE_BUDGET) -> bool:
    """Both c_i and a_i have degree ``p**(i+1)`` over F_p."""
    n = ctx.dim(i)
    c = minimal_polynomial(ctx, ctx.canonical_generator(i), budget)
    a = minimal_polynomial(ctx, ctx.a(i), budget)
    return c.degree == n and a.degree == n


def composition_identity_sides(ctx: TowerContext, i: int, budget: int = DEFAULT_DEGREE_BUDGET):
    """Minimal polynomial of c_i, and that of a_{i-1} composed with ``X^p - X``."""
    if i < 1:
        raise LevelError("composition identity needs i >= 1")
    left = minimal_polynomial(ctx, ctx.canonical_generator(i), budget)
    inner = minimal_polynomial(ctx, ctx.a(i - 1), budget)
    right = poly_compose(inner, artin_schreier_substitution(ctx.p))
    return left, right


def composition_identity_check(ctx: TowerContext, i: int, budget: int = DEFAULT_DEGREE_BUDGET) -> bool:
    left, right = composition_identity_sides(ctx, i, budget)
    return left == right


def c1_closed_form(p: int) -> DensePoly:
    """Closed form ``X^(p^2) + (X^p - X - 1)^(p-1) - X^p - 2`` reduced mod p."""
    as_poly = _fp(p, [-1, -1] + [0] * (p - 2) + [1])
    return (
        DensePoly.monomial(p, -1, p * p)
        + poly_pow(as_poly, p - 1)
        - DensePoly.monomial(p, -1, p)
        - _fp(p, [2])
    )


def c0_power_closed_form(p: int) -> DensePoly:
    """``X^p + (X - 1)^(p-1) - 2``: minimal polynomial of ``c_0^(p-1)``."""
    return DensePoly.monomial(p, -1, p) + poly_pow(_fp(p, [-1, 1]), p - 1) - _fp(p, [2])


def c0_power_check(ctx: TowerContext, budget: int = DEFAULT_DEGREE_BUDGET) -> bool:
    c0 = ctx.canonical_generator(0)
    power = ctx.pow(c0, ctx.p - 1)
    if power != ctx.a(0):
        return False
    return minimal_polynomial(ctx, power, budget) == c0_power_closed_form(ctx.p)


# -- normal basis ------------------------------------------------------------


def determinant(ctx: TowerContext | None, level: int, matrix: list[list[TowerElement]]) -> TowerElement:
    """Determinant over L_level by Gaussian elimination (first nonzero pivot)."""
    n = len(matrix)
    m = [list(row) for row in matrix]
    p = m[0][0].p

    def mul(x, y):
        if level == -1:
            return TowerElement(p, -1, [x.coeffs * y.coeffs])
        return ctx.mul(x, y)

    def inv(x):
        if level == -1:
            return TowerElement(p, -1, [pow(x.coeffs, p - 2, p)])
        return ctx.inv(x)

    det = TowerElement(p, level, np.eye(1, p ** (level + 1), dtype=DTYPE)[0])
    for col in range(n):
        pivot = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if pivot is None:
            return TowerElement(p, level, np.zeros(p ** (level + 1), dtype=DTYPE))
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = mul(det, m[col][col])
        piv_inv = inv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col].is_zero():
                continue
            f = mul(m[r][col], piv_inv)
            m[r] = [m[r][k] - mul(f, m[col][k]) for k in range(n)]
    return det


@dataclass(frozen=True)
class NormalBasisResult:
    is_basis: bool
    det: TowerElement
    factored_det: TowerElement
    matrix_factorization_holds: bool

    @property
    def consistent(self) -> bool:
        return self.det == self.factored_det and self.matrix_factorization_holds


def conjugate_matrix(ctx: TowerContext, i: int) -> list[list[TowerElement]]:
    """Column k: coordinates of ``sigma_i**k (a_i)`` in the basis ``c_i^(p-1), ..., c_i, 1``."""
    p = ctx.p
    cols = [list(reversed(x.coeffs)) for x in ctx.conjugates(ctx.a(i))]
    return [[cols[k][r] for k in range(p)] for r in range(p)]


def vandermonde(p: int, i: int) -> list[list[int]]:
    """Rows ``(node**r)`` for nodes ``k * (-1)**i``, k < p, over F_p."""
    nodes = [k * (-1) ** i % p for k in range(p)]
    return [[pow(x, r, p) for x in nodes] for r in range(p)]


def normal_basis_check(ctx: TowerContext, i: int) -> NormalBasisResult:
    """Whether the ``sigma_i``-conjugates of a_i form a basis of L_i over L_{i-1}.

    The conjugate matrix should factor as ``diag(binom(p-1, r)) * V * a_{i-1}``
    with V the Vandermonde matrix on ``k * (-1)**i``; that product is checked
    entrywise and its determinant compared with the eliminated one.
    """
    p = ctx.p
    sub = i - 1
    m = conjugate_matrix(ctx, i)
    det = determinant(ctx, sub, m)

    a_prev = ctx.a(sub)
    v = vandermonde(p, i)
    binoms = [comb(p - 1, r) % p for r in range(p)]
    holds = all(
        m[r][k] == a_prev.scale(binoms[r] * v[r][k]) for r in range(p) for k in range(p)
    )
    det_d = 1
    for b in binoms:
        det_d = det_d * b % p
    det_v = vandermonde_det(p, i)
    factored = ctx.pow(a_prev, p).scale(det_d * det_v)
    return NormalBasisResult(
        is_basis=not det.is_zero(),
        det=det,
        factored_det=factored,
        matrix_factorization_holds=holds,
    )


def vandermonde_det(p: int, i: int) -> int:
    v = vandermonde(p, i)
    return determinant(None, -1, [[TowerElement(p, -1, [x]) for x in row] for row in v]).coeffs
