"""Artin-Schreier tower F_p = L_{-1} < L_0 < L_1 < ... and its arithmetic.

An element of ``L_i`` is ``sum(coeffs[k] * c_i**k for k < p)`` with each
``coeffs[k]`` in ``L_{i-1}``.  Storage is the flattened coordinate vector of
length ``p**(i+1)`` over F_p: block ``k`` (of width ``p**i``) holds
``coeffs[k]``, recursively.  Every level is reduced with the single relation
``c_i**p = c_i + a_{i-1}``.

Arithmetic is batched: a product at level ``i`` issues all of its level
``i-1`` sub-products as one call, so the whole multiplication bottoms out in
a handful of vectorised operations on F_p.
"""

from __future__ import annotations

import math
import re
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .bigint_factor import (
    Budget,
    FactorCache,
    Factorization,
    IncompleteFactorizationError,
    factorize,
    is_prime,
)

DTYPE = np.int64
MAX_P = 7
# rows per batched multiplication at the F_p level before splitting the batch
_MAX_LEAF_ROWS = 1 << 22


class LevelError(ValueError):
    """Operands live at different levels, or a level is out of range."""


class ConsistencyError(RuntimeError):
    """An identity that must hold in the tower failed: an arithmetic bug."""


def n_value(p: int, i: int) -> int:
    """``N_i = (p**(p**(i+1)) - 1) / (p**(p**i) - 1)``."""
    q = p ** (p**i)
    return (q**p - 1) // (q - 1)


class TowerElement:
    """Immutable element of ``L_level`` for a fixed prime ``p``."""

    __slots__ = ("p", "level", "_v", "_hash")

    def __init__(self, p: int, level: int, values):
        v = np.asarray(values, dtype=DTYPE) % p
        if v.shape != (p ** (level + 1),):
            raise ValueError(
                f"level {level} element needs {p ** (level + 1)} coordinates, got {v.shape}"
            )
        v.setflags(write=False)
        self.p = p
        self.level = level
        self._v = v
        self._hash = None

    @property
    def values(self) -> np.ndarray:
        """Read-only flat coordinate vector over F_p."""
        return self._v

    @property
    def coeffs(self):
        """The prime-field residue at level -1, else ``p`` elements of level - 1."""
        if self.level == -1:
            return int(self._v[0])
        w = self.p**self.level
        return tuple(
            TowerElement(self.p, self.level - 1, self._v[k * w : (k + 1) * w]) for k in range(self.p)
        )

    def is_zero(self) -> bool:
        return not self._v.any()

    def is_one(self) -> bool:
        return self._v[0] == 1 and not self._v[1:].any()

    def _check(self, other: "TowerElement"):
        if not isinstance(other, TowerElement):
            return NotImplemented
        if other.p != self.p or other.level != self.level:
            raise LevelError(
                f"operands at (p={self.p}, level {self.level}) and (p={other.p}, level {other.level})"
            )
        return None

    def __add__(self, other):
        if (r := self._check(other)) is not None:
            return r
        return TowerElement(self.p, self.level, self._v + other._v)

    def __sub__(self, other):
        if (r := self._check(other)) is not None:
            return r
        return TowerElement(self.p, self.level, self._v - other._v)

    def __neg__(self):
        return TowerElement(self.p, self.level, -self._v)

    def scale(self, k: int) -> "TowerElement":
        """Multiply by the prime-field scalar ``k``."""
        return TowerElement(self.p, self.level, self._v * (k % self.p))

    def __eq__(self, other):
        if not isinstance(other, TowerElement):
            return NotImplemented
        return (
            self.p == other.p and self.level == other.level and np.array_equal(self._v, other._v)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.level, self._v.tobytes()))
        return self._hash

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"TowerElement(p={self.p}, level={self.level}, {format_element(self)})"


# -- text form ---------------------------------------------------------------


def format_element(x: TowerElement) -> str:
    """Canonical nested form, e.g. ``[[0,0],[1,0]]`` for c_1 when p = 2."""

    def rec(v: np.ndarray, level: int) -> str:
        if level == -1:
            return str(int(v[0]))
        w = len(v) // x.p
        return "[" + ",".join(rec(v[k * w : (k + 1) * w], level - 1) for k in range(x.p)) + "]"

    return rec(x.values, x.level)


_TOKEN = re.compile(r"\s*(\[|\]|,|\d+)")


def parse_element(p: int, text: str) -> TowerElement:
    """Inverse of :func:`format_element`; the level is read off the nesting depth."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character at offset {pos} in {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
    it = iter(tokens)

    def parse(tok):
        if tok.isdigit():
            value = int(tok)
            if value >= p:
                raise ValueError(f"residue {value} is not in [0, {p})")
            return -1, [value]
        if tok != "[":
            raise ValueError(f"unexpected token {tok!r}")
        parts = []
        while True:
            parts.append(parse(next(it)))
            sep = next(it)
            if sep == "]":
                break
            if sep != ",":
                raise ValueError(f"expected ',' or ']', got {sep!r}")
        if len(parts) != p:
            raise ValueError(f"expected {p} coefficients, got {len(parts)}")
        levels = {lv for lv, _ in parts}
        if len(levels) != 1:
            raise ValueError("coefficients at mixed levels")
        return levels.pop() + 1, [c for _, vs in parts for c in vs]

    try:
        level, values = parse(next(it))
        if next(it, None) is not None:
            raise ValueError("trailing input")
    except StopIteration:
        raise ValueError(f"truncated element {text!r}") from None
    return TowerElement(p, level, values)


# -- the tower ---------------------------------------------------------------


class TowerContext:
    """The tower for one prime ``p`` built up to level ``i_max``.

    Holds the constants ``a_j`` for ``-1 <= j <= i_max``, the integers
    ``N_j`` and whatever factorizations of them the budget allowed.
    Immutable once constructed.
    """

    def __init__(
        self,
        p: int,
        i_max: int,
        cache: FactorCache | None = None,
        factor_budget: Budget | None = None,
        factor: bool = True,
        max_p: int = MAX_P,
    ):
        if not isinstance(p, int) or p < 2 or not is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if p > max_p:
            raise ValueError(f"p = {p} exceeds the supported maximum {max_p}")
        if i_max < -1:
            raise LevelError(f"i_max must be >= -1, got {i_max}")
        self.p = p
        self.i_max = i_max
        # binom(k, j) * s**(k-j) with s = +1 / -1: sigma_i on coefficient vectors
        self._shift = {
            s: np.array(
                [[comb(k, j) * s ** (k - j) % p if k >= j else 0 for k in range(p)] for j in range(p)],
                dtype=DTYPE,
            )
            for s in (1, -1)
        }
        self._a: list[np.ndarray] = [np.ones(1, dtype=DTYPE)]
        self._frob_basis: list[np.ndarray] = []
        for j in range(i_max + 1):
            c = self.canonical_generator(j).values
            cp = c
            for _ in range(p - 2):
                cp = self._mul1(j, cp, c)
            a_j = self._mul1(j, self._embed_values(self._a[-1], j - 1, j), cp)
            a_j.setflags(write=False)
            self._a.append(a_j)
        for j in range(i_max + 1):
            # (c_j + a_{j-1})**k, the images of the powers of c_j under x -> x^p
            base = self.canonical_generator(j).values + self._embed_values(self._a[j], j - 1, j)
            rows = [self.one(j).values]
            for _ in range(p - 1):
                rows.append(self._mul1(j, rows[-1], base))
            fb = np.stack(rows) % p
            fb.setflags(write=False)
            self._frob_basis.append(fb)

        self.a_consts = tuple(TowerElement(p, j, self._a[j + 1]) for j in range(-1, i_max + 1))
        self.n_values = tuple(n_value(p, j) for j in range(i_max + 1))
        facts: list[Factorization | None] = []
        self.factor_gaps: dict[int, IncompleteFactorizationError] = {}
        for j, n in enumerate(self.n_values):
            if not factor:
                facts.append(cache.get(n) if cache is not None else None)
                continue
            try:
                facts.append(factorize(n, factor_budget, cache))
            except IncompleteFactorizationError as exc:
                facts.append(None)
                self.factor_gaps[j] = exc
        self.n_factorizations = tuple(facts)

        for j in range(i_max + 1):
            t = self.trace_to_prime(self.a(j))
            if t != (-1) ** (j + 1) % p:
                raise ConsistencyError(f"trace of a_{j} is {t}, expected {(-1) ** (j + 1) % p}")

    def __repr__(self):
        return f"TowerContext(p={self.p}, i_max={self.i_max})"

    # -- element constructors ------------------------------------------------

    def _level_ok(self, i: int) -> None:
        if not -1 <= i <= self.i_max:
            raise LevelError(f"level {i} outside [-1, {self.i_max}]")

    def dim(self, i: int) -> int:
        """Dimension of L_i over F_p."""
        return self.p ** (i + 1)

    def zero(self, i: int) -> TowerElement:
        self._level_ok(i)
        return TowerElement(self.p, i, np.zeros(self.dim(i), dtype=DTYPE))

    def one(self, i: int) -> TowerElement:
        self._level_ok(i)
        v = np.zeros(self.dim(i), dtype=DTYPE)
        v[0] = 1
        return TowerElement(self.p, i, v)

    def scalar(self, k: int, i: int) -> TowerElement:
        return self.one(i).scale(k)

    def element(self, i: int, values: Iterable[int]) -> TowerElement:
        self._level_ok(i)
        return TowerElement(self.p, i, list(values))

    def from_coeffs(self, coeffs: Sequence[TowerElement]) -> TowerElement:
        """Assemble ``sum(coeffs[k] * c_i**k)`` from ``p`` elements of L_{i-1}."""
        if len(coeffs) != self.p:
            raise ValueError(f"need exactly {self.p} coefficients")
        levels = {c.level for c in coeffs}
        if len(levels) != 1:
            raise LevelError("coefficients at mixed levels")
        i = levels.pop() + 1
        self._level_ok(i)
        return TowerElement(self.p, i, np.concatenate([c.values for c in coeffs]))

    def canonical_generator(self, i: int) -> TowerElement:
        """``c_i``; ``c_{-1} = 1``."""
        self._level_ok(i)
        if i == -1:
            return self.one(-1)
        v = np.zeros(self.dim(i), dtype=DTYPE)
        v[self.p**i] = 1
        return TowerElement(self.p, i, v)

    def a(self, i: int) -> TowerElement:
        """``a_i = (c_{-1} ... c_i)**(p-1)`` at level i."""
        self._level_ok(i)
        return self.a_consts[i + 1]

    def random_element(self, i: int, rng: np.random.Generator, nonzero: bool = False) -> TowerElement:
        self._level_ok(i)
        while True:
            x = TowerElement(self.p, i, rng.integers(0, self.p, self.dim(i)))
            if not (nonzero and x.is_zero()):
                return x

    def embed(self, x: TowerElement, i: int) -> TowerElement:
        """The same field element viewed at level ``i >= x.level``."""
        self._level_ok(i)
        if i < x.level:
            raise LevelError(f"cannot embed level {x.level} into lower level {i}")
        return TowerElement(self.p, i, self._embed_values(x.values, x.level, i))

    def _embed_values(self, v: np.ndarray, j: int, i: int) -> np.ndarray:
        out = np.zeros(self.p ** (i + 1), dtype=DTYPE)
        out[: len(v)] = v
        return out

    # -- batched core --------------------------------------------------------

    def mul_batch(self, level: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Row-wise products of two ``(B, p**(level+1))`` arrays in L_level."""
        p = self.p
        if level == -1:
            return x * y % p
        fan = p * p + p - 1 if level > 0 else p * p
        rows = x.shape[0]
        leaf = rows * fan ** (level + 1)
        if leaf > _MAX_LEAF_ROWS and rows > 1:
            step = max(1, rows * _MAX_LEAF_ROWS // leaf)
            return np.concatenate(
                [self.mul_batch(level, x[s : s + step], y[s : s + step]) for s in range(0, rows, step)]
            )
        w = p**level
        xs = x.reshape(rows, p, w)
        ys = y.reshape(rows, p, w)
        left = np.repeat(xs, p, axis=1).reshape(-1, w)
        right = np.tile(ys, (1, p, 1)).reshape(-1, w)
        prod = self.mul_batch(level - 1, left, right).reshape(rows, p, p, w)
        conv = np.zeros((rows, 2 * p - 1, w), dtype=DTYPE)
        for k in range(p):
            conv[:, k : k + p] += prod[:, k]
        conv %= p
        out = conv[:, :p]
        high = conv[:, p:]
        # c^(p+k) = c^(k+1) + a_{level-1} c^k
        out[:, 1:] += high
        if level == 0:
            out[:, : p - 1] += high
        else:
            flat_high = high.reshape(-1, w)
            a_prev = np.broadcast_to(self._a[level], flat_high.shape)
            out[:, : p - 1] += self.mul_batch(level - 1, flat_high, a_prev).reshape(rows, p - 1, w)
        return (out % p).reshape(rows, p * w)

    def _mul1(self, level: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.mul_batch(level, x[None, :], y[None, :])[0]

    def sigma_batch(self, level: int, x: np.ndarray, power: int = 1) -> np.ndarray:
        """``sigma_level**power`` row-wise; fixes L_{level-1} and maps c_i to c_i + (-1)**i."""
        p = self.p
        w = p**level
        step = self._shift[(-1) ** level]
        mat = np.eye(p, dtype=DTYPE)
        for _ in range(power % p):
            mat = step @ mat % p
        xs = x.reshape(x.shape[0], p, w)
        return (np.einsum("jk,bkw->bjw", mat, xs) % p).reshape(x.shape)

    def frobenius_batch(self, level: int, x: np.ndarray) -> np.ndarray:
        """Row-wise ``x -> x**p`` computed structurally."""
        p = self.p
        if level == -1:
            return x % p
        rows = x.shape[0]
        w = p**level
        sub = self.frobenius_batch(level - 1, x.reshape(rows * p, w)).reshape(rows, p, w)
        basis = self._frob_basis[level].reshape(p, p, w)  # [k, j]: coeff j of (c + a)^k
        left = np.repeat(sub, p, axis=1).reshape(-1, w)  # [b, k, j] -> frob(b_k)
        right = np.broadcast_to(basis, (rows, p, p, w)).reshape(-1, w)
        prod = self.mul_batch(level - 1, left, right).reshape(rows, p, p, w)
        return (prod.sum(axis=1) % p).reshape(rows, p * w)

    # -- field operations ----------------------------------------------------

    def _same(self, x: TowerElement, y: TowerElement) -> None:
        if x.p != self.p or y.p != self.p:
            raise LevelError("element belongs to a tower over another prime")
        if x.level != y.level:
            raise LevelError(f"level mismatch: {x.level} vs {y.level}")
        self._level_ok(x.level)

    def add(self, x: TowerElement, y: TowerElement) -> TowerElement:
        self._same(x, y)
        return x + y

    def sub(self, x: TowerElement, y: TowerElement) -> TowerElement:
        self._same(x, y)
        return x - y

    def neg(self, x: TowerElement) -> TowerElement:
        return -x

    def mul(self, x: TowerElement, y: TowerElement) -> TowerElement:
        self._same(x, y)
        return TowerElement(self.p, x.level, self._mul1(x.level, x.values, y.values))

    def prod(self, xs: Iterable[TowerElement], level: int) -> TowerElement:
        acc = self.one(level)
        for x in xs:
            acc = self.mul(acc, x)
        return acc

    def pow(self, x: TowerElement, e: int) -> TowerElement:
        """Square-and-multiply; ``e`` is any non-negative int."""
        if e < 0:
            raise ValueError("negative exponents are not supported")
        self._same(x, x)
        level = x.level
        result = self.one(level).values
        base = x.values
        if e == 0:
            return self.one(level)
        for bit in bin(e)[2:]:
            result = self._mul1(level, result, result)
            if bit == "1":
                result = self._mul1(level, result, base)
        return TowerElement(self.p, level, result)

    def inv(self, x: TowerElement) -> TowerElement:
        """Inverse via extended Euclid against ``X**p - X - a_{i-1}`` over L_{i-1}."""
        self._same(x, x)
        if x.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        return TowerElement(self.p, x.level, self._inv(x.level, x.values))

    def _inv(self, level: int, v: np.ndarray) -> np.ndarray:
        p = self.p
        if level == -1:
            return np.array([pow(int(v[0]), p - 2, p)], dtype=DTYPE)
        w = p**level
        sub = level - 1

        def trim(f):
            while f and not f[-1].any():
                f.pop()
            return f

        def smul(c, f):
            if not f:
                return []
            return list(self.mul_batch(sub, np.stack(f), np.broadcast_to(c, (len(f), w))) % p)

        def psub(f, g):
            n = max(len(f), len(g))
            zero = np.zeros(w, dtype=DTYPE)
            return trim([
                ((f[k] if k < len(f) else zero) - (g[k] if k < len(g) else zero)) % p
                for k in range(n)
            ])

        def pmul(f, g):
            if not f or not g:
                return []
            out = [np.zeros(w, dtype=DTYPE) for _ in range(len(f) + len(g) - 1)]
            for k, fk in enumerate(f):
                for j, r in enumerate(smul(fk, g)):
                    out[k + j] = out[k + j] + r
            return trim([o % p for o in out])

        def divmod_(f, g):
            lead_inv = self._inv(sub, g[-1])
            q = [np.zeros(w, dtype=DTYPE) for _ in range(max(len(f) - len(g) + 1, 0))]
            r = list(f)
            while len(r) >= len(g):
                coef = self._mul1(sub, r[-1], lead_inv)
                shift = len(r) - len(g)
                q[shift] = coef
                r = psub(r, [np.zeros(w, dtype=DTYPE)] * shift + smul(coef, g))
            return trim(q), r

        zero = np.zeros(w, dtype=DTYPE)
        one = zero.copy()
        one[0] = 1
        modulus = [zero] * (p + 1)
        modulus[0] = (-self._a[level]) % p
        modulus[1] = (-one) % p
        modulus[p] = one
        r0, r1 = modulus, trim([v[k * w : (k + 1) * w].copy() for k in range(p)])
        s0, s1 = [], [one]
        while len(r1) > 1:
            q, r = divmod_(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, psub(s0, pmul(q, s1))
        u_inv = self._inv(sub, r1[0])
        s = smul(u_inv, s1)
        s += [zero] * (p - len(s))
        return np.concatenate(s) % p

    def div(self, x: TowerElement, y: TowerElement) -> TowerElement:
        return self.mul(x, self.inv(y))

    def frobenius(self, x: TowerElement) -> TowerElement:
        """``x**p`` via coefficient Frobenius and ``c_i -> c_i + a_{i-1}``."""
        self._same(x, x)
        return TowerElement(self.p, x.level, self.frobenius_batch(x.level, x.values[None, :])[0])

    def frobenius_iter(self, x: TowerElement, times: int) -> TowerElement:
        v = x.values[None, :]
        for _ in range(times):
            v = self.frobenius_batch(x.level, v)
        return TowerElement(self.p, x.level, v[0])

    def relative_frobenius(self, x: TowerElement, power: int = 1) -> TowerElement:
        """``sigma_i(x) = x**(p**(p**i))`` from ``sigma_i(c_i) = c_i + (-1)**i``."""
        self._same(x, x)
        if x.level < 0:
            raise LevelError("relative Frobenius needs level >= 0")
        return TowerElement(self.p, x.level, self.sigma_batch(x.level, x.values[None, :], power)[0])

    def conjugates(self, x: TowerElement) -> list[TowerElement]:
        """``[sigma_i**k (x) for k < p]``."""
        out = [x]
        for _ in range(self.p - 1):
            out.append(self.relative_frobenius(out[-1]))
        return out

    def _lower(self, x: TowerElement, what: str) -> TowerElement:
        """Coefficient 0 of an element that must lie in L_{i-1}."""
        if x.values[self.p**x.level :].any():
            raise ConsistencyError(f"{what} is not in L_{x.level - 1}")
        return x.coeffs[0]

    def trace_down(self, x: TowerElement) -> TowerElement:
        """Trace from L_i to L_{i-1}: the sum of the p conjugates."""
        conj = self.conjugates(x)
        total = conj[0]
        for c in conj[1:]:
            total = total + c
        return self._lower(total, "trace")

    def trace_to_prime(self, x: TowerElement) -> int:
        while x.level >= 0:
            x = self.trace_down(x)
        return x.coeffs

    def norm_down(self, x: TowerElement, method: str = "conjugates") -> TowerElement:
        """Norm from L_i to L_{i-1}, by conjugate product or as ``x**N_i``."""
        if x.level < 0:
            raise LevelError("norm needs level >= 0")
        if method == "conjugates":
            y = self.prod(self.conjugates(x), x.level)
        elif method == "power":
            y = self.pow(x, self.n_values[x.level])
        else:
            raise ValueError(f"unknown method {method!r}")
        return self._lower(y, "norm")

    def is_in_subfield(self, x: TowerElement, j: int) -> bool:
        """Whether ``x`` lies in L_j, by descending through Frobenius fixpoints."""
        if not -1 <= j < x.level:
            raise LevelError(f"target level {j} must satisfy -1 <= j < {x.level}")
        while x.level > j:
            if self.relative_frobenius(x) != x:
                return False
            x = x.coeffs[0]
        return True


def build_context(
    p: int,
    i_max: int,
    cache: FactorCache | None = None,
    factor_budget: Budget | None = None,
    factor: bool = True,
) -> TowerContext:
    return TowerContext(p, i_max, cache=cache, factor_budget=factor_budget, factor=factor)


def frobenius_fixed_power(p: int, i: int) -> int:
    """``p**(p**i)``, the exponent realised by sigma_i."""
    return p ** (p**i)


def order_of_field(p: int, i: int) -> int:
    return p ** (p ** (i + 1))


def binomial_row(p: int) -> list[int]:
    return [math.comb(p - 1, k) % p for k in range(p)]
