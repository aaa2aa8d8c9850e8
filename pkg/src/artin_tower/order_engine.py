"""Multiplicative orders of c_i and a_i, and the identities relating them.

``M_i`` is the least ``m >= 1`` with ``c_i**m`` in L_{i-1}.  Everything here
is computed directly (``O(a_i)`` is never inferred from ``O(c_i)``) and then
cross-checked; a failed cross-check means the arithmetic is wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bigint_factor import (
    DETERMINISTIC,
    PROBABLE,
    ContractViolation,
    Factorization,
    reduce_order,
)
from .tower_field import ConsistencyError, LevelError, TowerContext, TowerElement


class OrderUncomputable(RuntimeError):
    """A needed factorization is missing; carries whatever bounds were found."""

    def __init__(self, message: str, divides: int | None = None, multiple_of: int | None = None):
        super().__init__(message)
        self.divides = divides
        self.multiple_of = multiple_of


@dataclass(frozen=True)
class OrderReport:
    p: int
    i: int
    n_i: int
    n_i_factorization: Factorization | None
    m_i: int | None
    order_c: int | None
    order_a: int | None
    m_equals_n: bool | None
    certainty: str
    # (divisor, multiple) bounds on M_i when N_i is not fully factored
    m_bounds: tuple[int, int] | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.m_i is not None and self.order_c is not None and self.order_a is not None

    @property
    def exception_level(self) -> bool:
        """The one place where O(c_i) and O(a_i) differ."""
        return self.p == 2 and self.i == 1


def element_order(ctx: TowerContext, x: TowerElement, e: int, e_fact: Factorization | None) -> int:
    """Exact order of ``x`` given ``x**e == 1`` and the factorization of ``e``."""
    if e_fact is None or e_fact.value != e:
        raise OrderUncomputable(f"exponent {e} is not fully factored", divides=e)
    try:
        return reduce_order(x, e, e_fact, ctx.pow, TowerElement.is_one)
    except ContractViolation as exc:
        raise ConsistencyError(f"order bound failed: {exc}") from None


def order_exponent_bound(ctx: TowerContext, i: int) -> tuple[int, Factorization]:
    """Exponent killing both c_i and a_i, with its factorization.

    ``N_0 ... N_i`` in general; for p = 2 and i >= 2 the factor ``N_0 = 3``
    is dropped.  The N_j are pairwise coprime, so the factorizations are
    simply merged.
    """
    ctx._level_ok(i)
    if i < 0:
        raise LevelError("order bound needs i >= 0")
    start = 1 if (ctx.p == 2 and i >= 2) else 0
    e = 1
    fact = Factorization()
    for j in range(start, i + 1):
        f = ctx.n_factorizations[j]
        if f is None:
            raise OrderUncomputable(f"N_{j} = {ctx.n_values[j]} is not fully factored")
        e *= ctx.n_values[j]
        fact = fact.merge(f)
    return e, fact


def order_mod_subfield(ctx: TowerContext, i: int) -> int:
    """``M_i``: strip primes from ``N_i`` while ``c_i**m`` stays in L_{i-1}."""
    ctx._level_ok(i)
    if i < 0:
        raise LevelError("M_i needs i >= 0")
    n = ctx.n_values[i]
    fact = ctx.n_factorizations[i]
    c = ctx.canonical_generator(i)
    in_lower = lambda y: ctx.is_in_subfield(y, i - 1)  # noqa: E731
    if fact is None:
        gap = ctx.factor_gaps.get(i)
        if gap is None:
            raise OrderUncomputable(f"N_{i} is not factored", divides=n)
        known = gap.partial
        cofactor = gap.cofactor
        # the order of c^cofactor modulo L_{i-1} is the known-prime part of M_i
        y = ctx.pow(c, cofactor)
        part = reduce_order(y, known.value, known, ctx.pow, in_lower)
        raise OrderUncomputable(
            f"N_{i} has an unfactored cofactor {cofactor}",
            divides=part * cofactor,
            multiple_of=part,
        )
    try:
        return reduce_order(c, n, fact, ctx.pow, in_lower)
    except ContractViolation as exc:
        raise ConsistencyError(f"c_{i}^N_{i} is not in L_{i - 1}: {exc}") from None


def brute_force_order(ctx: TowerContext, x: TowerElement, limit: int = 10**6) -> int:
    """Order by stepping through ``x, x^2, x^3, ...``; only for tiny groups."""
    if x.is_zero():
        raise ZeroDivisionError("zero has no multiplicative order")
    y = x
    k = 1
    while not y.is_one():
        y = ctx.mul(y, x)
        k += 1
        if k > limit:
            raise RuntimeError(f"order exceeds {limit}")
    return k


# -- lower bounds and congruences --------------------------------------------


def order_lower_bound(p: int, i: int, n_values: tuple[int, ...] | None = None) -> int:
    """Guaranteed lower bound on O(c_i).

    Odd p: ``(1 + 2p)(1 + 2p^2)...(1 + 2p^(i+1))``.  For p = 2 the first five
    levels are known exactly (``O(c_0) = 3``, ``O(c_1) = 15``, then
    ``N_1...N_i``) and beyond that ``N_1 N_2 N_3 N_4 (1 + 2^7)...(1 + 2^(i+2))``.
    """
    if p != 2:
        return math.prod(1 + 2 * p ** (j + 1) for j in range(i + 1))
    fermat = [2 ** (2**j) + 1 for j in range(5)]
    if i == 0:
        return 3
    if i == 1:
        return 15
    head = math.prod(fermat[1 : min(i, 4) + 1])
    return head * math.prod(1 + 2 ** (j + 2) for j in range(5, i + 1))


def m_congruence_ok(p: int, i: int, m: int) -> bool:
    """``M_i > 1``, ``M_i = 1 mod p^(i+1)``, sharpened to ``2p^(i+1)`` (odd p) or ``2^(i+2)`` (p = 2, i >= 2)."""
    if m <= 1:
        return False
    if p != 2:
        return m % (2 * p ** (i + 1)) == 1
    if i >= 2:
        return m % 2 ** (i + 2) == 1
    return m % p ** (i + 1) == 1


def product_formula(p: int, i: int, ms: list[int], ns: tuple[int, ...]) -> int:
    """O(c_i) predicted from M_0..M_i (odd p) or N_0, N_1, M_1..M_i (p = 2)."""
    if p != 2:
        return math.prod(ms[: i + 1])
    if i == 0:
        return ns[0]
    if i == 1:
        return ns[0] * ns[1]
    return math.prod(ms[1 : i + 1])


# -- reports -----------------------------------------------------------------


def _certainty(*facts: Factorization | None) -> str:
    return DETERMINISTIC if all(f is not None and f.is_proved for f in facts) else PROBABLE


def order_table(ctx: TowerContext, upto: int | None = None) -> list[OrderReport]:
    """Reports for levels ``0..upto``, each cross-checked against the earlier ones.

    Levels past a factorization gap still get a report, with orders left as
    ``None`` (and bounds on M_i where a partial factorization exists).
    """
    upto = ctx.i_max if upto is None else upto
    ctx._level_ok(upto)
    reports: list[OrderReport] = []
    for i in range(upto + 1):
        reports.append(_report(ctx, i, reports))
    return reports


def full_report(ctx: TowerContext, i: int) -> OrderReport:
    return order_table(ctx, i)[-1]


def _report(ctx: TowerContext, i: int, prior: list[OrderReport]) -> OrderReport:
    p = ctx.p
    n = ctx.n_values[i]
    n_fact = ctx.n_factorizations[i]
    m = order_c = order_a = None
    bounds = None
    try:
        m = order_mod_subfield(ctx, i)
    except OrderUncomputable as exc:
        if exc.multiple_of is not None:
            bounds = (exc.divides, exc.multiple_of)
    try:
        e, e_fact = order_exponent_bound(ctx, i)
        order_c = element_order(ctx, ctx.canonical_generator(i), e, e_fact)
        order_a = element_order(ctx, ctx.a(i), e, e_fact)
    except OrderUncomputable:
        pass

    certainty = _certainty(*ctx.n_factorizations[: i + 1])
    checks: dict[str, bool] = {}
    prev_a = 1 if i == 0 else prior[-1].order_a

    def require(name: str, ok: bool) -> None:
        checks[name] = ok
        if not ok:
            raise ConsistencyError(f"level {i} (p={p}): {name} violated")

    if m is not None:
        require("M_i divides N_i", n % m == 0)
        require("M_i congruence", m_congruence_ok(p, i, m))
        if p == 2 and i <= 4:
            require("M_i = N_i at Fermat-prime levels", m == n)
        if prev_a is not None:
            require("gcd(M_i, O(a_{i-1})) = 1", math.gcd(m, prev_a) == 1)
    if order_c is not None:
        require("O(c_i) lower bound", order_c >= order_lower_bound(p, i))
        if m is not None and prev_a is not None:
            require("O(c_i) = M_i O(a_{i-1})", order_c == m * prev_a)
        ms = [r.m_i for r in prior] + [m]
        if all(v is not None for v in (ms if p != 2 else ms[1:])):
            require("O(c_i) product formula", order_c == product_formula(p, i, ms, ctx.n_values))
    if order_c is not None and order_a is not None:
        same = order_c == order_a
        require("O(c_i) = O(a_i) except at p=2, i=1", same != (p == 2 and i == 1))

    return OrderReport(
        p=p,
        i=i,
        n_i=n,
        n_i_factorization=n_fact,
        m_i=m,
        order_c=order_c,
        order_a=order_a,
        m_equals_n=None if m is None else m == n,
        certainty=certainty,
        m_bounds=bounds,
        checks=checks,
    )


def m_equals_n_table(ctx: TowerContext, levels) -> dict[int, bool | None]:
    """``M_i == N_i`` for each requested level of the p = 2 tower; None marks a factorization gap."""
    if ctx.p != 2:
        raise ValueError("the M_i = N_i table is about p = 2")
    out: dict[int, bool | None] = {}
    for i in levels:
        try:
            out[i] = order_mod_subfield(ctx, i) == ctx.n_values[i]
        except OrderUncomputable:
            out[i] = None
    return out
