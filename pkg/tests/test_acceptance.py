"""Acceptance criteria 1-11.

Each test is tagged with its criterion number; the run ends with one
PASS/FAIL line per criterion (see conftest.py).  Contexts are built inside
the timed region so the runtime limits cover the whole computation.

Run just this file with ``pytest tests/test_acceptance.py`` or
``python tests/test_acceptance.py``; add ``--run-slow`` for M_7.
"""

import math
import time

import numpy as np
import pytest

from artin_tower import order_engine as oe
from artin_tower import poly_tools as pt
from artin_tower.bigint_factor import Budget
from artin_tower.cli import DEFAULT_MAX_LEVEL, seed_cache
from artin_tower.tower_field import build_context
from artin_tower.verify import integer_checks, run_checks, tower_checks

crit = pytest.mark.criterion


def ctx_for(p, i_max, factor=True):
    return build_context(p, i_max, cache=seed_cache() if factor else None,
                         factor_budget=Budget(seconds=120.0, iterations=50_000_000), factor=factor)


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f} s, limit {self.limit} s"


@crit(1, "p=2 small orders: O(c_0)=3, O(c_1)=15, O(a_1)=5, M_1=5 (< 1 s)")
def test_c01_p2_small_orders():
    with Timer(1.0):
        ctx = ctx_for(2, 1)
        r0, r1 = oe.order_table(ctx)
        assert r0.order_c == 3
        assert (r1.order_c, r1.order_a, r1.m_i) == (15, 5, 5)


@crit(2, "p=2 Fermat-prime levels: M_i = N_i for i <= 4, O(c_i) = N_1...N_i for 2 <= i <= 4 (< 10 s)")
def test_c02_fermat_levels():
    with Timer(10.0):
        ctx = ctx_for(2, 4)
        reports = oe.order_table(ctx)
        for r in reports:
            assert r.m_i == r.n_i == 2 ** (2**r.i) + 1
        for r in reports[2:]:
            assert r.order_c == math.prod(ctx.n_values[1 : r.i + 1])


@crit(3, "p=2 extended levels: M_5 = 2^32+1, M_6 = 2^64+1 (< 5 min); M_7 with --run-slow")
def test_c03_m5_m6():
    with Timer(300.0):
        ctx = ctx_for(2, 6)
        table = oe.m_equals_n_table(ctx, [5, 6])
        assert table == {5: True, 6: True}
        assert oe.order_mod_subfield(ctx, 5) == 2**32 + 1
        assert oe.order_mod_subfield(ctx, 6) == 2**64 + 1


@pytest.mark.slow
@crit(3, "p=2 extended levels: M_5 = 2^32+1, M_6 = 2^64+1 (< 5 min); M_7 with --run-slow")
def test_c03_m7():
    ctx = ctx_for(2, 7)
    assert oe.order_mod_subfield(ctx, 7) == 2**128 + 1


@crit(4, "O(c_i) = O(a_i) with the single exception (p=2, i=1) at p=2 0-5, p=3 0-2, p=5 0-1 (< 2 min)")
def test_c04_equal_orders():
    with Timer(120.0):
        exceptions = []
        for p, top in [(2, 5), (3, 2), (5, 1)]:
            for r in oe.order_table(ctx_for(p, top)):
                assert r.complete
                if r.order_c != r.order_a:
                    exceptions.append((p, r.i))
        assert exceptions == [(2, 1)]


@crit(5, "O(c_i) = M_0...M_i for p=3 0-2, p=5 0-1; enumeration of L_1^x at p=3 agrees (< 30 s)")
def test_c05_product_formula():
    with Timer(30.0):
        for p, top in [(3, 2), (5, 1)]:
            reports = oe.order_table(ctx_for(p, top))
            for r in reports:
                assert r.order_c == math.prod(x.m_i for x in reports[: r.i + 1])
        ctx = ctx_for(3, 1)
        r1 = oe.order_table(ctx)[1]
        assert oe.brute_force_order(ctx, ctx.canonical_generator(1), 19682) == r1.order_c == 13 * 757


@crit(6, "O(c_i) >= (1+2p)...(1+2p^(i+1)) (odd p) and the p=2 bound at every computed level")
def test_c06_lower_bounds():
    with Timer(60.0):
        for p in (2, 3, 5, 7):
            for r in oe.order_table(ctx_for(p, DEFAULT_MAX_LEVEL[p])):
                assert r.order_c >= oe.order_lower_bound(p, r.i)
                if p != 2:
                    assert r.order_c >= math.prod(1 + 2 * p ** (j + 1) for j in range(r.i + 1))


@crit(7, "trace of a_i to F_p is (-1)^(i+1) for p in {2,3,5,7} at all constructed levels (< 10 s)")
def test_c07_trace():
    with Timer(10.0):
        for p in (2, 3, 5, 7):
            ctx = ctx_for(p, DEFAULT_MAX_LEVEL[p], factor=False)
            for i in range(ctx.i_max + 1):
                assert ctx.trace_to_prime(ctx.a(i)) == (-1) ** (i + 1) % p


@crit(8, "sigma_i(c_i) = c_i + (-1)^i everywhere, = pow(c_i, p^(p^i)) for i <= 3 at p = 2, 3 (< 30 s)")
def test_c08_frobenius():
    with Timer(30.0):
        for p in (2, 3, 5, 7):
            ctx = ctx_for(p, DEFAULT_MAX_LEVEL[p], factor=False)
            for i in range(ctx.i_max + 1):
                c = ctx.canonical_generator(i)
                assert ctx.relative_frobenius(c) == c + ctx.scalar((-1) ** i, i)
        for p in (2, 3):
            ctx = ctx_for(p, 3, factor=False)
            for i in range(4):
                c = ctx.canonical_generator(i)
                assert ctx.relative_frobenius(c) == ctx.pow(c, p ** (p**i))


@crit(9, "minimal polynomial of c_1 = closed form (p = 2,3,5,7); composition identity and degrees (< 1 min)")
def test_c09_minimal_polynomials():
    with Timer(60.0):
        for p in (2, 3, 5, 7):
            ctx = ctx_for(p, 1, factor=False)
            assert pt.minimal_polynomial(ctx, ctx.canonical_generator(1)) == pt.c1_closed_form(p)
        for p, top in [(2, 3), (3, 2)]:
            ctx = ctx_for(p, top, factor=False)
            for i in range(top + 1):
                assert pt.degree_check(ctx, i)
                if i >= 1:
                    assert pt.composition_identity_check(ctx, i)


@crit(10, "normal basis: det nonzero and equal to det(D) det(V) a_{i-1}^p at default depths (< 30 s)")
def test_c10_normal_basis():
    with Timer(30.0):
        for p in (2, 3, 5, 7):
            ctx = ctx_for(p, DEFAULT_MAX_LEVEL[p], factor=False)
            for i in range(ctx.i_max + 1):
                r = pt.normal_basis_check(ctx, i)
                assert r.is_basis and r.consistent


PROPERTY_LEVELS = {2: 4, 3: 2, 5: 1, 7: 1}
PROPERTY_NAMES = ("field axioms", "Frobenius is a ring homomorphism", "subfield membership",
                  "membership criterion via a_{i-1}", "sigma_i has order p")


@crit(11, "property suites: axioms, Frobenius, membership, coprimality and congruences (< 1 min)")
def test_c11_property_suites():
    with Timer(60.0):
        failures = []
        for p, top in PROPERTY_LEVELS.items():
            ctx = ctx_for(p, top)
            rng = np.random.default_rng(2024 + p)
            checks = [c for c in tower_checks(ctx, range(top + 1), rng, samples=20)
                      if c.name.startswith(PROPERTY_NAMES)]
            checks += integer_checks(ctx, range(top + 1))
            for res in run_checks(checks):
                if res.status != "PASS":
                    failures.append((p, res.name, res.detail))
            # M_i coprime to O(a_{i-1})
            prev = 1
            for r in oe.order_table(ctx):
                if math.gcd(r.m_i, prev) != 1:
                    failures.append((p, f"gcd(M_{r.i}, O(a_{r.i - 1}))", ""))
                prev = r.order_a
        assert failures == []


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
