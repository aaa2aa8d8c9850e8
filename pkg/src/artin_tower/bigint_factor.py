"""Integer plumbing: primality, factorization, factor cache, order reduction.

Python ints already are arbitrary-precision naturals, so they are used
directly wherever a natural number is needed.
"""

from __future__ import annotations

import logging
import math
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, TypeVar

log = logging.getLogger(__name__)

T = TypeVar("T")

TRIAL_DIVISION_BOUND = 1 << 20
DETERMINISTIC_BOUND = 1 << 64
# Sound for every n < 3.3e24, in particular below 2**64.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
PROBABLE_ROUNDS = 40

DETERMINISTIC = "deterministic"
PROBABLE = "probable"


class DomainError(ValueError):
    """Arithmetic requested outside the naturals (underflow, zero divisor)."""


class IncompleteFactorizationError(RuntimeError):
    """Factoring ran out of budget with a composite cofactor left over."""

    def __init__(self, n: int, partial: "Factorization", cofactor: int):
        super().__init__(
            f"could not finish factoring {n}: composite cofactor {cofactor} remains"
        )
        self.n = n
        self.partial = partial
        self.cofactor = cofactor


class ContractViolation(ValueError):
    pass


class CacheFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# ---------------------------------------------------------------------------
# natural-number arithmetic


def nat_arith(a: int, b: int, op: str):
    """Exact arithmetic on naturals; ``divrem`` returns a pair."""
    if a < 0 or b < 0:
        raise DomainError("naturals must be non-negative")
    if op == "add":
        return a + b
    if op == "sub":
        if a < b:
            raise DomainError(f"underflow: {a} - {b}")
        return a - b
    if op == "mul":
        return a * b
    if op == "divrem":
        if b == 0:
            raise DomainError("division by zero")
        return divmod(a, b)
    if op == "gcd":
        return math.gcd(a, b)
    if op == "pow":
        return a**b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# primality


def _small_primes(bound: int) -> list[int]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for q in range(2, math.isqrt(bound) + 1):
        if sieve[q]:
            sieve[q * q :: q] = bytes(len(range(q * q, bound + 1, q)))
    return [q for q in range(bound + 1) if sieve[q]]


_PRIMES: list[int] | None = None


def small_primes() -> list[int]:
    """All primes up to the trial-division bound (computed once)."""
    global _PRIMES
    if _PRIMES is None:
        _PRIMES = _small_primes(TRIAL_DIVISION_BOUND)
    return _PRIMES


def _mr_composite_witness(a: int, d: int, s: int, n: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def primality(n: int) -> tuple[bool, str]:
    """Return ``(is_prime, certainty)``.

    Below 2**64 the answer is deterministic.  Above, 40 Miller-Rabin rounds
    with bases drawn from an RNG seeded by ``n`` itself, so answers are
    reproducible; a positive answer is then only ``"probable"``.
    """
    if n < 2:
        return False, DETERMINISTIC
    for q in _DETERMINISTIC_BASES:
        if n % q == 0:
            return n == q, DETERMINISTIC
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < DETERMINISTIC_BOUND:
        ok = not any(_mr_composite_witness(a, d, s, n) for a in _DETERMINISTIC_BASES)
        return ok, DETERMINISTIC
    rng = random.Random(n)
    for _ in range(PROBABLE_ROUNDS):
        if _mr_composite_witness(rng.randrange(2, n - 1), d, s, n):
            return False, DETERMINISTIC
    return True, PROBABLE


def is_prime(n: int) -> bool:
    return primality(n)[0]


# ---------------------------------------------------------------------------
# factorizations


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition with per-prime certainty flags."""

    factors: Mapping[int, int] = field(default_factory=dict)
    certainty: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        ordered = dict(sorted(self.factors.items()))
        for q, e in ordered.items():
            if q < 2 or e < 1:
                raise ValueError(f"bad factor {q}^{e}")
        cert = {q: self.certainty.get(q, DETERMINISTIC) for q in ordered}
        object.__setattr__(self, "factors", ordered)
        object.__setattr__(self, "certainty", cert)

    @classmethod
    def of_primes(cls, factors: Mapping[int, int]) -> "Factorization":
        """Build from a prime->exponent map, running the primality test on each."""
        cert = {}
        for q in factors:
            ok, how = primality(q)
            if not ok:
                raise ValueError(f"{q} is not prime")
            cert[q] = how
        return cls(dict(factors), cert)

    @property
    def value(self) -> int:
        return math.prod(q**e for q, e in self.factors.items())

    @property
    def primes(self) -> list[int]:
        return list(self.factors)

    @property
    def is_proved(self) -> bool:
        return all(c == DETERMINISTIC for c in self.certainty.values())

    @property
    def overall_certainty(self) -> str:
        return DETERMINISTIC if self.is_proved else PROBABLE

    def merge(self, other: "Factorization") -> "Factorization":
        """Factorization of the product of two values."""
        factors = dict(self.factors)
        cert = dict(self.certainty)
        for q, e in other.factors.items():
            factors[q] = factors.get(q, 0) + e
            if other.certainty[q] == PROBABLE:
                cert[q] = PROBABLE
            else:
                cert.setdefault(q, DETERMINISTIC)
        return Factorization(factors, cert)

    def divisors(self) -> list[int]:
        divs = [1]
        for q, e in self.factors.items():
            divs = [d * q**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    def __str__(self) -> str:
        return format_factorization(self)


def format_factorization(f: Factorization) -> str:
    if not f.factors:
        return "1"
    return " * ".join(f"{q}^{e}" for q, e in f.factors.items())


# ---------------------------------------------------------------------------
# Pollard rho (Brent)


@dataclass
class Budget:
    """Per-call limit on factoring effort.  ``None`` means unlimited."""

    seconds: float | None = 30.0
    iterations: int | None = 5_000_000

    def start(self) -> "_BudgetClock":
        return _BudgetClock(self)


class _BudgetClock:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.deadline = None if budget.seconds is None else time.monotonic() + budget.seconds
        self.spent = 0

    def charge(self, n: int) -> bool:
        """Record ``n`` iterations; False once the budget is exhausted."""
        self.spent += n
        if self.budget.iterations is not None and self.spent > self.budget.iterations:
            return False
        if self.deadline is not None and time.monotonic() > self.deadline:
            return False
        return True


def pollard_brent(n: int, clock: _BudgetClock, batch: int = 128) -> int | None:
    """Find a nontrivial factor of composite odd ``n`` or give up (None).

    Restarts use ``x -> x^2 + c`` with ``c`` and the start point derived from
    the restart counter, so repeated runs take identical paths.
    """
    for restart in range(1, 10_000):
        c = restart
        y = 2 + restart
        r, q, g = 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(batch, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += steps
                if not clock.charge(steps):
                    return None
            r *= 2
        if g == n:
            # batch overshot; redo one step at a time from the saved point
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    return None


# ---------------------------------------------------------------------------
# factor cache


_CACHE_LINE = re.compile(r"^\s*(\d+)\s*=\s*(.*?)\s*$")
_CACHE_TERM = re.compile(r"^(\d+)(?:\^(\d+))?$")


def parse_cache_line(line: str, line_no: int) -> tuple[int, dict[int, int]] | None:
    """Parse ``N = p1^e1 * p2^e2``; None for blank and comment lines."""
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    m = _CACHE_LINE.match(text)
    if not m:
        raise CacheFormatError(line_no, f"malformed entry {text!r}")
    n = int(m.group(1))
    factors: dict[int, int] = {}
    rhs = m.group(2)
    if rhs != "1":
        for term in rhs.split("*"):
            tm = _CACHE_TERM.match(term.strip())
            if not tm:
                raise CacheFormatError(line_no, f"malformed factor {term.strip()!r}")
            q, e = int(tm.group(1)), int(tm.group(2) or 1)
            factors[q] = factors.get(q, 0) + e
    return n, factors


def verify_entry(n: int, factors: Mapping[int, int]) -> Factorization:
    """Re-check a claimed factorization; ValueError describes any mismatch."""
    prod = math.prod(q**e for q, e in factors.items())
    if prod != n:
        raise ValueError(f"product of factors is {prod}, not {n}")
    return Factorization.of_primes(factors)


class FactorCache:
    """Verified factorizations keyed by the factored integer.

    ``fallback`` is consulted on a miss but never written to or exported.
    """

    def __init__(
        self,
        entries: Mapping[int, Factorization] | None = None,
        fallback: "FactorCache | None" = None,
    ):
        self._entries: dict[int, Factorization] = dict(entries or {})
        self.fallback = fallback

    def __contains__(self, n: int) -> bool:
        return self.get(n) is not None

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, n: int) -> Factorization | None:
        hit = self._entries.get(n)
        if hit is None and self.fallback is not None:
            return self.fallback.get(n)
        return hit

    def put(self, n: int, f: Factorization) -> None:
        if f.value != n:
            raise ValueError(f"factorization does not multiply to {n}")
        self._entries[n] = f

    def items(self):
        return sorted(self._entries.items())

    def update(self, other: "FactorCache") -> None:
        self._entries.update(other._entries)

    @classmethod
    def parse(cls, text: str, strict: bool = False) -> "FactorCache":
        """Load cache text, re-verifying every entry.

        Lenient mode logs a warning for each rejected line and skips it;
        strict mode raises :class:`CacheFormatError` on the first one.
        """
        cache = cls()
        for line_no, line in enumerate(text.splitlines(), start=1):
            try:
                parsed = parse_cache_line(line, line_no)
                if parsed is None:
                    continue
                n, factors = parsed
                try:
                    fact = verify_entry(n, factors)
                except ValueError as exc:
                    raise CacheFormatError(line_no, str(exc)) from None
            except CacheFormatError as exc:
                if strict:
                    raise
                log.warning("factor cache: rejected %s", exc)
                continue
            cache._entries[n] = fact
        return cache

    @classmethod
    def load(cls, path: str | Path, strict: bool = False) -> "FactorCache":
        return cls.parse(Path(path).read_text(encoding="utf-8"), strict=strict)

    def dumps(self) -> str:
        lines = ["# integer factor cache: N = p1^e1 * p2^e2 * ..."]
        lines += [f"{n} = {format_factorization(f)}" for n, f in self.items()]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


# ---------------------------------------------------------------------------


def factorize(
    n: int, budget: Budget | None = None, cache: FactorCache | None = None
) -> Factorization:
    """Factor ``n``: cache, then trial division to 2**20, then Brent's rho.

    Newly found complete factorizations are written back to ``cache``.
    """
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    if cache is not None:
        hit = cache.get(n)
        if hit is not None:
            return hit
    clock = (budget or Budget()).start()

    found: dict[int, int] = {}
    rest = n
    for q in small_primes():
        if q * q > rest:
            break
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            found[q] = e
    pending = [rest] if rest > 1 else []
    stuck: list[int] = []
    while pending:
        m = pending.pop()
        if cache is not None and m in cache:
            for q, e in cache.get(m).factors.items():
                found[q] = found.get(q, 0) + e
            continue
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            pending += [r, r]
            continue
        d = pollard_brent(m, clock)
        if d is None:
            stuck.append(m)
            continue
        pending += [d, m // d]

    result = Factorization.of_primes(found)
    if stuck:
        raise IncompleteFactorizationError(n, result, math.prod(stuck))
    if cache is not None:
        cache.put(n, result)
    return result


def trial_factor(n: int) -> dict[int, int]:
    """Plain trial division; slow but independent of :func:`factorize`."""
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def multiplicative_order_mod(a: int, d: int, d_fact: Factorization | None = None) -> int:
    """Order of ``a`` in (Z/dZ)^x."""
    if d == 1:
        return 1
    if math.gcd(a, d) != 1:
        raise ValueError(f"{a} is not a unit mod {d}")
    f = d_fact or factorize(d)
    phi = 1
    phi_fact = Factorization()
    for q, e in f.factors.items():
        phi *= (q - 1) * q ** (e - 1)
        part = factorize(q - 1).factors if q > 2 else {}
        extra = {q: e - 1} if e > 1 else {}
        phi_fact = phi_fact.merge(Factorization.of_primes(part)).merge(
            Factorization.of_primes(extra)
        )
    return reduce_order(a, phi, phi_fact, lambda x, k: pow(x, k, d), lambda x: x % d == 1)


def reduce_order(
    x: T,
    exponent: int,
    exponent_fact: Factorization,
    power: Callable[[T, int], T],
    is_identity: Callable[[T], bool],
) -> int:
    """Exact order of ``x`` given an exponent ``E`` with ``x**E == 1``.

    Strips each prime factor of ``E`` for as long as the smaller power still
    gives the identity.
    """
    if exponent_fact.value != exponent:
        raise ContractViolation("factorization does not match exponent")
    if not is_identity(power(x, exponent)):
        raise ContractViolation("x**E is not the identity")
    m = exponent
    for q, e in exponent_fact.factors.items():
        for _ in range(e):
            if is_identity(power(x, m // q)):
                m //= q
            else:
                break
    return m


def coprime_pairs(values: Iterable[int]) -> bool:
    vals = list(values)
    return all(math.gcd(a, b) == 1 for i, a in enumerate(vals) for b in vals[i + 1 :])
