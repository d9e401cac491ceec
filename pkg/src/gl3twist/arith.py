"""Exact integer, modular and multiplicative-function arithmetic.

Everything here is pure and exact: Python integers throughout, so modular
products cannot silently wrap.  Inputs are validated to fit in 64 bits, which
is all the desk-scale scans ever need.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, NumericalError

_U63 = 2**63

# deterministic Miller-Rabin witness set for n < 3.3 * 10^24
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Residue:
    """A value reduced into [0, m) for a positive modulus m."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError(f"modulus must be positive, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise DomainError(f"value {self.value} not reduced mod {self.modulus}")

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class Factorization:
    """n as an ordered list of (prime, exponent) pairs."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if e < 1 or p <= last:
                raise DomainError(f"factor list {self.factors} not canonical")
            last = p
            prod *= p**e
        if prod != self.n:
            raise DomainError(f"factors do not multiply to {self.n}")

    @property
    def omega(self) -> int:
        """Number of distinct prime factors."""
        return len(self.factors)

    @property
    def tau(self) -> int:
        """Number of divisors."""
        out = 1
        for _, e in self.factors:
            out *= e + 1
        return out

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def mod_inverse(a: int, m: int) -> Residue:
    """Inverse of a mod m.  Raises DomainError when gcd(a, m) > 1."""
    if m < 1:
        raise DomainError(f"modulus must be positive, got {m}")
    if m == 1:
        return Residue(0, 1)
    g = math.gcd(a, m)
    if g != 1:
        raise DomainError(f"gcd({a}, {m}) = {g} != 1, no inverse mod {m}")
    return Residue(pow(a, -1, m), m)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """One nontrivial factor of composite odd n (Brent's cycle variant)."""
    rng = random.Random(n)
    while True:
        y, c = rng.randrange(1, n), rng.randrange(1, n)
        m, g, r, q = 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> Factorization:
    """Canonical factorization of 1 <= n <= 2^63 (trial division + Pollard rho)."""
    if n < 1 or n > _U63:
        raise DomainError(f"factorize needs 1 <= n <= 2^63, got {n}")
    orig = n
    fac: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        while n % p == 0:
            fac[p] = fac.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            fac[m] = fac.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.extend((d, m // d))
    return Factorization(orig, tuple(sorted(fac.items())))


def omega(n: int) -> int:
    return factorize(n).omega


def tau(n: int) -> int:
    return factorize(n).tau


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n).factors:
        out -= out // p
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if f.omega % 2 else 1


def primitive_root(p: int) -> Residue:
    """Smallest generator of (Z/pZ)^x for prime p."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if p == 2:
        return Residue(1, 2)
    group = p - 1
    prime_parts = [q for q, _ in factorize(group).factors]
    for g in range(2, p):
        if all(pow(g, group // q, p) != 1 for q in prime_parts):
            return Residue(g, p)
    raise NumericalError(f"no primitive root found mod {p}")  # pragma: no cover


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit by Eratosthenes."""
    if limit < 2:
        return []
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, b in enumerate(sieve) if b]


def primes_in_dyadic(X: int) -> list[int]:
    """Primes in the inclusive dyadic segment [X, 2X]."""
    if X < 2:
        raise DomainError(f"dyadic anchor must be >= 2, got {X}")
    return [p for p in sieve_primes(2 * X) if p >= X]


def reciprocity_defect(n: int, M: int, r: int) -> Fraction:
    """n*inv(M, r)/r + n*inv(r, M)/M - n/(M*r), exactly.

    For gcd(M, r) = 1 this is always an integer; it is the additive reciprocity
    used to swap moduli inside exponential phases.
    """
    if math.gcd(M, r) != 1:
        raise DomainError(f"gcd({M}, {r}) != 1")
    Mbar = mod_inverse(M, r).value
    rbar = mod_inverse(r, M).value
    return Fraction(n * Mbar, r) + Fraction(n * rbar, M) - Fraction(n, M * r)
