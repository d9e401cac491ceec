"""Primitive Dirichlet characters modulo a prime M, tabulated once.

A character is pinned down by the smallest primitive root g of M and an index
k in [0, M-1): chi(g) = e(k / (M-1)).  Values are tabulated at construction
from exact rational angles k * ind(n) / (M-1) reduced mod 1, so long index
products never drift in phase.  The table costs O(M) memory, which is cheap at
the moduli (<= 10^4) these verifications run at, and makes evaluation inside
quadruple sums a plain array lookup.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith import Residue, is_prime, primitive_root
from .errors import DomainError


def e_of(x: float) -> complex:
    """exp(2 pi i x)."""
    return cmath.exp(2j * cmath.pi * x)


def e_frac(num: int, den: int) -> complex:
    """exp(2 pi i num/den) with the rational angle reduced mod 1 first."""
    return cmath.exp(2j * cmath.pi * (num % den) / den)


@dataclass(frozen=True)
class DirichletCharacter:
    """Character mod prime M with chi(g) = e(k/(M-1))."""

    modulus: int
    generator: Residue
    index: int
    _table: np.ndarray = field(repr=False, compare=False)
    _log_table: np.ndarray = field(repr=False, compare=False)

    @property
    def is_principal(self) -> bool:
        return self.index == 0

    @property
    def is_primitive(self) -> bool:
        # mod a prime every non-principal character is primitive
        return self.index != 0

    def __call__(self, n) -> complex:
        return self.evaluate(n)

    def evaluate(self, n) -> complex:
        """chi(n); 0 when M | n.  Accepts ints or integer arrays."""
        if isinstance(n, (int, np.integer)):
            return complex(self._table[int(n) % self.modulus])
        arr = np.asarray(n)
        return self._table[np.mod(arr, self.modulus)]

    def discrete_log(self, n: int) -> int:
        """ind(n) with respect to the stored generator; DomainError when M | n."""
        r = n % self.modulus
        if r == 0:
            raise DomainError(f"{n} is divisible by the modulus {self.modulus}")
        return int(self._log_table[r])

    def conjugate(self) -> "DirichletCharacter":
        k = (-self.index) % (self.modulus - 1) if self.modulus > 2 else 0
        return build_character(self.modulus, k)

    @cached_property
    def parity(self) -> int:
        """chi(-1), exactly +1 or -1."""
        val = self.evaluate(self.modulus - 1)
        return 1 if val.real > 0 else -1


def build_character(M: int, k: int) -> DirichletCharacter:
    """Tabulated character mod prime M with chi(g) = e(k/(M-1))."""
    if not is_prime(M):
        raise DomainError(f"modulus {M} is not prime")
    if not 0 <= k < max(M - 1, 1):
        raise DomainError(f"index {k} out of range [0, {M - 1})")
    g = primitive_root(M)
    order = M - 1
    log_table = np.zeros(M, dtype=np.int64)
    acc = 1
    for j in range(order):
        log_table[acc] = j
        acc = acc * g.value % M
    table = np.zeros(M, dtype=np.complex128)
    for n in range(1, M):
        # exact rational angle, reduced before the single trig call
        table[n] = e_frac(k * int(log_table[n]), order)
    return DirichletCharacter(M, g, k, table, log_table)


def all_characters(M: int):
    """Every character mod prime M, principal first."""
    for k in range(M - 1 if M > 2 else 1):
        yield build_character(M, k)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """sum_{a mod M} chi(a) e(a/M); modulus sqrt(M) for primitive chi."""
    if not chi.is_primitive:
        raise DomainError("Gauss sum normalization requires a primitive character")
    M = chi.modulus
    return complex(sum(chi.evaluate(a) * e_frac(a, M) for a in range(1, M)))


def character_angle(chi: DirichletCharacter, n: int) -> Fraction:
    """chi(n) as the exact rational angle ind(n)*k/(M-1) mod 1."""
    return Fraction(chi.index * chi.discrete_log(n), chi.modulus - 1) % 1
