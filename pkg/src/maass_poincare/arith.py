"""Exact integer arithmetic: inverses, Kronecker symbols, class numbers."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


class NotInvertible(ValueError):
    pass


class InvalidModulus(ValueError):
    pass


def mod_inverse(a: int, c: int) -> int:
    """Return the representative of a^{-1} mod c in [0, c)."""
    if c <= 0:
        raise InvalidModulus(f"modulus must be positive, got {c}")
    if c == 1:
        return 0
    if math.gcd(a, c) != 1:
        raise NotInvertible(f"{a} is not invertible modulo {c}")
    return pow(a, -1, c)


def jacobi_symbol(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs a positive odd modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for all integers.

    (a/-1) is the sign of a (with (0/-1) = 1), (a/2) depends on a mod 8,
    and (a/0) is 1 only for a = +-1.
    """
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
        n >>= v
    if n == 1:
        return result
    return result * jacobi_symbol(a, n)


def eps(d: int) -> complex:
    """1 for d = 1 mod 4 and i for d = 3 mod 4."""
    if d % 2 == 0:
        raise ValueError(f"eps needs an odd argument, got {d}")
    return 1.0 + 0j if d % 4 == 1 else 1j


def eps_power(d: int, e: int) -> complex:
    """eps(d)**e computed exactly on the unit circle."""
    if d % 2 == 0:
        raise ValueError(f"eps needs an odd argument, got {d}")
    if d % 4 == 1:
        return 1.0 + 0j
    return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[e % 4]


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def divisor_sigma(n: int, r: int = 1) -> int:
    if n <= 0:
        raise ValueError("divisor_sigma needs n >= 1")
    total = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            total += d**r
            e = n // d
            if e != d:
                total += e**r
    return total


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def hurwitz_class_number(n: int) -> Fraction:
    """Hurwitz class number H(n), counted over reduced binary quadratic forms.

    Classes of discriminant -n are weighted by 1/2 for multiples of x^2+y^2
    and by 1/3 for multiples of x^2+xy+y^2. H(0) = -1/12 and H(n) = 0 for
    n = 1, 2 mod 4.
    """
    if n < 0:
        raise ValueError("Hurwitz class numbers are defined for n >= 0")
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            num = b * b + n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if a == b == c:
                total += Fraction(1, 3)
            elif b == 0 and a == c:
                total += Fraction(1, 2)
            else:
                total += 1
        a += 1
    return total


def in_plus_class(n: int, twice_k: int) -> bool:
    """True if (-1)^lambda n = 0, 1 mod 4 for weight twice_k / 2 = lambda + 1/2."""
    if twice_k % 2 == 0:
        raise ValueError("plus-space class needs a half-integral weight")
    lam = (twice_k - 1) // 2
    return ((-1) ** lam * n) % 4 in (0, 1)
