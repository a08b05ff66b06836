"""Generalized Kloosterman sums, batched rows for the coefficient engine,
and the twisted sum H(m/4, n) attached to odd moduli."""

from __future__ import annotations

import cmath
import math
import threading
from collections import OrderedDict

import numpy as np

from . import _kernels
from .arith import factorize, jacobi_symbol, kronecker_symbol, mod_inverse


class FourNotInvertible(ValueError):
    pass


def _unit(j: int, M: int) -> complex:
    # e(j/M) with the numerator already reduced
    j %= M
    if (4 * j) % M == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * j // M]
    return cmath.exp(2j * math.pi * j / M)


def _theta_char(twice_k: int, c: int, v: int) -> complex:
    # (c/v)^{2k} eps_v^{2k}; only the parity of 2k matters for the symbol
    if twice_k % 2 == 0:
        return 1.0 + 0j
    chi = kronecker_symbol(c, v)
    if chi == 0:
        return 0j
    e = (1 + 0j) if v % 4 == 1 else (1 + 0j, 1j, -1 + 0j, -1j)[twice_k % 4]
    return chi * e


class KloostermanCache:
    """Thread-safe memo for direct Kloosterman sums."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            return self._data.setdefault(key, value)

    def __len__(self):
        with self._lock:
            return len(self._data)

    def clear(self):
        with self._lock:
            self._data.clear()


CACHE = KloostermanCache()


def _weight_class(twice_k: int) -> int:
    # integral weights all share the trivial character; half-integral ones
    # depend on 2k mod 4 through eps_v^{2k}
    return -1 if twice_k % 2 == 0 else twice_k % 4


def kloosterman_sum(twice_k: int, m: int, n: int, c: int, *, cache: bool = True) -> complex:
    """K_k(m, n, c) by direct enumeration over v mod c with gcd(v, c) = 1.

    For half-integral k = twice_k / 2 each term carries (c/v)^{2k} eps_v^{2k};
    this needs c even so that every unit v is odd.
    """
    if c < 1:
        raise ValueError("modulus must be positive")
    if twice_k % 2 and c % 2:
        raise ValueError("half-integral weight needs an even modulus")
    key = (_weight_class(twice_k), m, n, c)
    if cache:
        hit = CACHE.get(key)
        if hit is not None:
            return hit
    re: list[float] = []
    im: list[float] = []
    for v in range(1, c + 1):
        if math.gcd(v, c) != 1:
            continue
        vb = mod_inverse(v, c)
        t = _theta_char(twice_k, c, v) * _unit(m * vb + n * v, c)
        re.append(t.real)
        im.append(t.imag)
    value = complex(math.fsum(re), math.fsum(im))
    if cache:
        value = CACHE.put(key, value)
    return value


def h_sum(m: int, n: int, nprime: int, c: int, twice_k: int) -> complex:
    """The twisted sum H(m/4, n) for the odd modulus N'c.

    (4/-N'c) (-4/N'c)^{-k} sum_{d mod N'c} (d/N'c) e((n d + 4^{-1} m d^{-1}) / N'c),
    with (-1)^{-k} read as exp(-i pi k).
    """
    M = nprime * c
    if M % 2 == 0:
        raise FourNotInvertible(f"4 is not invertible modulo {M}")
    k = twice_k / 2
    pre = kronecker_symbol(4, -M)
    if kronecker_symbol(-4, M) == -1:
        pre *= cmath.exp(-1j * math.pi * k)
    inv4 = mod_inverse(4, M) if M > 1 else 0
    re: list[float] = []
    im: list[float] = []
    for d in range(M):
        if math.gcd(d, M) != 1:
            continue
        sym = jacobi_symbol(d, M) if M > 1 else 1
        t = sym * _unit(n * d + inv4 * m * mod_inverse(d, M), M)
        re.append(t.real)
        im.append(t.imag)
    return pre * complex(math.fsum(re), math.fsum(im))


# Batched evaluation for the coefficient engine. For a fixed modulus M the
# unit residues, their inverses and the symbol (M/v) are computed once and
# shared by every (m, n, weight) that needs that modulus.

class UnitTable:
    __slots__ = ("M", "v", "_vbar", "_chi", "_roots", "_primes")

    def __init__(self, M: int):
        self.M = M
        self._primes = np.array(sorted(factorize(M)), dtype=np.int64)
        self.v, _, _ = _kernels.unit_table(M, self._primes, False, False)
        self._vbar = None
        self._chi = None
        self._roots = None

    def _fill(self, inv: bool, chi: bool):
        _, vbar, ch = _kernels.unit_table(self.M, self._primes, inv, chi)
        if inv:
            self._vbar = vbar
        if chi:
            self._chi = ch

    @property
    def vbar(self) -> np.ndarray:
        if self._vbar is None:
            self._fill(True, False)
        return self._vbar

    @property
    def chi(self) -> np.ndarray:
        if self._chi is None:
            self._fill(False, True)
        return self._chi

    @property
    def roots(self) -> np.ndarray:
        if self._roots is None:
            self._roots = np.exp(2j * np.pi * np.arange(self.M) / self.M)
        return self._roots

    @property
    def size(self) -> int:
        return self.v.size + self.M


class _TableCache:
    """Small LRU of unit tables keyed by modulus."""

    def __init__(self, max_entries: int = 8_000_000):
        self._data: OrderedDict = OrderedDict()
        self._size = 0
        self._max = max_entries
        self._lock = threading.Lock()

    def get(self, M: int) -> UnitTable:
        with self._lock:
            t = self._data.get(M)
            if t is not None:
                self._data.move_to_end(M)
                return t
        t = UnitTable(M)
        with self._lock:
            if M in self._data:
                return self._data[M]
            self._data[M] = t
            self._size += t.size
            while self._size > self._max and len(self._data) > 1:
                _, old = self._data.popitem(last=False)
                self._size -= old.size
        return t


TABLES = _TableCache()


def kloosterman_row(twice_k: int, m: int, M: int, ns, table: UnitTable | None = None) -> np.ndarray:
    """K_k(m, n, M) for every n in ns, sharing the unit table of M.

    Large batches go through one FFT of length M; small ones are summed
    directly. Phases are reduced modulo M in integers first.
    """
    ns = np.asarray(ns, dtype=np.int64)
    half = twice_k % 2 == 1
    if half and M % 2:
        raise ValueError("half-integral weight needs an even modulus")
    if table is None:
        table = TABLES.get(M)
    v, roots = table.v, table.roots
    mm = m % M
    w = roots[(mm * table.vbar) % M] if mm else np.ones(v.size, dtype=complex)
    if half:
        e = np.where(v % 4 == 1, 1.0 + 0j, (1 + 0j, 1j, -1 + 0j, -1j)[twice_k % 4])
        w = w * (table.chi * e)
    if ns.size > 2 * max(1, int(math.log2(M + 1))):
        full = np.zeros(M, dtype=complex)
        full[v % M] = w
        row = np.fft.ifft(full) * M
        return row[ns % M]
    return _kernels.row_direct(v, w, roots, ns, M)


# Exact finite identities behind the plus-space coefficient formula.

def plus_identity_zero_class(m: int, n: int, nprime: int, c: int, twice_k: int) -> float:
    """Defect of K_k(m, n, Nc) = (-1)^l i (1 - (-1)^l i) H(m/4, n/4) for n = 0 mod 4, c odd."""
    lam = (twice_k - 1) // 2
    u = 1j * (-1) ** lam
    N = 4 * nprime
    lhs = kloosterman_sum(twice_k, m, n, N * c)
    rhs = u * (1 - u) * h_sum(m, n // 4, nprime, c, twice_k)
    return abs(lhs - rhs)


def plus_identity_one_class(m: int, n: int, nprime: int, c: int, twice_k: int) -> float:
    """Defect of K_k(m, n, Nc) = 2^{-3/2} ((-1)^l n / 2) K_k(4m, n, 2Nc) for (-1)^l n = 1 mod 4, c odd."""
    lam = (twice_k - 1) // 2
    N = 4 * nprime
    lhs = kloosterman_sum(twice_k, m, n, N * c)
    rhs = 2**-1.5 * kronecker_symbol((-1) ** lam * n, 2) * kloosterman_sum(twice_k, 4 * m, n, 2 * N * c)
    return abs(lhs - rhs)


def plus_identity_zero_class_printed(m: int, n: int, nprime: int, c: int, twice_k: int) -> float:
    """Defect with the uncorrected constant (-1)^l i / 4; nonzero in general."""
    lam = (twice_k - 1) // 2
    u = 1j * (-1) ** lam
    N = 4 * nprime
    K = kloosterman_sum(twice_k, m, n, N * c)
    lhs = 2 * K
    rhs = K + (1 - u) * u / 4 * h_sum(m, n // 4, nprime, c, twice_k)
    return abs(lhs - rhs)


def plus_identity_one_class_printed(m: int, n: int, nprime: int, c: int, twice_k: int) -> float:
    """Defect with the uncorrected constant (1/sqrt 2)((-1)^l i / 4); nonzero in general."""
    lam = (twice_k - 1) // 2
    u = 1j * (-1) ** lam
    N = 4 * nprime
    K = kloosterman_sum(twice_k, m, n, N * c)
    rhs = K + u / (4 * math.sqrt(2)) * kloosterman_sum(twice_k, 4 * m, n, 2 * N * c)
    return abs(2 * K - rhs)
