"""Compiled inner loops for the per-modulus unit tables and direct row sums."""

import numpy as np
from numba import njit


@njit(cache=True)
def _jacobi(a, n):
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@njit(cache=True)
def _inverse(v, M):
    r0, r1 = M, v
    t0, t1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    t0 %= M
    return t0


@njit(cache=True)
def unit_table(M, primes, need_inv, need_chi):
    """Units v mod M, optionally with inverses and the symbol (M/v) for odd v."""
    mask = np.ones(M, dtype=np.bool_)
    mask[0] = M == 1
    for p in primes:
        mask[::p] = False
    count = 0
    for j in range(M):
        if mask[j]:
            count += 1
    v = np.empty(count, dtype=np.int64)
    i = 0
    for j in range(M):
        if mask[j]:
            v[i] = j
            i += 1
    vbar = np.empty(count if need_inv else 0, dtype=np.int64)
    chi = np.empty(count if need_chi else 0, dtype=np.int8)
    for i in range(count):
        if need_inv:
            vbar[i] = _inverse(v[i], M) if M > 1 else 0
        if need_chi:
            chi[i] = _jacobi(M, v[i])
    return v, vbar, chi


@njit(cache=True)
def row_direct(v, w, roots, ns, M):
    """sum_v w_v e(n v / M) for each n, phases reduced in integers."""
    out = np.empty(ns.size, dtype=np.complex128)
    for j in range(ns.size):
        nm = ns[j] % M
        acc_re = 0.0
        acc_im = 0.0
        for i in range(v.size):
            r = roots[(nm * v[i]) % M]
            t = w[i] * r
            acc_re += t.real
            acc_im += t.imag
        out[j] = complex(acc_re, acc_im)
    return out
