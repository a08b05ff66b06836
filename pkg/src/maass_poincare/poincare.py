"""Fourier coefficients of weak Maass-Poincare series.

The coefficient of index n of F_{m,k,N}(z, s) is

    2 pi i^{-k} sum_{c >= 1} K_k(m, n, Nc) / (Nc) * branch(c)

where branch is a Bessel J or I factor, or a power of Nc when mn = 0. The
plus-space version inserts 1 + (4 / N'c) into every term (N = 4N').

Sums are truncated at a cutoff C that grows geometrically; a value counts as
converged once the partial sums over the last window [C/f, C] stay within the
requested tolerance of the final one.
"""

from __future__ import annotations

import cmath
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import specfun
from .arith import in_plus_class, is_square, kronecker_symbol, eps_power
from .kloosterman import TABLES, kloosterman_row


class NotConverged(RuntimeError):
    def __init__(self, message: str, value: "TruncatedValue"):
        super().__init__(message)
        self.value = value


class PlusSpaceViolation(ValueError):
    pass


class PoleAtS(ValueError):
    pass


class NotAPolePair(ValueError):
    pass


class StepTooSmall(ValueError):
    pass


class UnsupportedWeightRange(ValueError):
    pass


class TailTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class Weight:
    twice_k: int

    @classmethod
    def of(cls, k: float) -> "Weight":
        t = 2 * k
        if not float(t).is_integer():
            raise ValueError(f"weight {k} is not in (1/2)Z")
        return cls(int(t))

    @property
    def k(self) -> float:
        return self.twice_k / 2

    @property
    def half_integral(self) -> bool:
        return self.twice_k % 2 == 1

    @property
    def lam(self) -> int:
        if not self.half_integral:
            raise ValueError("lambda is only defined for half-integral weight")
        return (self.twice_k - 1) // 2


@dataclass(frozen=True)
class TruncationPolicy:
    c_max: int = 4096
    tol: float = 1e-8
    stability_factor: int = 2
    c_start: int = 64
    rtol: float = 0.0
    strict: bool = False

    def __post_init__(self):
        if self.tol <= 0 and self.rtol <= 0:
            raise ValueError("a positive tolerance is required")
        if self.stability_factor < 2:
            raise ValueError("stability_factor must be at least 2")
        if self.c_max < 1 or self.c_start < 1:
            raise ValueError("cutoffs must be positive")


@dataclass(frozen=True)
class TruncatedValue:
    value: complex
    error_estimate: float
    c_used: int
    converged: bool

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class CoefficientQuery:
    m: int
    weight: Weight
    level: int
    n: int
    s: float


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MAASS_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# series engine


@dataclass(frozen=True)
class SeriesTarget:
    """One linear functional sum_j w_j * coefficient(n, s_j) of a family.

    A plain coefficient has stencil ((s, 1.0),); a derivative stencil lists
    several spectral points. The functional is applied term by term, so the
    truncation error estimate refers to the combined series.
    """

    m: int
    twice_k: int
    level: int
    plus: bool
    n: int
    stencil: tuple

    @property
    def family(self):
        return (self.m, self.twice_k, self.level, self.plus)


def _branch(m: int, n: int, k: float, s: float, x: np.ndarray) -> np.ndarray:
    """branch(c) / (Nc) with x = Nc."""
    mn = m * n
    if mn > 0:
        arg = 4 * math.pi * math.sqrt(mn) / x
        return abs(mn) ** ((1 - k) / 2) * specfun.bessel_J(2 * s - 1, arg) / x
    if mn < 0:
        arg = 4 * math.pi * math.sqrt(-mn) / x
        return abs(mn) ** ((1 - k) / 2) * specfun.bessel_I(2 * s - 1, arg) / x
    if m + n != 0:
        return 2 ** (k - 1) * math.pi ** (s + k / 2 - 1) * abs(m + n) ** (s - k / 2) * x ** (-2 * s)
    return 2 ** (2 * k - 2) * math.pi ** (k - 1) * math.gamma(2 * s) * (2 * x) ** (1 - 2 * s) / x


class _Family:
    def __init__(self, m: int, twice_k: int, level: int, plus: bool, ns: Sequence[int]):
        self.m, self.twice_k, self.level, self.plus = m, twice_k, level, plus
        self.ns = list(ns)
        self.col = {n: i for i, n in enumerate(self.ns)}
        self.K = np.zeros((0, len(self.ns)), dtype=complex)

    @property
    def c_done(self) -> int:
        return self.K.shape[0]

    def extend(self, c_hi: int):
        c0 = self.c_done
        if c_hi <= c0:
            return
        rows = np.empty((c_hi - c0, len(self.ns)), dtype=complex)
        ns = np.array(self.ns, dtype=np.int64)
        for i, c in enumerate(range(c0 + 1, c_hi + 1)):
            M = self.level * c
            rows[i] = kloosterman_row(self.twice_k, self.m, M, ns, TABLES.get(M))
        self.K = np.vstack([self.K, rows])

    def terms(self, n: int, stencil, C: int) -> np.ndarray:
        c = np.arange(1, C + 1, dtype=float)
        x = self.level * c
        k = self.twice_k / 2
        t = np.zeros(C, dtype=complex)
        K = self.K[:C, self.col[n]]
        for s, w in stencil:
            t += w * _branch(self.m, n, k, s, x)
        t *= K
        if self.plus:
            # 1 + (4 / N'c) is 2 for odd N'c and 1 otherwise
            odd = ((self.level // 4) * np.arange(1, C + 1)) % 2 == 1
            t *= np.where(odd, 2.0, 1.0)
        return t


def _partial_summary(terms: np.ndarray, C: int, factor: int):
    re = math.fsum(terms.real)
    im = math.fsum(terms.imag)
    total = complex(re, im)
    lo = max(1, C // factor)
    if C <= 1:
        return total, math.inf
    # partial sums S(c) for c in [C/f, C]; deviation measured from S(C)
    tail = terms[lo:][::-1]
    dev = np.cumsum(tail)
    spread = float(np.max(np.abs(dev))) if dev.size else 0.0
    return total, spread


_MEMO: dict = {}
_MEMO_LOCK = threading.Lock()


def clear_memo():
    """Forget every memoized series sum."""
    with _MEMO_LOCK:
        _MEMO.clear()


def sum_series(
    targets: Sequence[SeriesTarget],
    policy: TruncationPolicy,
    threads: int | None = None,
    scale: complex = 1.0,
):
    """Evaluate all targets and return TruncatedValues multiplied by scale.

    Convergence is judged on the scaled values, so the policy tolerance
    applies to what the caller receives. Results are memoized: the sums are
    pure functions of the targets, the policy and the scale.
    """
    key = (tuple(targets), policy, complex(scale))
    with _MEMO_LOCK:
        hit = _MEMO.get(key)
    if hit is not None:
        return list(hit)
    out = _sum_series(targets, policy, threads, scale)
    with _MEMO_LOCK:
        _MEMO[key] = tuple(out)
    return out


def _sum_series(targets, policy, threads, scale):
    mag = abs(scale)
    fams: dict = {}
    for t in targets:
        fams.setdefault(t.family, set()).add(t.n)
    families = {key: _Family(*key, sorted(ns)) for key, ns in fams.items()}
    threads = threads or _threads()

    def run(key):
        fam = families[key]
        mine = [(i, t) for i, t in enumerate(targets) if t.family == key]
        results = {}
        C = min(policy.c_start, policy.c_max)
        while True:
            fam.extend(C)
            pending = False
            for i, t in mine:
                terms = fam.terms(t.n, t.stencil, C)
                val, err = _partial_summary(terms, C, policy.stability_factor)
                val, err = val * scale, err * mag
                ok = err <= max(policy.tol, policy.rtol * abs(val))
                results[i] = TruncatedValue(val, err, C, ok)
                pending |= not ok
            if not pending or C >= policy.c_max:
                return results
            C = min(C * policy.stability_factor, policy.c_max)

    keys = list(families)
    out: dict = {}
    if threads > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for res in ex.map(run, keys):
                out.update(res)
    else:
        for key in keys:
            out.update(run(key))
    return [out[i] for i in range(len(targets))]


def _prefactor(twice_k: int) -> complex:
    # 2 pi i^{-k}, i^{-k} = exp(-i pi k / 2)
    return 2 * math.pi * specfun.unit_turn(-twice_k / 8)


def _finish(v: TruncatedValue, policy: TruncationPolicy, what: str) -> TruncatedValue:
    if policy.strict and not v.converged:
        raise NotConverged(f"{what} did not converge by c = {v.c_used} (estimate {v.error_estimate:.3g})", v)
    return v


# ---------------------------------------------------------------------------
# public coefficient API


def is_pole_pair(a: int, b: int) -> bool:
    """True when both indices are zero or perfect squares."""
    return (a == 0 or is_square(a)) and (b == 0 or is_square(b))


def residue_b_half(D: int, d: int) -> float:
    """Residue at s = 3/4 of the weight 1/2 plus-space coefficient b_{-D}(d, s)."""
    if not is_pole_pair(-D, d):
        raise NotAPolePair(f"(-D, d) = ({-D}, {d}) is not a pair of squares")
    if D == 0 and d == 0:
        return 3 / (16 * math.pi)
    m = math.isqrt(d)
    if D == 0:
        return 3 * m / (2 * math.pi)
    if d == 0:
        # b_{-D}(0, s) = b_0(-D, s) by the symmetry of the Kloosterman sums
        return 3 * math.isqrt(-D) / (2 * math.pi)
    return 12 * m * math.sqrt(-D) / math.pi


def _check_plus(m: int, n: int, weight: Weight, level: int):
    if not weight.half_integral or level % 4:
        raise PlusSpaceViolation("plus space needs half-integral weight and 4 | N")
    if not in_plus_class(m, weight.twice_k):
        raise PlusSpaceViolation(f"m = {m} is outside the plus-space classes")
    if not in_plus_class(n, weight.twice_k):
        raise PlusSpaceViolation(f"n = {n} is outside the plus-space classes")


def _pole_guard(m: int, n: int, weight: Weight, s: float):
    if abs(s - 0.75) >= 1e-6 or weight.twice_k not in (1, 3):
        return
    pair = (m, n) if weight.twice_k == 1 else (-m, -n)
    if is_pole_pair(*pair):
        raise PoleAtS(f"b_{{{m}}}({n}, s) has a pole at s = 3/4")


def coefficient_table(
    m: int,
    weight: Weight,
    level: int,
    ns: Iterable[int],
    s: float,
    policy: TruncationPolicy = TruncationPolicy(),
    *,
    plus: bool = False,
    enforce_class: bool = True,
    threads: int | None = None,
) -> dict[int, TruncatedValue]:
    """Coefficients for many n of one series, sharing every Kloosterman row."""
    ns = list(ns)
    if s <= 0.5:
        raise ValueError("s must exceed 1/2")
    if weight.half_integral and level % 4:
        raise ValueError("half-integral weight needs 4 | N")
    for n in ns:
        if plus:
            if enforce_class:
                _check_plus(m, n, weight, level)
            _pole_guard(m, n, weight, s)
    targets = [SeriesTarget(m, weight.twice_k, level, plus, n, ((s, 1.0),)) for n in ns]
    raw = sum_series(targets, policy, threads, _prefactor(weight.twice_k))
    out = {}
    for n, v in zip(ns, raw):
        out[n] = _finish(v, policy, f"coefficient n = {n}")
    return out


def coeff_c(query: CoefficientQuery, policy: TruncationPolicy = TruncationPolicy()) -> TruncatedValue:
    """c_{m,k}(n, s) of F_{m,k,N}(z, s)."""
    return coefficient_table(query.m, query.weight, query.level, [query.n], query.s, policy)[query.n]


def coeff_b_plus(
    query: CoefficientQuery, policy: TruncationPolicy = TruncationPolicy(), *, enforce_class: bool = True
) -> TruncatedValue:
    """b_{m,k}(n, s) of the plus-space projection F^+_{m,k,N}(z, s).

    With enforce_class=False the same sum is evaluated for indices outside
    the plus-space classes, which is useful for checking that it vanishes.
    """
    return coefficient_table(
        query.m, query.weight, query.level, [query.n], query.s, policy, plus=True, enforce_class=enforce_class
    )[query.n]


def derivative_stencil(s: float, h: float) -> tuple:
    """Weights of central differences at h and h/2 combined by one Richardson step."""
    if h < 1e-6:
        raise StepTooSmall(f"step {h} is too small for double precision differences")
    a = 1.0 / (2 * h)
    b = 1.0 / h
    # (4 D_{h/2} - D_h) / 3
    return (
        (s + h, -a / 3),
        (s - h, a / 3),
        (s + h / 2, 4 * b / 3),
        (s - h / 2, -4 * b / 3),
    )


def coeff_b_plus_ds_table(
    D: int,
    ns: Iterable[int],
    policy: TruncationPolicy = TruncationPolicy(),
    step: float = 1e-3,
    *,
    level: int = 4,
    threads: int | None = None,
) -> dict[int, TruncatedValue]:
    """d/ds b_{D,3/2}(n, s) at s = 3/4 for several n, all sharing one cutoff per n."""
    weight = Weight(3)
    ns = list(ns)
    for n in ns:
        _check_plus(D, n, weight, level)
        if is_pole_pair(-D, -n):
            raise PoleAtS(f"b_{{{D}}}({n}, s) has a pole at s = 3/4")
    stencil = derivative_stencil(0.75, step)
    targets = [SeriesTarget(D, 3, level, True, n, stencil) for n in ns]
    raw = sum_series(targets, policy, threads, _prefactor(3))
    return {n: _finish(v, policy, f"derivative n = {n}") for n, v in zip(ns, raw)}


def coeff_b_plus_ds(
    query: CoefficientQuery, policy: TruncationPolicy = TruncationPolicy(), step: float = 1e-3
) -> TruncatedValue:
    if query.weight.twice_k != 3 or abs(query.s - 0.75) > 1e-12:
        raise UnsupportedWeightRange("the derivative is provided for weight 3/2 at s = 3/4")
    return coeff_b_plus_ds_table(query.m, [query.n], policy, step, level=query.level)[query.n]


# ---------------------------------------------------------------------------
# harmonic expansions


@dataclass
class HarmonicExpansion:
    """sum c+(n) q^n + c-(0) y^{1-k} + sum c-(n) Gamma(1-k, -4 pi n y) q^n."""

    weight: Weight
    level: int
    hol: dict = field(default_factory=dict)
    nonhol: dict = field(default_factory=dict)
    ypow: complex = 0j
    n_max: int = 0
    errors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_hol(self, n: int, c: complex, err: float = 0.0):
        self.hol[n] = self.hol.get(n, 0j) + c
        if err:
            self.errors[n] = self.errors.get(n, 0.0) + err

    def add_nonhol(self, n: int, c: complex):
        self.nonhol[n] = self.nonhol.get(n, 0j) + c

    def combine(self, other: "HarmonicExpansion", a: complex = 1.0, b: complex = 1.0) -> "HarmonicExpansion":
        if other.weight != self.weight:
            raise ValueError("weights differ")
        out = HarmonicExpansion(self.weight, max(self.level, other.level), n_max=min(self.n_max, other.n_max))
        for src, f in ((self, a), (other, b)):
            for n, c in src.hol.items():
                out.add_hol(n, f * c, abs(f) * src.errors.get(n, 0.0))
            for n, c in src.nonhol.items():
                out.add_nonhol(n, f * c)
            out.ypow += f * src.ypow
        return out

    def scaled(self, f: complex) -> "HarmonicExpansion":
        return HarmonicExpansion(self.weight, self.level, n_max=self.n_max).combine(self, 0.0, f)

    def __call__(self, z: complex, **kw) -> complex:
        return evaluate(self, z, **kw)


def _expansion_integral_cases(m, weight, level, n_max, policy, plus):
    k = weight.k
    if k > 2:
        s = k / 2
    elif k < 0:
        s = 1 - k / 2
    else:
        raise UnsupportedWeightRange(f"weight {k} needs k > 2 or k < 0")
    ns = [n for n in range(-n_max, n_max + 1)]
    if plus:
        ns = [n for n in ns if in_plus_class(n, weight.twice_k)]
    if k > 2:
        ns = [n for n in ns if n > 0]
    table = coefficient_table(m, weight, level, ns, s, policy, plus=plus)
    exp = HarmonicExpansion(weight, level, n_max=n_max)
    if k > 2:
        exp.add_hol(m, 1.0 if m == 0 else specfun.rgamma(k))
        g = specfun.rgamma(k)
        for n, v in table.items():
            f = g * n ** (k - 1)
            exp.add_hol(n, v.value * f, v.error_estimate * f)
        return exp
    g1 = specfun.rgamma(1 - k)
    sign = specfun.minus_one_power(k)
    if m < 0:
        exp.add_hol(m, 1.0)
        exp.add_nonhol(m, -g1)
    elif m > 0:
        exp.add_hol(m, -sign)
        exp.add_nonhol(m, sign * g1)
    else:
        exp.ypow += 1.0
    for n, v in table.items():
        if n > 0:
            f = n ** (k - 1)
            exp.add_hol(n, v.value * f, v.error_estimate * f)
        elif n < 0:
            exp.add_nonhol(n, v.value * abs(n) ** (k - 1) * g1)
        else:
            f = (4 * math.pi) ** (1 - k) * specfun.rgamma(2 - k)
            exp.add_hol(0, v.value * f, v.error_estimate * f)
    return exp


def expansion_special(
    m: int,
    weight: Weight,
    level: int,
    n_max: int,
    policy: TruncationPolicy = TruncationPolicy(),
    *,
    plus: bool = False,
) -> HarmonicExpansion:
    """The harmonic expansion of F_{m,k,N} at its harmonic spectral point.

    k > 2 uses s = k/2, k < 0 uses s = 1 - k/2, and weight 3/2 in the plus
    space uses s = 3/4, including the limiting terms at pole-bearing indices.
    """
    if weight.twice_k == 3 and plus:
        return _expansion_three_halves(m, level, n_max, policy)
    return _expansion_integral_cases(m, weight, level, n_max, policy, plus)


def _expansion_three_halves(D: int, level: int, n_max: int, policy: TruncationPolicy) -> HarmonicExpansion:
    weight = Weight(3)
    _check_plus(D, 0, weight, level)
    exp = HarmonicExpansion(weight, level, n_max=n_max)
    ns = [n for n in range(1, n_max + 1) if in_plus_class(n, 3)]
    table = coefficient_table(D, weight, level, ns, 0.75, policy, plus=True)
    r = 2 / math.sqrt(math.pi)
    exp.add_hol(D, r if D != 0 else 1.0)
    for n, v in table.items():
        f = r * math.sqrt(n)
        exp.add_hol(n, v.value * f, v.error_estimate * f)
    exp.meta["c_used"] = max((v.c_used for v in table.values()), default=0)
    squares = [j * j for j in range(1, math.isqrt(n_max) + 1)]
    if D == 0:
        exp.ypow += -3 / (2 * math.pi)
        for d in squares:
            exp.add_nonhol(-d, -3 / math.sqrt(math.pi) * math.sqrt(d))
    elif D < 0 and is_square(-D):
        exp.ypow += -6 * math.pi**-1.5
        for d in squares:
            exp.add_nonhol(-d, -12 / math.pi * math.sqrt(d))
    return exp


def derivative_expansion(
    D: int,
    n_max: int,
    policy: TruncationPolicy = TruncationPolicy(),
    step: float = 1e-3,
    *,
    holomorphic: bool = True,
):
    """Harmonic expansion of d/ds F_D^+(z, s) at s = 3/4 for D > 0.

    The q^D datum keeps its closed form (-2 sqrt(pi) i holomorphically and -i
    against Gamma(-1/2, -4 pi D y)); every other coefficient comes from the
    engine. holomorphic=False skips the derivative sums for n > 0, which the
    shadow does not need.
    """
    if D <= 0:
        raise UnsupportedWeightRange("the derivative expansion is built for D > 0")
    weight = Weight(3)
    level = 4
    exp = HarmonicExpansion(weight, level, n_max=n_max)
    pos = [n for n in range(1, n_max + 1) if in_plus_class(n, 3) and n != D]
    neg = [n for n in range(-n_max, 1) if in_plus_class(n, 3)]
    ds = coeff_b_plus_ds_table(D, pos, policy, step) if holomorphic else {}
    vals = coefficient_table(D, weight, level, neg, 0.75, policy, plus=True)
    for n, v in ds.items():
        f = 2 * math.sqrt(n) / math.sqrt(math.pi)
        exp.add_hol(n, v.value * f, v.error_estimate * f)
    exp.add_hol(D, -2j * math.sqrt(math.pi))
    exp.add_nonhol(D, -1j)
    for n, v in vals.items():
        if n == 0:
            exp.ypow += v.value * 2 / math.pi
            exp.errors["ypow"] = v.error_estimate * 2 / math.pi
        else:
            exp.add_nonhol(n, v.value * math.sqrt(-n))
            exp.errors[("nonhol", n)] = v.error_estimate * math.sqrt(-n)
    return exp


def shadow(exp: HarmonicExpansion) -> dict[int, complex]:
    """Coefficients of xi_k applied to the expansion, indexed by q-exponent."""
    k = exp.weight.k
    out: dict[int, complex] = {}
    if exp.ypow:
        out[0] = (1 - k) * complex(exp.ypow).conjugate()
    for n, c in exp.nonhol.items():
        p = _principal_power(-4 * math.pi * n, 1 - k)
        out[-n] = out.get(-n, 0j) - (c * p).conjugate()
    return out


def _principal_power(x: float, a: float) -> complex:
    if x > 0:
        return complex(x**a)
    return abs(x) ** a * specfun.unit_turn(a / 2)


# ---------------------------------------------------------------------------
# evaluation


def _nonhol_term(a: float, n: int, y: float) -> complex:
    # Gamma(a, -4 pi n y) |q^n| with the growth and decay folded together
    X = -4 * math.pi * n * y
    if X >= 700:
        return complex(_scaled_gamma(a, X) * math.exp(-X / 2))
    return specfun.inc_gamma_cplx(a, X) * math.exp(X / 2)


def _scaled_gamma(a: float, x: float) -> float:
    # e^x Gamma(a, x) for large x from the asymptotic series
    s, t = 1.0, 1.0
    for j in range(1, 60):
        t *= (a - j) / x
        if abs(t) < 1e-17:
            break
        s += t
    return x ** (a - 1) * s


def evaluate(exp: HarmonicExpansion, z: complex, *, y_min: float = 0.1, tail_tol: float | None = None) -> complex:
    """Sum the truncated expansion at z. Raises TailTooLarge when the first
    omitted holomorphic terms are estimated above tail_tol."""
    x, y = z.real, z.imag
    if y < y_min:
        raise ValueError(f"Im z = {y} is below y_min = {y_min}")
    k = exp.weight.k
    re: list[float] = []
    im: list[float] = []

    def add(w: complex):
        re.append(w.real)
        im.append(w.imag)

    for n, c in exp.hol.items():
        add(c * cmath.exp(2j * math.pi * n * z))
    if exp.ypow:
        add(exp.ypow * y ** (1 - k))
    for n, c in exp.nonhol.items():
        add(c * _nonhol_term(1 - k, n, y) * cmath.exp(2j * math.pi * n * x))
    if tail_tol is not None:
        tail = tail_bound(exp, y)
        if tail > tail_tol:
            raise TailTooLarge(f"estimated tail {tail:.3g} exceeds {tail_tol:.3g}")
    return complex(math.fsum(re), math.fsum(im))


def tail_bound(exp: HarmonicExpansion, y: float) -> float:
    """Geometric estimate of the omitted holomorphic terms beyond n_max."""
    top = [abs(c) for n, c in exp.hol.items() if n > exp.n_max // 2]
    if not top or exp.n_max <= 0:
        return 0.0
    r = math.exp(-2 * math.pi * y)
    # coefficients are allowed to keep growing at the rate seen near n_max
    grow = 1.0 + 4.0 / max(exp.n_max, 1)
    return max(top) * grow * r ** (exp.n_max + 1) / max(1e-300, 1 - grow * r)


def evaluate_raw(
    m: int,
    weight: Weight,
    level: int,
    s: float,
    z: complex,
    n_max: int,
    policy: TruncationPolicy = TruncationPolicy(),
) -> complex:
    """F_{m,k,N}(z, s) from its seed term and coefficients with |n| <= n_max."""
    x, y = z.real, z.imag
    k = weight.k
    ns = list(range(-n_max, n_max + 1))
    table = coefficient_table(m, weight, level, ns, s, policy)
    total = specfun.script_M(m, k, y, s) * cmath.exp(2j * math.pi * m * x)
    for n, v in table.items():
        w = specfun.script_W(n, k, y, s)
        if w:
            total += v.value * w * cmath.exp(2j * math.pi * n * x)
    return total


def j_factor(gamma: Sequence[Sequence[int]], z: complex, weight: Weight) -> complex:
    """Automorphy factor: sqrt(cz + d), times (c/d) eps_d^{-1} for half-integral weight."""
    (a, b), (c, d) = gamma
    root = cmath.sqrt(c * z + d)
    if not weight.half_integral:
        return root
    return kronecker_symbol(c, d) * eps_power(d, -1) * root


def modularity_residual(form: Callable[[complex], complex], gamma, z: complex, weight: Weight) -> float:
    """|j(gamma, z)^{-2k} form(gamma z) - form(z)|."""
    (a, b), (c, d) = gamma
    if a * d - b * c != 1:
        raise ValueError("gamma must have determinant 1")
    gz = (a * z + b) / (c * z + d)
    j = j_factor(gamma, z, weight)
    return abs(j ** (-weight.twice_k) * form(gz) - form(z))
