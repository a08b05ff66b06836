"""Assembly of the weight 1/2 and 3/2 bases, Zagier's Eisenstein series, the
integer q-expansion oracles, and the duality and shadow checks."""

from __future__ import annotations

import cmath
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import specfun
from .arith import divisor_sigma, hurwitz_class_number, in_plus_class, is_square
from .poincare import (
    HarmonicExpansion,
    TruncationPolicy,
    Weight,
    coeff_b_plus_ds_table,
    coefficient_table,
    derivative_expansion,
    expansion_special,
    shadow,
)


class IndexClass(ValueError):
    """An index lies outside the residue classes a basis is defined on."""


# ---------------------------------------------------------------------------
# q-series container and serialization


@dataclass
class QSeries:
    """A truncated q-expansion sum c(n) q^n, known for n <= n_max.

    Coefficients may be exact (int, Fraction) or floating (complex).
    """

    level: int
    twice_k: int
    plus_space: bool
    coeffs: dict
    n_max: int
    errors: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.plus_space:
            for n, c in self.coeffs.items():
                if n != 0 and c != 0 and not in_plus_class(n, self.twice_k):
                    raise ValueError(f"exponent {n} violates the plus-space condition")

    def __getitem__(self, n: int):
        if n > self.n_max:
            raise KeyError(f"exponent {n} is beyond n_max = {self.n_max}")
        return self.coeffs.get(n, 0)

    def error(self, n: int) -> float:
        return self.errors.get(n, 0.0)

    def exponents(self) -> list[int]:
        return sorted(self.coeffs)

    def to_json(self, *, reproducible: bool = True) -> str:
        """Canonical JSON with every float written to 17 significant digits."""
        rows = []
        for n in self.exponents():
            c = complex(self.coeffs[n])
            rows.append(f"[{n}, {_num(c.real)}, {_num(c.imag)}]")
        errs = [f"[{n}, {_num(self.errors[n])}]" for n in sorted(self.errors, key=_err_key) if isinstance(n, int)]
        parts = [
            f'  "level": {self.level}',
            f'  "weight_times_2": {self.twice_k}',
            f'  "plus_space": {"true" if self.plus_space else "false"}',
            f'  "n_max": {self.n_max}',
            '  "coeffs": [' + ", ".join(rows) + "]",
            '  "error_estimates": [' + ", ".join(errs) + "]",
            '  "notes": [' + ", ".join(_json_str(s) for s in self.notes) + "]",
        ]
        if not reproducible:
            stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
            parts.append(f'  "generated_at": {_json_str(stamp)}')
        return "{\n" + ",\n".join(parts) + "\n}\n"

    def to_csv(self) -> str:
        lines = ["# lossy export: JSON is canonical; err is blank where no estimate exists", "n,re,im,err"]
        for n in self.exponents():
            c = complex(self.coeffs[n])
            e = self.errors.get(n)
            lines.append(f"{n},{_num(c.real)},{_num(c.imag)},{'' if e is None else _num(e)}")
        return "\n".join(lines) + "\n"


def _err_key(n):
    return (0, n) if isinstance(n, int) else (1, str(n))


def _num(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    if not math.isfinite(x):
        raise ValueError("non-finite values cannot be serialized")
    return format(x, ".17g")


def _json_str(s: str) -> str:
    return json.dumps(s)


def qseries_from_json(text: str) -> QSeries:
    obj = json.loads(text)
    coeffs = {int(n): complex(re, im) for n, re, im in obj["coeffs"]}
    errors = {int(n): float(e) for n, e in obj["error_estimates"]}
    return QSeries(
        obj["level"], obj["weight_times_2"], obj["plus_space"], coeffs, obj["n_max"], errors, list(obj.get("notes", []))
    )


# ---------------------------------------------------------------------------
# exact Laurent series arithmetic for the oracles


class _Laurent:
    """sum c[i] q^(lo + i), exact through exponent hi."""

    __slots__ = ("lo", "c")

    def __init__(self, lo: int, c: list):
        self.lo = lo
        self.c = list(c)

    @property
    def hi(self) -> int:
        return self.lo + len(self.c) - 1

    def __getitem__(self, n: int):
        if n > self.hi:
            raise KeyError(f"exponent {n} is beyond the known range")
        i = n - self.lo
        return self.c[i] if i >= 0 else 0

    def __add__(self, other: "_Laurent") -> "_Laurent":
        lo, hi = min(self.lo, other.lo), min(self.hi, other.hi)
        return _Laurent(lo, [self[n] + other[n] for n in range(lo, hi + 1)])

    def __sub__(self, other: "_Laurent") -> "_Laurent":
        return self + other.scale(-1)

    def scale(self, f) -> "_Laurent":
        return _Laurent(self.lo, [f * x for x in self.c])

    def __mul__(self, other: "_Laurent") -> "_Laurent":
        hi = min(self.hi + other.lo, other.hi + self.lo)
        lo = self.lo + other.lo
        out = [0] * (hi - lo + 1)
        for i, a in enumerate(self.c):
            if not a:
                continue
            for j in range(min(len(other.c), hi - lo - i + 1)):
                out[i + j] += a * other.c[j]
        return _Laurent(lo, out)

    def shift(self, e: int) -> "_Laurent":
        return _Laurent(self.lo + e, self.c)

    def dilate(self, r: int) -> "_Laurent":
        """f(q) -> f(q^r)."""
        out = [0] * ((len(self.c) - 1) * r + 1)
        out[::r] = self.c
        return _Laurent(self.lo * r, out)

    def derivative(self) -> "_Laurent":
        """q d/dq."""
        return _Laurent(self.lo, [(self.lo + i) * x for i, x in enumerate(self.c)])

    def inverse(self) -> "_Laurent":
        """1/f for a series whose first coefficient is nonzero."""
        a0 = self.c[0]
        if not a0:
            raise ZeroDivisionError("leading coefficient is zero")
        inv0 = Fraction(1, 1) / a0 if not isinstance(a0, int) or abs(a0) != 1 else a0
        N = len(self.c)
        b = [0] * N
        b[0] = inv0
        for n in range(1, N):
            acc = sum(self.c[j] * b[n - j] for j in range(1, n + 1))
            b[n] = -acc * inv0
        return _Laurent(-self.lo, b)

    def truncate(self, hi: int) -> "_Laurent":
        return _Laurent(self.lo, self.c[: max(0, hi - self.lo + 1)])


def _euler_product(power: int, N: int) -> _Laurent:
    """prod_{n>=1} (1 - q^n)^power through q^N."""
    c = [0] * (N + 1)
    c[0] = 1
    # pentagonal expansion of prod (1 - q^n), then powering
    k = 0
    while True:
        for j in (k, -k) if k else (0,):
            e = j * (3 * j - 1) // 2
            if e <= N:
                c[e] = -1 if j % 2 else 1
        k += 1
        if k * (3 * k - 1) // 2 > N:
            break
    base = _Laurent(0, c)
    if power < 0:
        base = base.inverse()
        power = -power
    out = _Laurent(0, [1] + [0] * N)
    while power:
        if power & 1:
            out = out * base
        base = base * base
        power >>= 1
    return out


def eta_quotient(exps: dict, N: int) -> tuple[Fraction, _Laurent]:
    """prod eta(delta tau)^r as (q-exponent offset, integer series through q^N)."""
    offset = Fraction(sum(d * r for d, r in exps.items()), 24)
    out = _Laurent(0, [1] + [0] * N)
    for d, r in exps.items():
        part = _euler_product(r, N // d + 1).dilate(d).truncate(N)
        out = out * part
    return offset, out.truncate(N)


def _eisenstein(k: int, N: int) -> _Laurent:
    coef = {4: 240, 6: -504, 8: 480, 10: -264, 14: -24}[k]
    return _Laurent(0, [1] + [coef * divisor_sigma(n, k - 1) for n in range(1, N + 1)])


def _delta(N: int) -> _Laurent:
    return _euler_product(24, N - 1).shift(1)


def _j1(N: int) -> _Laurent:
    """j - 744 = q^{-1} + 196884 q + ... through q^N."""
    e4 = _eisenstein(4, N + 2)
    j = e4 * e4 * e4 * _delta(N + 2).inverse()
    j = j.truncate(N)
    c = list(j.c)
    c[1] -= 744
    return _Laurent(j.lo, c)


def _theta(N: int) -> _Laurent:
    c = [0] * (N + 1)
    m = 0
    while m * m <= N:
        c[m * m] += 1 if m == 0 else 2
        m += 1
    return _Laurent(0, c)


def _theta_alternating(N: int) -> _Laurent:
    c = [0] * (N + 1)
    m = 0
    while m * m <= N:
        c[m * m] += 1 if m == 0 else 2 * (-1) ** m
        m += 1
    return _Laurent(0, c)


def _as_qseries(L: _Laurent, level: int, twice_k: int, plus: bool, n_max: int) -> QSeries:
    coeffs = {n: L[n] for n in range(L.lo, n_max + 1) if L[n] != 0}
    return QSeries(level, twice_k, plus, coeffs, n_max)


def theta_series(n_max: int) -> QSeries:
    return _as_qseries(_theta(n_max), 4, 1, True, n_max)


def e4_oracle(n_max: int) -> QSeries:
    return _as_qseries(_eisenstein(4, n_max), 1, 8, False, n_max)


_ORACLE_LIMIT = 64


def j_oracle(m: int, n_max: int, *, method: str = "hecke") -> QSeries:
    """j_m = q^{-m} + O(q), the unique such polynomial in j.

    method="hecke" uses c_m(n) = sum_{d | (m, n)} (m/d) c_1(mn/d^2);
    method="faber" reduces j_1^m against lower j_i. Both are exact.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if n_max > _ORACLE_LIMIT:
        raise ValueError(f"oracle expansions are limited to n_max <= {_ORACLE_LIMIT}")
    if method == "hecke":
        base = _j1(m * n_max)
        coeffs = {-m: 1}
        for n in range(1, n_max + 1):
            g = math.gcd(m, n)
            coeffs[n] = sum((m // d) * base[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
        return QSeries(1, 0, False, {n: c for n, c in coeffs.items() if c}, n_max)
    if method == "faber":
        L = _faber(m, n_max)
        return _as_qseries(L, 1, 0, False, n_max)
    raise ValueError(f"unknown method {method!r}")


def _faber(m: int, n_max: int) -> _Laurent:
    base = _j1(n_max + m)
    lower = {i: _faber(i, n_max + m - i) for i in range(1, m)}
    P = _Laurent(0, [1] + [0] * (n_max + 2 * m))
    for _ in range(m):
        P = P * base
    for e in range(-m + 1, 1):
        c = P[e]
        if not c:
            continue
        if e == 0:
            P = P - _Laurent(0, [c] + [0] * P.hi)
        else:
            P = P - lower[-e].scale(c)
    return P.truncate(n_max)


def _rankin_cohen_1(f: _Laurent, kf: Fraction, g: _Laurent, kg: Fraction) -> _Laurent:
    return f.scale(kf) * g.derivative() - f.derivative() * g.scale(kg)


def _f_minus_three(N: int) -> _Laurent:
    # -[theta, E10(4 tau)] / (20 Delta(4 tau)) has principal part q^{-3}; the
    # constant is removed with theta afterwards
    P = N + 8
    th = _theta(P)
    e10 = _eisenstein(10, P // 4 + 1).dilate(4).truncate(P)
    br = _rankin_cohen_1(th, Fraction(1, 2), e10, Fraction(10))
    d4 = _delta(P // 4 + 2).dilate(4)
    f = (br * d4.inverse()).scale(Fraction(-1, 20))
    f = f - th.scale(f[0])
    return f.truncate(N)


def _reduce_principal(gens: list[_Laurent], target: int, N: int) -> _Laurent:
    """Echelon-reduce series against one another so that each keeps a single
    principal exponent; return the one led by q^target."""
    pivots: dict[int, _Laurent] = {}
    for g in sorted(gens, key=lambda s: s.lo):
        cur = g
        for e in range(cur.lo, 1):
            c = cur[e]
            if c and e in pivots:
                cur = cur - pivots[e].scale(c)
        lead = next((e for e in range(cur.lo, 1) if cur[e]), None)
        if lead is None:
            continue
        cur = cur.scale(Fraction(1) / cur[lead]) if cur[lead] != 1 else cur
        for e, p in list(pivots.items()):
            c = p[lead]
            if c:
                pivots[e] = p - cur.scale(c)
        pivots[lead] = cur
    if target not in pivots:
        raise ValueError(f"no generator reaches exponent {target}")
    out = pivots[target]
    out = _Laurent(target, [out[n] for n in range(target, N + 1)])
    return out


def f_oracle(d: int, n_max: int) -> QSeries:
    """Exact f_d for d <= 0 from theta, a Rankin-Cohen bracket and j(4 tau)."""
    if d > 0 or d % 4 not in (0, 1):
        raise IndexClass(f"f_d needs d <= 0 with d = 0, 1 mod 4, got {d}")
    if n_max > _ORACLE_LIMIT:
        raise ValueError(f"oracle expansions are limited to n_max <= {_ORACLE_LIMIT}")
    if d == 0:
        return theta_series(n_max)
    a_max = -d // 4
    P = n_max + 4 * a_max + 4
    th = _theta(P)
    f3 = _f_minus_three(P)
    J4 = _j1(P // 4 + 1).dilate(4)
    gens = []
    power = _Laurent(0, [1] + [0] * (P + 4 * a_max))
    for _ in range(a_max + 1):
        gens.append(th * power)
        gens.append(f3 * power)
        power = power * J4
    L = _reduce_principal(gens, d, n_max)
    return _check_integral(_as_qseries(L, 4, 1, True, n_max))


def g_oracle(D: int, n_max: int) -> QSeries:
    """Exact g_{-1} = theta_1(tau) E4(4 tau) / eta(4 tau)^6, theta_1 = sum (-1)^n q^{n^2}."""
    if D != -1:
        raise ValueError("the integer oracle is only built for D = -1")
    if n_max > _ORACLE_LIMIT:
        raise ValueError(f"oracle expansions are limited to n_max <= {_ORACLE_LIMIT}")
    P = n_max + 4
    e4 = _eisenstein(4, P // 4 + 1).dilate(4).truncate(P)
    eta = _euler_product(6, P // 4 + 1).dilate(4).truncate(P)
    L = (_theta_alternating(P) * e4 * eta.inverse()).shift(-1)
    return _check_integral(_as_qseries(L, 4, 3, True, n_max))


def _check_integral(q: QSeries) -> QSeries:
    for n, c in q.coeffs.items():
        if Fraction(c).denominator != 1:
            raise ArithmeticError(f"oracle coefficient at q^{n} is not integral: {c}")
        q.coeffs[n] = int(c)
    return q


# ---------------------------------------------------------------------------
# Zagier's weight 3/2 Eisenstein series


def zagier_eisenstein(n_max: int) -> HarmonicExpansion:
    """E(z) = sum H(n) q^n + (1/(16 pi sqrt y)) sum_{n in Z} beta(4 pi n^2 y) q^{-n^2}.

    The non-holomorphic terms are stored against Gamma(-1/2, 4 pi n^2 y) with
    beta(x) = sqrt(x) Gamma(-1/2, x): the pair +-m gives m / (4 sqrt pi) at
    q^{-m^2}, and n = 0 gives y^{-1/2} / (8 pi). meta["exact"] keeps H(n).
    """
    exp = HarmonicExpansion(Weight(3), 4, n_max=n_max)
    exact = {}
    for n in range(n_max + 1):
        h = hurwitz_class_number(n)
        if h:
            exact[n] = h
            exp.add_hol(n, float(h))
    exp.ypow = 1 / (8 * math.pi)
    m = 1
    while m * m <= n_max:
        exp.add_nonhol(-m * m, m / (4 * math.sqrt(math.pi)))
        m += 1
    exp.meta["exact"] = exact
    exp.meta["kernel"] = "beta(x) = sqrt(x) Gamma(-1/2, x) at x = 4 pi n^2 y"
    return exp


def zagier_eisenstein_direct(z: complex, n_max: int) -> complex:
    """E(z) summed straight from H(n) and beta, for cross-checking."""
    x, y = z.real, z.imag
    total = [complex(float(hurwitz_class_number(n))) * _q(n, z) for n in range(n_max + 1)]
    pre = 1 / (16 * math.pi * math.sqrt(y))
    total.append(pre * 2.0)
    m = 1
    while m * m <= n_max:
        X = 4 * math.pi * m * m * y
        if X > 1400:
            break
        # beta(X) |q^{-m^2}| = beta(X) e^{X/2}, kept finite by folding the two
        total.append(2 * pre * specfun.beta_zagier(X) * math.exp(X / 2) * _q(-m * m, x))
        m += 1
    return complex(math.fsum(t.real for t in total), math.fsum(t.imag for t in total))


def _q(n: int, z: complex) -> complex:
    return cmath.exp(2j * math.pi * n * z)


def eisenstein_F0(n_max: int, policy: TruncationPolicy | None = None) -> HarmonicExpansion:
    """F_0^+(z, 3/4): -12 E(z) exactly, or from the engine when a policy is given."""
    if policy is None:
        return zagier_eisenstein(n_max).scaled(-12.0)
    return expansion_special(0, Weight(3), 4, n_max, policy, plus=True)


# ---------------------------------------------------------------------------
# the bases


def _require_plus(n: int, twice_k: int, what: str):
    if not in_plus_class(n, twice_k):
        raise IndexClass(f"{what} = {n} is outside the plus-space classes")


def f_series(d: int, n_max: int, policy: TruncationPolicy = TruncationPolicy(), *, threads=None) -> QSeries:
    """f_d = q^d + sum A(D, d) q^{-D} from weight 1/2 plus-space coefficients at s = 3/4.

    The coefficient of q^n is a_d(n) / sqrt(n) with
    a_d(n) = b_{d,1/2}(n, 3/4) - 8 sqrt(n) b_{d,1/2}(0, 3/4) [n square],
    and b_{d,1/2}(0, 3/4) = 3 H(-d) taken exactly.
    """
    if d > 0:
        raise IndexClass(f"f_d needs d <= 0, got {d}")
    _require_plus(d, 1, "d")
    if d == 0:
        return theta_series(n_max)
    ns = [n for n in range(1, n_max + 1) if in_plus_class(n, 1)]
    table = coefficient_table(d, Weight(1), 4, ns, 0.75, policy, plus=True, threads=threads)
    b0 = 3 * float(hurwitz_class_number(-d))
    coeffs: dict = {d: 1.0 + 0j}
    errors: dict = {d: 0.0}
    c_used = 0
    for n, v in table.items():
        a = v.value - (8 * math.sqrt(n) * b0 if is_square(n) else 0.0)
        coeffs[n] = a / math.sqrt(n)
        errors[n] = v.error_estimate / math.sqrt(n)
        c_used = max(c_used, v.c_used)
    q = QSeries(4, 1, True, coeffs, n_max, errors)
    q.notes.append(f"c_used <= {c_used}")
    _flag_imaginary(q)
    return q


def g_series_neg(D: int, n_max: int, policy: TruncationPolicy = TruncationPolicy(), *, eisenstein=None) -> QSeries:
    """g_D = q^D + sum B(D, d) q^{-d} for D < 0 from F_D^+(z, 3/4).

    When -D is a square the -(4/sqrt pi) F_0^+ correction removes the
    non-holomorphic part; F_0^+ is -12 E unless an engine policy is passed
    as eisenstein.
    """
    if D >= 0:
        raise IndexClass(f"g_D here needs D < 0, got {D}")
    _require_plus(D, 3, "D")
    exp = expansion_special(D, Weight(3), 4, n_max, policy, plus=True)
    c_used = exp.meta.get("c_used", 0)
    if is_square(-D):
        exp = exp.combine(eisenstein_F0(n_max, eisenstein), 1.0, -4 / math.sqrt(math.pi))
    exp = exp.scaled(math.sqrt(math.pi) / 2)
    q = _hol_series(exp, n_max)
    q.notes.append(f"c_used <= {c_used}")
    residual = max([abs(c) for c in exp.nonhol.values()] + [abs(exp.ypow)])
    q.notes.append(f"non-holomorphic residual {residual:.3g}")
    _flag_imaginary(q)
    return q


def _hol_series(exp: HarmonicExpansion, n_max: int) -> QSeries:
    coeffs = {n: complex(c) for n, c in exp.hol.items() if n <= n_max}
    errors = {n: e for n, e in exp.errors.items() if isinstance(n, int) and n <= n_max}
    return QSeries(exp.level, exp.weight.twice_k, True, coeffs, n_max, errors)


def _flag_imaginary(q: QSeries, skip=()):
    for n, c in q.coeffs.items():
        if n in skip or isinstance(c, (int, Fraction)):
            continue
        if abs(complex(c).imag) > 10 * q.errors.get(n, 0.0) + 1e-9 * max(1.0, abs(c)):
            q.notes.append(f"imaginary part at q^{n} exceeds 10 error estimates")


def _hurwitz_table(ns, eisenstein):
    """H(n) exactly, or read off the engine's F_0^+ when a policy is given."""
    if eisenstein is None:
        return {n: float(hurwitz_class_number(n)) for n in ns}, {n: 0.0 for n in ns}
    ns = [n for n in ns if n > 0]
    table = coefficient_table(0, Weight(3), 4, ns, 0.75, eisenstein, plus=True)
    f = {n: -math.sqrt(n / math.pi) / 6 for n in ns}
    vals = {n: (table[n].value * f[n]).real for n in ns}
    errs = {n: table[n].error_estimate * abs(f[n]) for n in ns}
    vals[0], errs[0] = -1 / 12, 0.0
    return vals, errs


def g_mock_series(
    D: int,
    n_max: int,
    policy: TruncationPolicy = TruncationPolicy(),
    *,
    step: float = 1e-3,
    route: str = "formula",
    eisenstein: TruncationPolicy | None = None,
) -> QSeries:
    """The mock modular g_D = sum b(D, n) q^n for D >= 0.

    D = 0 gives -16 pi H(n). For D > 0 the holomorphic part of
    2 sqrt(pi D) (d/ds F_D^+ - 8 sqrt(pi/D) H(D) F_0^+) is assembled either
    from the closed coefficient formula (route="formula") or by combining
    the two expansions term by term (route="expansion"). eisenstein=None
    takes H(n) exactly; passing a policy reads it from the engine.
    """
    if D < 0:
        raise IndexClass(f"the mock series needs D >= 0, got {D}")
    _require_plus(D, 3, "D")
    ns = [n for n in range(0, n_max + 1) if in_plus_class(n, 3)]
    if D == 0:
        if route == "formula":
            H, Herr = _hurwitz_table(ns, eisenstein)
            coeffs = {n: complex(-16 * math.pi * H[n]) for n in ns if H[n]}
            errors = {n: 16 * math.pi * Herr[n] for n in coeffs}
            return QSeries(4, 3, True, coeffs, n_max, errors)
        exp = eisenstein_F0(n_max, eisenstein).scaled(4 * math.pi / 3)
        return _hol_series(exp, n_max)
    scale = 2 * math.sqrt(math.pi * D)
    pos = [n for n in range(1, n_max + 1) if in_plus_class(n, 3) and n != D]
    if route == "formula":
        H, Herr = _hurwitz_table(sorted(set(ns) | {D}), eisenstein)
        ds = coeff_b_plus_ds_table(D, pos, policy, step)
        corr = 96 * math.sqrt(math.pi / D) * H[D]
        coeffs = {0: complex(-16 * math.pi * H[D])}
        errors = {0: 16 * math.pi * Herr[D]}
        for n in pos:
            f = 2 * math.sqrt(n) / math.sqrt(math.pi)
            coeffs[n] = scale * (ds[n].value * f + corr * H[n])
            errors[n] = scale * (ds[n].error_estimate * f + abs(corr) * Herr[n])
        if D <= n_max:
            coeffs[D] = -4j * math.pi * math.sqrt(D) + 192 * math.pi * H[D] ** 2
            errors[D] = 384 * math.pi * abs(H[D]) * Herr[D]
        q = QSeries(4, 3, True, coeffs, n_max, errors)
    elif route == "expansion":
        H, _ = _hurwitz_table([D], eisenstein)
        exp = derivative_expansion(D, n_max, policy, step)
        exp = exp.combine(eisenstein_F0(n_max, eisenstein), 1.0, -8 * math.sqrt(math.pi / D) * H[D])
        q = _hol_series(exp.scaled(scale), n_max)
    else:
        raise ValueError(f"unknown route {route!r}")
    q.notes.append(f"q^{D} carries the complex head datum and is excluded from integrality checks")
    _flag_imaginary(q, skip=(D,))
    return q


def h_expansion(D: int, n_max: int, policy: TruncationPolicy = TruncationPolicy(), *, holomorphic=True, step=1e-3):
    """h_{D,3/2} for D > 0 as a harmonic expansion; F_0^+ enters as -12 E."""
    if D <= 0:
        raise IndexClass("h_{D,3/2} is assembled here for D > 0")
    _require_plus(D, 3, "D")
    H = float(hurwitz_class_number(D))
    exp = derivative_expansion(D, n_max, policy, step, holomorphic=holomorphic)
    return exp.combine(eisenstein_F0(n_max), 1.0, -8 * math.sqrt(math.pi / D) * H)


# ---------------------------------------------------------------------------
# verification


@dataclass
class DualityReport:
    D: int
    d: int
    A_value: complex
    B_value: complex
    defect: float
    relative_defect: float
    tolerance: float
    A_error: float
    B_error: float
    c_used: tuple

    @property
    def passed(self) -> bool:
        return self.relative_defect <= self.tolerance


DUALITY_POLICY = TruncationPolicy(tol=0.25, rtol=1e-6, c_max=8192)


def duality_grid(
    Ds, ds, policy: TruncationPolicy = DUALITY_POLICY, *, tolerance: float = 1e-2
) -> list[DualityReport]:
    """Duality reports for every (D, d) pair; each f_d and g_D is built once."""
    for D in Ds:
        if D >= 0:
            raise IndexClass(f"D must be negative, got {D}")
        _require_plus(D, 3, "D")
    for d in ds:
        if d > 0:
            raise IndexClass(f"d must be non-positive, got {d}")
        _require_plus(d, 1, "d")
    fs = {d: f_series(d, max(-D for D in Ds), policy) for d in ds}
    gs = {D: g_series_neg(D, max(-d for d in ds), policy) for D in Ds}
    out = []
    for D in Ds:
        for d in ds:
            f, g = fs[d], gs[D]
            A, B = complex(f[-D]), complex(g[-d])
            defect = abs(A + B)
            out.append(
                DualityReport(
                    D,
                    d,
                    A,
                    B,
                    defect,
                    defect / max(1.0, abs(A)),
                    tolerance,
                    f.error(-D),
                    g.error(-d),
                    (_c_used(f), _c_used(g)),
                )
            )
    return out


def duality_check(D: int, d: int, policy: TruncationPolicy = DUALITY_POLICY, *, tolerance: float = 1e-2) -> DualityReport:
    """Compare A(D, d) from f_d with B(D, d) from g_D; they should cancel."""
    return duality_grid([D], [d], policy, tolerance=tolerance)[0]


def _c_used(q: QSeries) -> int:
    for note in q.notes:
        if note.startswith("c_used <= "):
            return int(note.split()[-1])
    return 0


def shadow_check(D: int, exponents=(0, 1, 4), policy: TruncationPolicy = TruncationPolicy(tol=1e-3, c_max=8192)):
    """xi of h_{D,3/2} against its predicted multiple of f_{-D}.

    Returns {n: (computed, expected)} for the requested q-exponents. D = 0
    compares xi(F_0^+) with (3 / (4 pi)) theta.
    """
    n_need = max(exponents)
    if D == 0:
        sh = shadow(eisenstein_F0(n_need))
        target = f_oracle(0, n_need)
        f = 3 / (4 * math.pi)
    else:
        sh = shadow(h_expansion(D, n_need, policy, holomorphic=False))
        target = f_oracle(-D, n_need)
        f = 1 / (2 * math.sqrt(math.pi * D))
    return {n: (sh.get(n, 0j), f * float(target[n])) for n in exponents}
