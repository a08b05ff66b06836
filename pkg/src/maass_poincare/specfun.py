"""Special functions: Kummer, Whittaker, Bessel, incomplete gamma and the
script-M / script-W kernels used by the Poincare series expansions.

Everything is double precision. Series are summed with math.fsum and stop
once three consecutive terms fall below 1e-17 of the running sum.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import scipy.special


class PoleError(ValueError):
    pass


class NonPositiveArgument(ValueError):
    pass


class IntegerB(ValueError):
    pass


class Unsupported(ValueError):
    pass


_MAX_TERMS = 20000
_STOP = 1e-17


def _is_int(x: float) -> bool:
    return float(x).is_integer()


def gamma(x: float) -> float:
    if x <= 0 and _is_int(x):
        raise PoleError(f"gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if x <= 0 and _is_int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _series(term_ratio, first: float = 1.0) -> float:
    terms = [first]
    t = first
    running = first
    small = 0
    for n in range(_MAX_TERMS):
        t *= term_ratio(n)
        if t == 0.0:
            break
        terms.append(t)
        running += t
        small = small + 1 if abs(t) < _STOP * abs(running) else 0
        if small >= 3:
            break
    return math.fsum(terms)


def kummer_M(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric M(a, b, x) = sum (a)_n / (b)_n x^n / n!."""
    if b <= 0 and _is_int(b):
        raise PoleError(f"M(a, b, x) is undefined for b = {b}")
    if x == 0:
        return 1.0
    if x < 0:
        # Kummer's transformation keeps the series free of cancellation
        return math.exp(x) * kummer_M(b - a, b, -x)
    return _series(lambda n: (a + n) / ((b + n) * (n + 1)) * x)


def kummer_U(a: float, b: float, x: float) -> float:
    """Tricomi U(a, b, x) for x > 0 and non-integral b.

    The two-term M-combination is used when it does not cancel badly;
    otherwise the asymptotic series or the Laplace integral takes over.
    """
    if x <= 0:
        raise NonPositiveArgument("kummer_U needs x > 0")
    if _is_int(b):
        raise IntegerB("the two-term formula for U needs non-integral b")
    if x > 10.0:
        u = _kummer_U_asymptotic(a, b, x)
        if u is not None:
            return u
    t1 = gamma(1 - b) * rgamma(a - b + 1) * kummer_M(a, b, x) if rgamma(a - b + 1) else 0.0
    t2 = gamma(b - 1) * rgamma(a) * x ** (1 - b) * kummer_M(a - b + 1, 2 - b, x) if rgamma(a) else 0.0
    u = t1 + t2
    if abs(t1) + abs(t2) <= 1e3 * abs(u):
        return u
    if a > 0:
        return _kummer_U_laplace(a, b, x)
    if a - b + 1 > 0:
        return x ** (1 - b) * _kummer_U_laplace(a - b + 1, 2 - b, x)
    # step down in a: U(a-1) = -(b - 2a - x) U(a) - a (a - b + 1) U(a + 1)
    m = int(math.floor(-a)) + 1
    hi = _kummer_U_laplace(a + m + 1, b, x)
    lo = _kummer_U_laplace(a + m, b, x)
    for j in range(m, 0, -1):
        aj = a + j
        hi, lo = lo, -(b - 2 * aj - x) * lo - aj * (aj - b + 1) * hi
    return lo


def _kummer_U_laplace(a: float, b: float, x: float) -> float:
    # int_0^inf e^{-xt} t^{a-1} (1+t)^{b-a-1} dt / Gamma(a); for a < 1 the
    # substitution t = u^{1/a} removes the endpoint singularity
    from scipy.integrate import quad

    if a < 1:
        p = 1.0 / a

        def f(u):
            t = u**p
            return math.exp(-x * t) * (1.0 + t) ** (b - a - 1)

        scale, cut, knee = p, (745.0 / x) ** a, min((745.0 / x) ** a, x**-a)
    else:

        def f(t):
            return math.exp(-x * t) * t ** (a - 1) * (1.0 + t) ** (b - a - 1)

        scale, cut, knee = 1.0, 745.0 / x + a / x * 40, (a - 1) / x + 1.0 / x
    v1, _ = quad(f, 0.0, knee, epsabs=0.0, epsrel=2e-14, limit=200)
    v2, _ = quad(f, knee, cut, epsabs=0.0, epsrel=2e-14, limit=400)
    return (v1 + v2) * scale * rgamma(a)


def _kummer_U_asymptotic(a: float, b: float, x: float):
    # x^-a sum (a)_n (a-b+1)_n / n! (-x)^-n, cut at the smallest term
    terms = [1.0]
    t = 1.0
    for n in range(200):
        nt = t * (a + n) * (a - b + 1 + n) / ((n + 1) * -x)
        if abs(nt) >= abs(t):
            return None
        terms.append(nt)
        t = nt
        if abs(t) < 1e-17 * abs(math.fsum(terms)):
            return x ** (-a) * math.fsum(terms)
    return None


def whittaker_M(mu: float, nu: float, y: float) -> float:
    if y <= 0:
        raise NonPositiveArgument("whittaker_M needs y > 0")
    return math.exp(-y / 2) * y ** (nu + 0.5) * kummer_M(nu - mu + 0.5, 1 + 2 * nu, y)


def whittaker_W(mu: float, nu: float, y: float) -> float:
    if y <= 0:
        raise NonPositiveArgument("whittaker_W needs y > 0")
    if abs(mu + nu - 0.5) < 1e-15 or abs(mu - nu - 0.5) < 1e-15:
        return y**mu * math.exp(-y / 2)
    if _is_int(2 * nu):
        # W is even in nu, and U(1, b, y) = e^y y^{1-b} Gamma(b-1, y) covers either sign
        for v in (abs(nu), -abs(nu)):
            if abs(mu - (v - 0.5)) < 1e-15:
                return math.exp(y / 2) * y ** (0.5 - v) * inc_gamma_upper(2 * v, y)
        raise Unsupported(f"W with mu={mu}, nu={nu} has no closed form here")
    return math.exp(-y / 2) * y ** (nu + 0.5) * kummer_U(nu - mu + 0.5, 1 + 2 * nu, y)


def whittaker_W_via_M(mu: float, nu: float, y: float) -> float:
    """W from the M-combination, valid for 2nu not an integer."""
    if _is_int(2 * nu):
        raise Unsupported("the M-combination needs 2nu non-integral")
    a = gamma(-2 * nu) * rgamma(0.5 - nu - mu)
    b = gamma(2 * nu) * rgamma(0.5 + nu - mu)
    out = 0.0
    if a:
        out += a * whittaker_M(mu, nu, y)
    if b:
        out += b * whittaker_M(mu, -nu, y)
    return out


def _gamma_cf(a: float, x: float) -> float:
    # modified Lentz on the continued fraction for Gamma(a, x), x large
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x)) * h


def _gamma_lower_series(a: float, x: float) -> float:
    # sum (-1)^n x^(a+n) / (n! (a+n)), valid for a not a non-positive integer
    terms = []
    t = 1.0
    for n in range(_MAX_TERMS):
        if n:
            t *= -x / n
        term = t / (a + n)
        terms.append(term)
        if n > 2 and abs(term) < _STOP * abs(math.fsum(terms)):
            break
    return x**a * math.fsum(terms)


def inc_gamma_upper(a: float, x: float) -> float:
    """Gamma(a, x) = int_x^inf e^-t t^(a-1) dt for real a and x > 0."""
    if x <= 0:
        raise NonPositiveArgument("inc_gamma_upper needs x > 0")
    if x > 1.0 + max(a, 0.0):
        return _gamma_cf(a, x)
    if not (a <= 0 and _is_int(a)):
        return gamma(a) - _gamma_lower_series(a, x)
    # non-positive integer a: recur downwards from E1(x) = Gamma(0, x)
    g = -_EULER - math.log(x) - _e1_series_tail(x)
    for s in range(0, int(a), -1):
        g = (g - x ** (s - 1) * math.exp(-x)) / (s - 1)
    return g


_EULER = 0.57721566490153286061


def _e1_series_tail(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{n>=1} (-x)^n / (n n!)
    terms = []
    t = 1.0
    for n in range(1, _MAX_TERMS):
        t *= -x / n
        terms.append(t / n)
        if abs(t / n) < _STOP:
            break
    return math.fsum(terms)


def inc_gamma_upper_negx(a: float, x: float) -> complex:
    """Gamma(a, x) for x < 0 on the principal branch (arg x = pi).

    Uses Gamma(a, z) = Gamma(a) - z^a M(a, a+1, -z) / a, so with z = -|x|
    the Kummer series has positive argument and no cancellation.
    """
    if x >= 0:
        if x == 0:
            raise PoleError("branch undefined at x = 0")
        raise ValueError("inc_gamma_upper_negx needs x < 0")
    r = -x
    if _is_int(a) and a >= 1:
        n = int(a)
        # (n-1)! e^{-z} sum_{j<n} z^j / j!, real
        s = math.fsum((-r) ** j / math.factorial(j) for j in range(n))
        return complex(math.factorial(n - 1) * math.exp(r) * s, 0.0)
    if a <= 0 and _is_int(a):
        raise PoleError("inc_gamma_upper_negx needs a not a non-positive integer")
    za = r**a * unit_turn(a / 2)
    return gamma(a) - za * kummer_M(a, a + 1, r) / a


def beta_zagier(x: float) -> float:
    """int_1^inf t^(-3/2) e^(-x t) dt = sqrt(x) Gamma(-1/2, x)."""
    if x <= 0:
        raise NonPositiveArgument("beta_zagier needs x > 0")
    return math.sqrt(x) * inc_gamma_upper(-0.5, x)


# Bessel functions. Arrays are accepted so the coefficient engine can
# evaluate a whole range of moduli at once.

_J_SWITCH = 15.0
_I_SWITCH = 30.0


def _bessel_series(nu: float, x: np.ndarray, sign: float) -> np.ndarray:
    h = x / 2.0
    t = h**nu / math.gamma(nu + 1.0)
    total = t.copy()
    comp = np.zeros_like(t)
    q = sign * h * h
    for k in range(1, 400):
        t = t * q / (k * (k + nu))
        # Kahan step keeps the long alternating sums honest
        y = t - comp
        new = total + y
        comp = (new - total) - y
        total = new
        if np.all(np.abs(t) <= 1e-17 * np.abs(total)):
            break
    return total


def _hankel_pq(nu: float, x: np.ndarray):
    # P and Q of the Hankel expansion, each cut where its terms stop shrinking;
    # also returns the smallest term reached, which bounds the error
    mu4 = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    t = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    smallest = np.ones_like(x)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        t = t * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        live &= (np.abs(t) < np.abs(prev)) & (np.abs(prev) > 1e-17)
        if not live.any():
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q = np.where(live, q + sign * t, q)
        else:
            p = np.where(live, p + sign * t, p)
        smallest = np.where(live, np.minimum(smallest, np.abs(t)), smallest)
        prev = t
    # a term that is exactly zero (nu a half-integer) ends the series exactly
    smallest = np.where(np.abs(t) == 0, 0.0, smallest)
    return p, q, smallest


_ASYMPTOTIC_OK = 1e-15


def bessel_J(nu: float, x):
    """J_nu(x) for x > 0; power series below 15, Hankel expansion above.

    Where the Hankel terms never fall below double precision (large order
    at moderate x) scipy's jv takes over.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    lo = xa <= _J_SWITCH
    if np.any(lo):
        out[lo] = _bessel_series(nu, xa[lo], -1.0)
    if np.any(~lo):
        xs = xa[~lo]
        p, q, smallest = _hankel_pq(nu, xs)
        w = xs - (0.5 * nu + 0.25) * math.pi
        vals = np.sqrt(2.0 / (math.pi * xs)) * (p * np.cos(w) - q * np.sin(w))
        bad = smallest > _ASYMPTOTIC_OK
        if np.any(bad):
            vals[bad] = scipy.special.jv(nu, xs[bad])
        out[~lo] = vals
    return out if np.ndim(x) else float(out[0])


def bessel_I(nu: float, x):
    """I_nu(x) for x > 0; power series below 30, asymptotic above."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    lo = xa <= _I_SWITCH
    if np.any(lo):
        out[lo] = _bessel_series(nu, xa[lo], 1.0)
    if np.any(~lo):
        xs = xa[~lo]
        mu4 = 4.0 * nu * nu
        s = np.ones_like(xs)
        term = np.ones_like(xs)
        prev = np.full_like(xs, np.inf)
        smallest = np.ones_like(xs)
        live = np.ones(xs.shape, dtype=bool)
        for k in range(1, 200):
            term = -term * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * xs)
            live &= (np.abs(term) < np.abs(prev)) & (np.abs(prev) > 1e-17)
            if not live.any():
                break
            s = np.where(live, s + term, s)
            smallest = np.where(live, np.minimum(smallest, np.abs(term)), smallest)
            prev = term
        smallest = np.where(term == 0, 0.0, smallest)
        vals = np.exp(xs) / np.sqrt(2.0 * math.pi * xs) * s
        bad = smallest > _ASYMPTOTIC_OK
        if np.any(bad):
            vals[bad] = scipy.special.iv(nu, xs[bad])
        out[~lo] = vals
    return out if np.ndim(x) else float(out[0])


# Script kernels. k is a float weight; s is the real spectral parameter.

def _sgn(n: int) -> int:
    return (n > 0) - (n < 0)


def script_M_generic(n: int, k: float, y: float, s: float) -> float:
    if y <= 0:
        raise NonPositiveArgument("y must be positive")
    if n == 0:
        return y ** (s - k / 2)
    t = 4 * math.pi * abs(n) * y
    return rgamma(2 * s) * t ** (-k / 2) * whittaker_M(k / 2 * _sgn(n), s - 0.5, t)


def script_W_generic(n: int, k: float, y: float, s: float) -> float:
    if y <= 0:
        raise NonPositiveArgument("y must be positive")
    if n == 0:
        r = rgamma(s - k / 2) * rgamma(s + k / 2)
        return (4 * math.pi) ** (1 - k) * y ** (1 - s - k / 2) * r / (2 * s - 1)
    mu = k / 2 * _sgn(n)
    pre = rgamma(s + mu)
    if pre == 0.0:
        return 0.0
    t = 4 * math.pi * abs(n) * y
    w = whittaker_W(mu, s - 0.5, t)
    return pre * abs(n) ** (k / 2 - 1) * (4 * math.pi * y) ** (-k / 2) * w


def unit_turn(t: float) -> complex:
    """exp(2 pi i t), exact when 4t is an integer."""
    if _is_int(4 * t):
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(4 * t) % 4]
    return cmath.exp(2j * math.pi * t)


def minus_one_power(k: float) -> complex:
    """(-1)^k on the principal branch, exp(i pi k)."""
    return unit_turn(k / 2)


def script_M(n: int, k: float, y: float, s: float) -> complex:
    """The weight-k seed M_{n,k}(y, s), with closed forms at s = k/2, 1 - k/2."""
    if y <= 0:
        raise NonPositiveArgument("y must be positive")
    if n != 0 and s == k / 2:
        return complex(rgamma(k) * math.exp(-2 * math.pi * n * y))
    if n != 0 and s == 1 - k / 2 and k <= 0.5:
        e = math.exp(-2 * math.pi * n * y)
        g = inc_gamma_cplx(1 - k, -4 * math.pi * n * y) * rgamma(1 - k)
        if n > 0:
            return minus_one_power(k) * (g - 1) * e
        return (1 - g) * e
    return complex(script_M_generic(n, k, y, s))


def script_W(n: int, k: float, y: float, s: float) -> complex:
    """The weight-k kernel W_{n,k}(y, s), with closed forms at s = k/2, 1 - k/2."""
    if y <= 0:
        raise NonPositiveArgument("y must be positive")
    if s == 1 - k / 2:
        e = math.exp(-2 * math.pi * n * y)
        if n > 0:
            return complex(n ** (k - 1) * e)
        if n < 0:
            return abs(n) ** (k - 1) * rgamma(1 - k) * inc_gamma_cplx(1 - k, -4 * math.pi * n * y) * e
        return complex((4 * math.pi) ** (1 - k) * rgamma(2 - k))
    if s == k / 2:
        if n > 0:
            return complex(rgamma(k) * n ** (k - 1) * math.exp(-2 * math.pi * n * y))
        return 0j
    return complex(script_W_generic(n, k, y, s))


def inc_gamma_cplx(a: float, x: float) -> complex:
    """Gamma(a, x) for any nonzero real x (principal branch for x < 0)."""
    if x > 0:
        return complex(inc_gamma_upper(a, x))
    return inc_gamma_upper_negx(a, x)
