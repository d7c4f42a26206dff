"""Real-argument special functions used by the closed-form CGPPF evaluations.

Everything here works in double precision on real arguments. The Gauss
hypergeometric function is written for the large negative arguments that the
radial integrals produce (``z = -R**alpha / eps`` with ``R`` in the hundreds),
including the logarithmic cases where ``c - a - b`` is an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import digamma, zeta

from .errors import DomainError, InvalidArgumentError, PoleError

__all__ = [
    "SpecFunResult",
    "ln_gamma",
    "upper_incomplete_gamma",
    "sine_integral",
    "cosine_integral",
    "sici",
    "gauss_2f1",
]

EULER_GAMMA = 0.57721566490153286061
_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAX_TERMS = 5000
_MACLAURIN_LIMIT = 0.9


@dataclass(frozen=True)
class SpecFunResult:
    """A function value together with an absolute error estimate."""

    value: float
    est_error: float

    def __post_init__(self):
        if not self.est_error >= 0.0:
            raise InvalidArgumentError("est_error must be non-negative")


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _check_finite(**kwargs):
    for name, value in kwargs.items():
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


def _rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def _gamma(x: float) -> float:
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------


def ln_gamma(x: float) -> float:
    """Return ``ln|Gamma(x)|``.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    _check_finite(x=x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"ln_gamma has a pole at {x}")
    return math.lgamma(x)


def _lower_gamma_series(a: float, x: float) -> float:
    """gamma(a, x) = x^a e^-x sum x^n / (a (a+1) ... (a+n)), a > 0."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Continued fraction for Gamma(a, x), any real a, fast for x > a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x)) * h


def _gamma1pm1_over_a(a: float) -> float:
    """(Gamma(1 + a) - 1) / a for |a| <= 0.5, from the Taylor series of ln Gamma(1 + a)."""
    ratio = -EULER_GAMMA
    power = -1.0  # (-1)^k a^(k-1)
    for k in range(2, _MAX_TERMS):
        power *= -a
        inc = zeta(k) * power / k
        ratio += inc
        if abs(inc) < _EPS * abs(ratio):
            break
    L = a * ratio
    return ratio if L == 0.0 else ratio * math.expm1(L) / L


def _upper_gamma_small_a(a: float, x: float) -> float:
    """Gamma(a, x) for |a| <= 0.5 and moderate x without cancellation near a = 0.

    Gamma(a) - x^a / a = (Gamma(1 + a) - 1)/a - (x^a - 1)/a, and the remaining
    terms of the lower series start at n = 1.
    """
    lx = math.log(x)
    head = _gamma1pm1_over_a(a) - (lx if a == 0.0 else math.expm1(a * lx) / a)
    total = 0.0
    term = 1.0
    for n in range(1, _MAX_TERMS):
        term *= -x / n
        inc = term / (a + n)
        total += inc
        if abs(inc) < _EPS * max(abs(total), _EPS):
            break
    return head - math.exp(a * lx) * total


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Upper incomplete gamma ``Gamma(a, x) = int_x^inf t^(a-1) e^-t dt``.

    Valid for every real ``a`` when ``x > 0``. At ``x == 0`` the value is
    ``Gamma(a)`` for ``a > 0``.
    """
    _check_finite(a=a, x=x)
    if x < 0.0:
        raise DomainError("upper_incomplete_gamma requires x >= 0")
    if x == 0.0:
        if a <= 0.0:
            raise DomainError("Gamma(a, 0) diverges for a <= 0")
        return math.gamma(a)
    if x > a + 1.0 and x > 1.5:
        return _upper_gamma_cf(a, x)
    if a > 0.5:
        return math.gamma(a) - _lower_gamma_series(a, x)
    # Shift into |a0| <= 0.5 and recur downwards:
    # Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a.
    k = max(0, math.ceil(-a - 0.5))
    value = _upper_gamma_small_a(a + k, x)
    for j in range(k - 1, -1, -1):
        aj = a + j
        value = (value - math.exp(-x + aj * math.log(x))) / aj
    return value


# ---------------------------------------------------------------------------
# Sine and cosine integrals
# ---------------------------------------------------------------------------


def sici(x: float) -> tuple[float, float]:
    """Return ``(Si(x), Ci(x))`` for ``x > 0``.

    Power series below 2, continued fraction of ``E1(ix)`` above.
    """
    if x <= 0.0:
        raise DomainError("sici requires x > 0")
    if math.isinf(x):
        return math.pi / 2.0, 0.0
    if x < 2.0:
        x2 = x * x
        si = 0.0
        ci = 0.0
        term = x  # x^(2k+1) / (2k+1)!
        k = 0
        while True:
            inc = term / (2 * k + 1)
            si += inc
            term *= -x2 / ((2 * k + 2) * (2 * k + 3))
            k += 1
            if abs(inc) < _EPS * abs(si):
                break
        term = 1.0  # (-1)^k x^(2k) / (2k)!
        k = 1
        while True:
            term *= -x2 / ((2 * k - 1) * (2 * k))
            inc = term / (2 * k)
            ci += inc
            k += 1
            if abs(inc) < _EPS * max(abs(ci), _EPS):
                break
        return si, EULER_GAMMA + math.log(x) + ci
    b = complex(1.0, x)
    c = complex(1.0 / _TINY, 0.0)
    d = 1.0 / b
    h = d
    for i in range(2, _MAX_TERMS):
        an = -float((i - 1) * (i - 1))
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
            break
    h *= complex(math.cos(x), -math.sin(x))
    return math.pi / 2.0 + h.imag, -h.real


def sine_integral(x: float) -> float:
    """``Si(x) = int_0^x sin(u)/u du``; odd in ``x``."""
    if math.isnan(x):
        raise InvalidArgumentError("x must not be NaN")
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -sici(-x)[0]
    return sici(x)[0]


def cosine_integral(x: float) -> float:
    """``Ci(x) = -int_x^inf cos(u)/u du`` for ``x > 0``."""
    if not x > 0.0:
        raise DomainError("cosine_integral requires x > 0")
    return sici(x)[1]


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


def _maclaurin(a, b, c, z):
    term = 1.0
    total = 1.0
    abs_sum = 1.0
    for k in range(_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        abs_sum += abs(term)
        if term == 0.0 or (abs(term) < _EPS * abs(total) and k > 2):
            break
    else:
        raise DomainError("hypergeometric series did not converge")
    return total, _EPS * abs_sum * 4 + abs(term)


def _terminating(a, b, c, z):
    """Finite sum when a or b is a non-positive integer."""
    n = int(-a) if _is_nonpositive_integer(a) else int(-b)
    term = 1.0
    total = 1.0
    abs_sum = 1.0
    for k in range(n):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        abs_sum += abs(term)
    return total, _EPS * abs_sum * 4


def _near_one(a, b, c, z, omz):
    """F(a, b; c; z) for 1/2 <= z < 1, given omz = 1 - z computed accurately."""
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _terminating(a, b, c, z)
    s = c - a - b
    m = round(s)
    if abs(s - m) <= 1e-13 * max(1.0, abs(s)):
        if m < 0:
            # Euler: F(a,b;c;z) = (1-z)^(c-a-b) F(c-a, c-b; c; z)
            val, err = _near_one(c - a, c - b, c, z, omz)
            f = omz ** s
            return f * val, f * err
        return _near_one_log(a, b, c, m, omz)
    g1 = _gamma(c) * _gamma(s) * _rgamma(c - a) * _rgamma(c - b)
    g2 = _gamma(c) * _gamma(-s) * _rgamma(a) * _rgamma(b)
    v1, e1 = (_maclaurin(a, b, 1.0 - s, omz) if g1 != 0.0 else (0.0, 0.0))
    v2, e2 = (_maclaurin(c - a, c - b, 1.0 + s, omz) if g2 != 0.0 else (0.0, 0.0))
    f2 = omz ** s
    value = g1 * v1 + g2 * f2 * v2
    err = abs(g1) * e1 + abs(g2 * f2) * e2 + _EPS * 8 * (abs(g1 * v1) + abs(g2 * f2 * v2))
    return value, err


def _near_one_log(a, b, c, m, omz):
    """Logarithmic case c = a + b + m with integer m >= 0."""
    zm1 = -omz
    finite = 0.0
    if m > 0:
        term = 1.0
        for k in range(m):
            if k > 0:
                term *= (a + k - 1) * (b + k - 1) / k * zm1
            finite += term * math.factorial(m - k - 1)
        finite *= _rgamma(a + m) * _rgamma(b + m)
    log_omz = math.log(omz)
    total = 0.0
    abs_sum = 0.0
    coef = 1.0 / math.factorial(m)  # (a+m)_k (b+m)_k / (k! (k+m)!) (1-z)^k
    for k in range(_MAX_TERMS):
        if k > 0:
            coef *= (a + m + k - 1) * (b + m + k - 1) / (k * (k + m)) * omz
        bracket = (
            log_omz
            - digamma(k + 1.0)
            - digamma(k + m + 1.0)
            + digamma(a + k + m)
            + digamma(b + k + m)
        )
        inc = coef * bracket
        total += inc
        abs_sum += abs(inc)
        if k > 2 and abs(inc) < _EPS * abs(total):
            break
    pref = zm1 ** m * _rgamma(a) * _rgamma(b)
    reg = finite - pref * total
    gc = _gamma(c)
    value = gc * reg
    err = abs(gc) * (_EPS * 16 * (abs(finite) + abs(pref) * abs_sum))
    return value, err


def _hyp2f1(a, b, c, z):
    if z == 0.0:
        return 1.0, 0.0
    if b == c or a == c:
        # binomial case: F(a, b; b; z) = (1-z)^-a
        value = math.exp(-(a if b == c else b) * math.log1p(-z))
        return value, _EPS * 4 * value
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _terminating(a, b, c, z)
    if abs(z) <= 0.5 or 0.0 < z <= _MACLAURIN_LIMIT:
        return _maclaurin(a, b, c, z)
    if z > 0.0:
        return _near_one(a, b, c, z, 1.0 - z)
    # z < -1/2: Pfaff maps z to w = z/(z-1) in (1/3, 1),
    # F(a,b;c;z) = (1-z)^-a F(a, c-b; c; w).
    omz = 1.0 - z
    w = z / (z - 1.0)
    if _is_nonpositive_integer(c - a) and not _is_nonpositive_integer(c - b):
        a, b = b, a
    elif not _is_nonpositive_integer(c - b) and abs(b) < abs(a):
        a, b = b, a
    pref = math.exp(-a * math.log(omz))
    if w <= _MACLAURIN_LIMIT:
        val, err = _maclaurin(a, c - b, c, w)
    else:
        val, err = _near_one(a, c - b, c, w, 1.0 / omz)
    return pref * val, pref * err


def gauss_2f1(a: float, b: float, c: float, z: float, return_error: bool = False):
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real ``z < 1``.

    Parameters
    ----------
    a, b, c : float
        Parameters; ``c`` must not be a non-positive integer.
    z : float
        Argument, ``z < 1``. Large negative values are handled through the
        Pfaff transformation followed by the ``1 - z`` connection formula.
    return_error : bool
        If true, return a :class:`SpecFunResult` instead of a float.

    Raises
    ------
    PoleError
        If ``c`` is a non-positive integer.
    DomainError
        If ``z >= 1``.
    """
    _check_finite(a=a, b=b, c=c, z=z)
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 has a pole at c = {c}")
    if z >= 1.0:
        raise DomainError("gauss_2f1 requires z < 1")
    try:
        value, err = _hyp2f1(float(a), float(b), float(c), float(z))
    except (OverflowError, ZeroDivisionError) as exc:
        raise DomainError(f"2F1({a}, {b}; {c}; {z}) is not representable") from exc
    if not math.isfinite(value):
        raise DomainError(f"2F1({a}, {b}; {c}; {z}) overflowed")
    if return_error:
        return SpecFunResult(value, abs(err))
    return value
