"""Formal large-x expansions of the tritronquee solutions.

The formal solution of

    u'''' + 10 u'^2 + 20 u u'' + 40 (u^3 - 6 t u + 6 x) = 0

is sought as ``u = sum_n a_n x^{-(n-1)/3}`` with ``a_0 = -6^{1/3}``. The
branch of ``x^{1/3}`` is carried explicitly through :class:`BranchedPoint`,
whose argument is never reduced modulo ``2 pi``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

A0 = -(6.0 ** (1.0 / 3.0))
HARD_CAP = 400
# Terms are compared over a window of this many consecutive indices. At t=0
# only every seventh coefficient is nonzero, and for t != 0 isolated
# coefficients can be tiny through cancellation, so a single small term is
# not evidence that the tail is small.
ENVELOPE_WINDOW = 8


class CoefficientOverflow(OverflowError):
    """Raised when a coefficient leaves the double precision range."""

    def __init__(self, index: int):
        super().__init__(f"coefficient a_{index} overflows double precision")
        self.index = index


class ThresholdUnreachable(ValueError):
    """Raised when the smallest term of the series exceeds the threshold."""

    def __init__(self, minimum: float, index: int, threshold: float):
        super().__init__(
            f"threshold unreachable: minimal term {minimum:.3e} at n={index} "
            f"exceeds {threshold:.3e}"
        )
        self.minimum = minimum
        self.index = index
        self.threshold = threshold


@dataclass(frozen=True)
class BranchedPoint:
    """A point of the x-plane together with an unwrapped argument.

    Two points with the same complex value but arguments differing by a
    multiple of ``2 pi`` are different points on the Riemann surface of
    ``x^{1/3}``.
    """

    modulus: float
    argument: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise ValueError("BranchedPoint needs a positive modulus")

    @property
    def value(self) -> complex:
        return self.modulus * complex(math.cos(self.argument), math.sin(self.argument))

    @property
    def log(self) -> complex:
        return complex(math.log(self.modulus), self.argument)

    def power(self, p: float) -> complex:
        """``x^p`` on the branch fixed by ``argument``."""
        return complex(np.exp(p * self.log))

    def cube_root(self) -> complex:
        return self.power(1.0 / 3.0)

    @classmethod
    def from_complex(cls, z: complex, near: float = 0.0) -> "BranchedPoint":
        """Encode ``z`` choosing the argument closest to ``near``."""
        z = complex(z)
        a = math.atan2(z.imag, z.real)
        a += 2 * math.pi * round((near - a) / (2 * math.pi))
        return cls(abs(z), a)


@dataclass
class SeriesExpansion:
    """Truncated formal solution ``sum_{n<=M} a_n x^{-(n-1)/3}``."""

    t: complex
    coefficients: np.ndarray
    threshold: float | None = None

    @property
    def M(self) -> int:
        return len(self.coefficients) - 1


@dataclass
class TruncationReport:
    M_selected: int
    last_term_size: float
    endpoint: BranchedPoint
    series: SeriesExpansion = field(repr=False)
    hit_cap: bool = False


def _key(t) -> tuple[float, float]:
    t = complex(t)
    return (t.real, t.imag)


@lru_cache(maxsize=64)
def _coefficients_cached(tk: tuple[float, float], M: int) -> np.ndarray:
    t = complex(*tk)
    a = np.zeros(M + 1, dtype=complex)
    a[0] = A0
    # s2[j] = sum_{m=0}^{j} a_m a_{j-m}; turns the triple product into a
    # single dot product per index.
    s2 = np.zeros(M + 1, dtype=complex)
    s2[0] = A0 * A0
    inv = 1.0 / (A0 * A0)
    with np.errstate(over="raise", invalid="raise"):
        for k in range(1, M + 1):
            try:
                s = 2 * t * a[k - 2] if k >= 2 else 0.0
                if k >= 4:
                    s -= A0 * np.dot(a[2:k - 1], a[k - 2:1:-1]) / 3
                if k >= 3:
                    s -= np.dot(a[2:k], s2[k - 2:0:-1]) / 3
                if k >= 7:
                    n = np.arange(0, k - 6)
                    s -= np.sum((n - 1) * (k + n - 4) / 108 * a[n] * a[k - n - 7])
                if k >= 14:
                    s -= (k - 15) * (k - 12) * (k - 9) * (k - 6) / 9720 * a[k - 14]
                a[k] = s * inv
                s2[k] = np.dot(a[: k + 1], a[k::-1])
            except FloatingPointError:
                raise CoefficientOverflow(k) from None
            if not np.isfinite(a[k]) or not np.isfinite(s2[k]):
                raise CoefficientOverflow(k)
    a.setflags(write=False)
    return a


def coefficients(t: complex, M: int) -> np.ndarray:
    """Coefficients ``a_0..a_M`` of the formal solution at parameter ``t``.

    Parameters
    ----------
    t : complex
    M : int
        Highest index, ``M >= 0``.

    Returns
    -------
    ndarray of complex, length ``M + 1``

    Raises
    ------
    CoefficientOverflow
        If a coefficient exceeds the double range; ``index`` gives the
        first offending index. :func:`coefficients_log` has no such limit.
    """
    if M < 0:
        raise ValueError("M must be non-negative")
    return _coefficients_cached(_key(t), int(M)).copy()


def coefficients_mp(t: complex, M: int, dps: int = 30) -> list:
    """Same recurrence in mpmath arithmetic (unbounded exponent range)."""
    with mpmath.workdps(dps):
        t = mpmath.mpc(complex(t))
        a0 = -mpmath.cbrt(6)
        a = [mpmath.mpc(0)] * (M + 1)
        s2 = [mpmath.mpc(0)] * (M + 1)
        a[0] = a0
        s2[0] = a0 * a0
        inv = 1 / (a0 * a0)
        for k in range(1, M + 1):
            s = 2 * t * a[k - 2] if k >= 2 else mpmath.mpc(0)
            s -= a0 * mpmath.fsum(a[m] * a[k - m] for m in range(2, k - 1)) / 3
            s -= mpmath.fsum(a[n] * s2[k - n] for n in range(2, k)) / 3
            s -= mpmath.fsum(
                (n - 1) * (k + n - 4) * a[n] * a[k - n - 7] for n in range(0, k - 6)
            ) / 108
            if k >= 14:
                s -= mpmath.mpf((k - 15) * (k - 12) * (k - 9) * (k - 6)) / 9720 * a[k - 14]
            a[k] = s * inv
            s2[k] = mpmath.fsum(a[m] * a[k - m] for m in range(k + 1))
        return a


def coefficients_log(t: complex, M: int, dps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients as ``(log|a_n|, arg a_n)`` pairs.

    Vanishing coefficients get ``log|a_n| = -inf`` and phase 0.
    """
    a = coefficients_mp(t, M, dps)
    logmag = np.empty(M + 1)
    phase = np.zeros(M + 1)
    for n, c in enumerate(a):
        if c == 0:
            logmag[n] = -np.inf
        else:
            logmag[n] = float(mpmath.log(abs(c)))
            phase[n] = float(mpmath.arg(c))
    return logmag, phase


def coefficients_t0(M: int, dps: int = 30) -> list:
    """Coefficients ``b_n = a_{7n}(0)`` from the reduced t=0 recurrence.

    Returned as mpmath numbers; ``float()`` them for ordinary use.
    """
    with mpmath.workdps(dps):
        b0 = -mpmath.cbrt(6)
        b = [b0, mpmath.mpf(1) / 36][: M + 1]
        for n in range(1, M):
            s = -mpmath.fsum(b[n - m] * b[m + 1] for m in range(n)) / (3 * b0)
            s -= mpmath.fsum(
                b[n - m - l] * b[l + 1] * b[m] for l in range(n) for m in range(n - l + 1)
            ) / (3 * b0 ** 2)
            s -= mpmath.fsum(
                (7 * m - 1) * (7 * n + 7 * m + 3) * b[m] * b[n - m] for m in range(n + 1)
            ) / (108 * b0 ** 2)
            s -= (7 * n - 8) * (7 * n - 5) * (7 * n - 2) * (7 * n + 1) * b[n - 1] / (9720 * b0 ** 2)
            b.append(s)
        return b


# --- exact mode -----------------------------------------------------------
# Elements of Q[t][w]/(w^3 + 6), w = a_0, stored as {(deg_t, deg_w): Fraction}.

def _mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            i, j, c = i1 + i2, j1 + j2, c1 * c2
            if j >= 3:
                j -= 3
                c *= -6
            out[(i, j)] = out.get((i, j), 0) + c
    return {k: v for k, v in out.items() if v != 0}


def _add(p: dict, q: dict, s: int = 1) -> dict:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + s * v
    return {k: v for k, v in out.items() if v != 0}


def _scale(p: dict, c) -> dict:
    return {k: v * c for k, v in p.items() if v * c != 0}


@lru_cache(maxsize=4)
def exact_coefficients(M: int) -> tuple:
    """Coefficients as exact elements of ``Q[t][a_0]`` with ``a_0^3 = -6``."""
    W = {(0, 1): Fraction(1)}
    T = {(1, 0): Fraction(1)}
    inv_w2 = {(0, 1): Fraction(-1, 6)}  # a_0^{-2} = -a_0/6
    a = [W] + [{} for _ in range(M)]
    for k in range(1, M + 1):
        s = _scale(_mul(T, a[k - 2]), 2) if k >= 2 else {}
        acc: dict = {}
        for m in range(2, k - 1):
            acc = _add(acc, _mul(a[m], a[k - m]))
        s = _add(s, _scale(_mul(W, acc), Fraction(1, 3)), -1)
        acc = {}
        for n in range(2, k):
            for m in range(0, k - n + 1):
                acc = _add(acc, _mul(_mul(a[n], a[m]), a[k - n - m]))
        s = _add(s, _scale(acc, Fraction(1, 3)), -1)
        for n in range(0, k - 6):
            s = _add(s, _scale(_mul(a[n], a[k - n - 7]), Fraction((n - 1) * (k + n - 4), 108)), -1)
        if k >= 14:
            s = _add(s, _scale(a[k - 14], Fraction((k - 15) * (k - 12) * (k - 9) * (k - 6), 9720)), -1)
        a[k] = _mul(s, inv_w2)
    return tuple(a)


def exact_cn(n: int) -> dict[int, Fraction]:
    """Polynomial ``c_n(t) = a_{n+1} a_0^n`` as ``{power: coefficient}``.

    Raises ``ValueError`` if the product is not free of ``a_0``.
    """
    a = exact_coefficients(n + 1)
    p = a[n + 1]
    W = {(0, 1): Fraction(1)}
    for _ in range(n):
        p = _mul(p, W)
    if any(j != 0 for (_, j) in p):
        raise ValueError(f"c_{n} is not a polynomial in t alone")
    return {i: c for (i, _), c in sorted(p.items())}


# Reference table of c_n(t), n = 1..14, as {power of t: coefficient}.
CN_TABLE: dict[int, dict[int, Fraction]] = {
    1: {1: Fraction(2)},
    2: {},
    3: {},
    4: {},
    5: {3: Fraction(-8, 3)},
    6: {0: Fraction(1)},
    7: {4: Fraction(16, 3)},
    8: {1: Fraction(-10, 3)},
    9: {},
    10: {2: Fraction(-28, 3)},
    11: {6: Fraction(-256, 9)},
    12: {3: Fraction(96)},
    13: {7: Fraction(640, 9), 0: Fraction(-21)},
    14: {4: Fraction(-1936, 9)},
}


def cn_value(n: int, t: complex) -> complex:
    return complex(sum(float(c) * complex(t) ** p for p, c in CN_TABLE[n].items()))


def cn_table_check(t: complex) -> list[float]:
    """Relative residuals ``|a_{n+1}(t) - c_n(t) a_0^{-n}|`` for n = 1..14.

    Residuals are divided by ``max(1, |c_n(t) a_0^{-n}|)``.
    """
    a = coefficients(t, 15)
    out = []
    for n in range(1, 15):
        target = cn_value(n, t) * A0 ** (-n)
        out.append(abs(a[n + 1] - target) / max(1.0, abs(target)))
    return out


# --- evaluation -----------------------------------------------------------

def _falling(p: np.ndarray, d: int) -> np.ndarray:
    c = np.ones_like(p)
    for j in range(d):
        c = c * (p - j)
    return c


def evaluate(series: SeriesExpansion | Sequence[complex], x: BranchedPoint,
             derivative_order: int = 0) -> complex:
    """Value of the truncated series or of one of its x-derivatives.

    ``d^k/dx^k x^p = p (p-1) ... (p-k+1) x^{p-k}`` is applied termwise with
    the branch of the logarithm fixed by ``x.argument``.
    """
    if not 0 <= derivative_order <= 4:
        raise ValueError("derivative_order must be in 0..4")
    a = series.coefficients if isinstance(series, SeriesExpansion) else np.asarray(series)
    n = np.arange(len(a))
    p = -(n - 1) / 3.0
    return complex(np.sum(a * _falling(p, derivative_order)
                          * np.exp((p - derivative_order) * x.log)))


def term_sizes(a: np.ndarray, x: BranchedPoint) -> np.ndarray:
    n = np.arange(len(a))
    return np.abs(a) * np.exp(-(n - 1) / 3.0 * math.log(x.modulus))


def _available(t: complex, cap: int) -> np.ndarray:
    try:
        return coefficients(t, cap + ENVELOPE_WINDOW)
    except CoefficientOverflow as err:
        return coefficients(t, err.index - 1)


def auto_truncate(t: complex, x: BranchedPoint, threshold: float = 1e-6,
                  cap: int = HARD_CAP, strict: bool = True) -> TruncationReport:
    """Choose the truncation index for the series at ``x``.

    The envelope ``e_n = max(|term_n|, ..., |term_{n+7}|)`` is scanned and
    ``M`` is the first ``n`` with ``e_n < threshold``. If the envelope turns
    upward first (divergence), the series is cut at its minimum instead:
    with ``strict`` this raises :class:`ThresholdUnreachable`, otherwise the
    optimally truncated series is returned.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    a = _available(t, cap)
    sizes = term_sizes(a, x)
    nmax = min(cap, len(a) - 1)
    env = np.array([sizes[n:n + ENVELOPE_WINDOW].max() for n in range(nmax + 1)])
    below = np.nonzero(env < threshold)[0]
    nmin = int(np.argmin(env))
    if below.size:
        M = int(below[0])
    else:
        if strict and nmin < nmax:
            raise ThresholdUnreachable(float(env[nmin]), nmin, threshold)
        M = nmin
    hit_cap = M == nmax and env[M] >= threshold
    s = SeriesExpansion(complex(t), a[: M + 1].copy(), threshold)
    return TruncationReport(M, float(env[M]), x, s, hit_cap)


def write_coefficients_csv(path, a: Sequence[complex]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re_a", "im_a", "log10_abs_a"])
        for n, c in enumerate(a):
            c = complex(c)
            lg = math.log10(abs(c)) if c != 0 else float("-inf")
            w.writerow([n, repr(c.real), repr(c.imag), repr(lg)])
