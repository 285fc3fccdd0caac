"""Model spectral curve ``mu^2 = (l - l1)^2 (l - l3)^2 (l - l5) / 900``.

The simple branch point ``l5`` solves ``l5^3 - 24 t l5 + 48 x = 0`` and the
double points are ``l1,3 = (-l5 +- i sqrt5 sqrt(l5^2 - 48 t)) / 4``. The
phase ``F(l) = int_{l5}^{l} mu`` decides where exponentially small
corrections decay, which gives the regular sectors of the tritronquee
solutions and the rate of the quasi-linear Stokes differences.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, asdict
from enum import Enum

import mpmath
import numpy as np

from .series import BranchedPoint

THETA = math.atan(1 / math.sqrt(5))
ALPHA0 = 3 * math.pi / 7 - 3 * THETA / 7
BETA0 = 3 * THETA / 7
H_ABS = 5 ** 0.25 * 3 ** (5 / 12) * 2 ** (11 / 12)
A_ABS = 15 ** 0.125 / (32 ** 0.125 * math.sqrt(math.pi))
DEGENERACY_TOL = 1e-8
CONTINUATION_STEPS = 64


def h_const(sigma: int) -> complex:
    """``h_sigma`` for ``sigma = +1`` or ``-1``."""
    return H_ABS * cmath.exp(sigma * 0.5j * THETA)


def A_const(sigma: int) -> complex:
    return A_ABS * cmath.exp(sigma * (0.25j * math.pi - 0.25j * THETA))


class DegenerateCurve(ValueError):
    """Triple or quadruple branch point: ``(l5^2 - 8t)(l5^2 - 48t) = 0``."""


class NotExponentiallySmall(ValueError):
    pass


class Membership(str, Enum):
    inside = "inside"
    boundary = "boundary"
    outside = "outside"


@dataclass
class ModelCurvePoint:
    x: BranchedPoint
    t: complex
    lambda5: complex
    lambda1: complex
    lambda3: complex
    F1: complex
    F3: complex
    Fpp1: complex
    Fpp3: complex
    Fm1: complex
    Fm2: complex
    # branches of (l - l5)^{1/2} at l1, l3 used for F1, F3, Fpp1, Fpp3
    sqrt1: complex = 0j
    sqrt3: complex = 0j

    def to_json(self) -> str:
        out = {"x": {"modulus": self.x.modulus, "argument": self.x.argument}}
        for k, v in asdict(self).items():
            if k == "x":
                continue
            v = complex(v)
            out[k] = [v.real, v.imag]
        return json.dumps(out, indent=2)


def _nearest(roots, target):
    return roots[int(np.argmin(np.abs(np.asarray(roots) - target)))]


def _cubic_roots(t: complex, x: complex) -> np.ndarray:
    return np.roots([1.0, 0.0, -24.0 * t, 48.0 * x])


def _polish(l5: complex, t: complex, x: complex) -> complex:
    for _ in range(3):
        f = l5 ** 3 - 24 * t * l5 + 48 * x
        df = 3 * l5 ** 2 - 24 * t
        if df == 0:
            break
        l5 -= f / df
    return l5


def _principal_sqrt(z: complex) -> complex:
    return cmath.sqrt(z)


def _F_from_sqrt(s: complex, l5: complex, t: complex) -> complex:
    d = s * s
    return s * d * (d * d / 105 + l5 * d / 30 + (l5 * l5 / 24 - t / 3))


def branch_points(x: BranchedPoint, t: complex, continuity_hint: complex | None = None,
                  check_degenerate: bool = True) -> ModelCurvePoint:
    """Branch points and phase data of the model curve at ``(x, t)``.

    ``l5`` starts from ``-2 6^{1/3} x^{1/3}`` at t=0 and is followed along
    the straight segment ``s t``, ``0 <= s <= 1``. ``continuity_hint``
    replaces that tracking by choosing the root nearest the hint.

    The square roots ``(l1,3 - l5)^{1/2}`` start on the principal branch at
    t=0 (cut of ``F`` along ``(-inf, l5)``) and are followed along the same
    segment.
    """
    t = complex(t)
    xv = x.value
    l5 = -2 * 6 ** (1 / 3) * x.cube_root()
    w = l5  # sqrt(l5^2 - 48 t), equal to l5 at t = 0
    c = 1j * math.sqrt(5)
    l1 = 0.25 * (-l5 + c * w)
    l3 = 0.25 * (-l5 - c * w)
    s1 = _principal_sqrt(l1 - l5)
    s3 = _principal_sqrt(l3 - l5)
    if continuity_hint is not None:
        l5 = _polish(_nearest(_cubic_roots(t, xv), complex(continuity_hint)), t, xv)
        w = cmath.sqrt(l5 * l5 - 48 * t)
        l1 = 0.25 * (-l5 + c * w)
        l3 = 0.25 * (-l5 - c * w)
        s1 = _principal_sqrt(l1 - l5)
        s3 = _principal_sqrt(l3 - l5)
    elif t != 0:
        for k in range(1, CONTINUATION_STEPS + 1):
            ts = t * k / CONTINUATION_STEPS
            l5 = _polish(_nearest(_cubic_roots(ts, xv), l5), ts, xv)
            wn = cmath.sqrt(l5 * l5 - 48 * ts)
            w = wn if abs(wn - w) <= abs(wn + w) else -wn
            l1 = 0.25 * (-l5 + c * w)
            l3 = 0.25 * (-l5 - c * w)
            n1 = cmath.sqrt(l1 - l5)
            s1 = n1 if abs(n1 - s1) <= abs(n1 + s1) else -n1
            n3 = cmath.sqrt(l3 - l5)
            s3 = n3 if abs(n3 - s3) <= abs(n3 + s3) else -n3
    if check_degenerate:
        scale = abs(l5) ** 2
        if abs(l5 * l5 - 8 * t) < DEGENERACY_TOL * scale or abs(l5 * l5 - 48 * t) < DEGENERACY_TOL * scale:
            raise DegenerateCurve(
                f"degenerate curve at x={xv:.6g}, t={t:.6g}: multiple branch point")
    F1 = _F_from_sqrt(s1, l5, t)
    F3 = _F_from_sqrt(s3, l5, t)
    Fpp1 = (l1 - l3) * s1 / 30
    Fpp3 = (l3 - l1) * s3 / 30
    Fm1 = l5 * (t * l5 - 6 * xv) / 16
    Fm2 = l5 * l5 * (2 * t * l5 - 9 * xv) / 40
    return ModelCurvePoint(x, t, l5, l1, l3, F1, F3, Fpp1, Fpp3, Fm1, Fm2, s1, s3)


def phase(point: ModelCurvePoint, lam: complex) -> complex:
    """``F(lam)`` with ``(lam - l5)^{1/2}`` cut along ``(-inf, l5)``.

    At ``lam = l1`` or ``l3`` the branch carried by ``point`` is used
    instead, so the result agrees with ``point.F1`` / ``point.F3``.
    """
    lam = complex(lam)
    if lam == point.lambda1:
        return point.F1
    if lam == point.lambda3:
        return point.F3
    return _F_from_sqrt(cmath.sqrt(lam - point.lambda5), point.lambda5, point.t)


def phase_second_derivative(point: ModelCurvePoint, which: int) -> complex:
    """``F''`` at ``l1`` (``which=1``) or ``l3`` (``which=3``)."""
    if which == 1:
        return point.Fpp1
    if which == 3:
        return point.Fpp3
    raise ValueError("which must be 1 or 3")


def fpp_inv_sqrt(point: ModelCurvePoint, which: int) -> complex:
    """``F''(l)^{-1/2}`` on the branch equal to ``+-2i sqrt(pi) A_-+ x^{-1/4}``
    at t=0 (upper sign for ``l1``), followed continuously in t."""
    sigma = -1 if which == 1 else 1
    sign = 1 if which == 1 else -1
    ref = sign * 2j * math.sqrt(math.pi) * A_const(sigma) * x_power(point.x, -0.25)
    if point.t != 0:
        p0 = branch_points(point.x, 0.0, check_degenerate=False)
        v = 1 / cmath.sqrt(phase_second_derivative(p0, which))
        v = v if abs(v - ref) <= abs(v + ref) else -v
        for k in range(1, CONTINUATION_STEPS + 1):
            pk = branch_points(point.x, point.t * k / CONTINUATION_STEPS, check_degenerate=False)
            n = 1 / cmath.sqrt(phase_second_derivative(pk, which))
            v = n if abs(n - v) <= abs(n + v) else -n
        return v
    v = 1 / cmath.sqrt(phase_second_derivative(point, which))
    return v if abs(v - ref) <= abs(v + ref) else -v


def x_power(x: BranchedPoint, p: float) -> complex:
    return x.power(p)


def phase_t0_formula(x: BranchedPoint, which: int) -> complex:
    """``(1/2) h_-+ (6/7) x^{7/6}``, the t=0 value of ``F(l1)`` / ``F(l3)``
    continued along the unwrapped argument of ``x``."""
    sigma = -1 if which == 1 else 1
    return 0.5 * h_const(sigma) * (6 / 7) * x.power(7 / 6)


def phase_expansion(x: BranchedPoint, t: complex, which: int) -> complex:
    """Two-term expansion of ``F(l1,3)`` for ``t x^{-2/3} -> 0``."""
    sign = 1 if which == 1 else -1
    corr = sign * 1j * (15 / 2) ** 0.25 * cmath.exp(-sign * 1.5j * THETA) * t * x.power(0.5)
    return phase_t0_formula(x, which) + corr


def rho0(t: complex, rho: float = 1.0) -> float:
    return rho * (1 + abs(t) ** 1.5)


# --- sectors -------------------------------------------------------------

FAMILIES = ("typeI", "typeII")


def sector_bounds_t0(family: str, m: int = 0) -> list[tuple[float, float]]:
    """Angular windows at t=0 for the family and index ``m``."""
    shift = 6 * math.pi * m / 7
    if family == "typeII":
        return [
            (-(3 * math.pi / 7 + BETA0) + shift, 3 * math.pi / 7 + BETA0 + shift),
            (3 * math.pi - BETA0 + shift, 3 * math.pi + BETA0 + shift),
        ]
    if family == "typeI":
        half = 6 * math.pi / 7 - BETA0
        return [(3 * math.pi - half + shift, 3 * math.pi + half + shift)]
    raise ValueError(f"unknown family {family!r}")


def _to_frame0(m: int, x: BranchedPoint, t: complex) -> tuple[BranchedPoint, complex]:
    x0 = BranchedPoint(x.modulus, x.argument - 6 * math.pi * m / 7)
    t0 = complex(t) * cmath.exp(-18j * math.pi * m / 7)
    return x0, t0


def sector_membership(family: str, m: int, x: BranchedPoint, t: complex,
                      rho: float = 1.0, tol: float = 1e-12) -> tuple[Membership, float]:
    """Classify ``x`` against the regular sector of the family at ``t``.

    The test uses the signs of ``Re F(l1)`` and ``Re F(l3)``:

    * typeII, around ``arg x = 6 pi m / 7``: both ``>= 0``;
    * typeII, around ``arg x = 3 pi + 6 pi m / 7``: both ``<= 0``;
    * typeI, around ``arg x = 3 pi + 6 pi m / 7``: ``Re F(l1) <= 0`` on the
      left half of the window and ``Re F(l3) <= 0`` on the right half.

    At t=0 the typeII test reproduces the narrower windows ``[-a0, a0]``
    and ``[3 pi - b0, 3 pi + b0]``; :func:`sector_bounds_t0` gives the
    full regular sectors.

    Returns the membership and the margin ``min |Re F(l1,3)|``. Points with
    ``|x| <= rho0(t)`` are reported outside.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    x0, t0 = _to_frame0(m, x, t)
    p = branch_points(x0, t0)
    r1, r3 = p.F1.real, p.F3.real
    margin = min(abs(r1), abs(r3))
    if x.modulus <= rho0(t, rho):
        return Membership.outside, margin
    a = x0.argument
    scale = max(1.0, abs(p.F1))
    if family == "typeII":
        if abs(a) < 6 * math.pi / 7:
            signs = (r1, r3)
        elif abs(a - 3 * math.pi) < 3 * THETA:
            # beyond 3 pi +- 3 theta the cut of F is crossed
            signs = (-r1, -r3)
        else:
            return Membership.outside, margin
    else:
        if abs(a - 3 * math.pi) >= math.pi:
            return Membership.outside, margin
        signs = _typeI_signs(x0, r1, r3)
    if min(signs) > tol * scale:
        return Membership.inside, margin
    if min(signs) >= -tol * scale:
        return Membership.boundary, margin
    return Membership.outside, margin


def _typeI_signs(x0: BranchedPoint, r1: float, r3: float) -> tuple[float, float]:
    # Left of arg x = 3 pi the window closes where Re F(l1) changes sign,
    # right of it where Re F(l3) does (cut of F along (-inf, l5)).
    if x0.argument <= 3 * math.pi:
        return (-r1, -r1)
    return (-r3, -r3)


def stokes_prediction(t: complex, arg_x: float, modulus: float = 1.0) -> "StokesPrediction":
    """Decay rate and period, in ``|x|^{7/6}``, of ``e^{2 F(l1,3)}``.

    The rate is ``-2 Re F / |x|^{7/6}`` and the period
    ``2 pi |x|^{7/6} / (2 |Im F|)``; at t=0 both are independent of
    ``modulus``. When both double points decay the slower one is
    reported.
    """
    x = BranchedPoint(modulus, arg_x)
    p = branch_points(x, t)
    scale = modulus ** (7 / 6)
    rates = [-2 * p.F1.real / scale, -2 * p.F3.real / scale]
    if max(rates) <= 0:
        raise NotExponentiallySmall(f"Re F >= 0 at arg x = {arg_x}")
    decaying = [k for k, r in enumerate(rates) if r > 0]
    k = min(decaying, key=lambda j: rates[j])
    F = (p.F1, p.F3)[k]
    period = 2 * math.pi * scale / (2 * abs(F.imag)) if F.imag != 0 else math.inf
    pref = tuple(fpp_inv_sqrt(p, w) / (2 * math.sqrt(math.pi)) for w in (1, 3))
    return StokesPrediction(rates[k], period, pref, -0.25, tuple(rates))


@dataclass
class StokesPrediction:
    rate: float
    period: float
    amplitude_prefactor: tuple
    power: float
    rates: tuple = ()


# --- large-N coefficients ----------------------------------------------------

def coefficient_asymptotics(N: int, t: complex = 0.0, dps: int = 30) -> tuple[float, float]:
    """Closed-form large-N approximation of ``a_N(t)`` in log-polar form.

    Returns ``(log|a_N|, arg a_N)``; ``log|a_N| = -inf`` when the
    seven-term sum vanishes exactly, which happens at t=0 for N not
    divisible by 7.
    """
    if N < 15:
        raise ValueError("N must be at least 15")
    with mpmath.workdps(dps):
        N_ = mpmath.mpf(N)
        th = mpmath.atan(1 / mpmath.sqrt(5))
        logpre = (-mpmath.log(2 * mpmath.sqrt(7 * mpmath.pi))
                  + (2 * N_ / 7 - 1) * mpmath.log(N_ - mpmath.mpf(11) / 4)
                  - (2 * N_ / 7 - mpmath.mpf(11) / 14)
                  + (-N_ / 7 + mpmath.mpf(1) / 4)
                  * mpmath.log(mpmath.sqrt(5) * mpmath.power(3, mpmath.mpf(17) / 6)
                               * mpmath.power(2, mpmath.mpf(11) / 6)))
        tt = mpmath.mpc(complex(t))
        A_abs = mpmath.root(15, 8) / (mpmath.root(32, 8) * mpmath.sqrt(mpmath.pi))
        total = mpmath.mpc(0)
        for sigma in (1, -1):
            A = A_abs * mpmath.exp(-sigma * (1j * mpmath.pi / 4 - 1j * th / 4))
            if tt == 0:
                # sum_m e^{2 pi i N m / 7} is 7 or 0 exactly
                inner = mpmath.mpf(7) if N % 7 == 0 else mpmath.mpf(0)
            else:
                bmag = (mpmath.root(5, 7) * mpmath.power(3, -mpmath.mpf(5) / 14)
                        * mpmath.power(2, mpmath.mpf(5) / 14))
                inner = mpmath.fsum(
                    mpmath.exp(2j * mpmath.pi * N_ * m / 7
                               - 1j * tt * mpmath.power(N_, mpmath.mpf(3) / 7) * sigma * bmag
                               * mpmath.exp(-sigma * 1j * mpmath.mpf(9) / 7 * th)
                               * mpmath.exp(-18j * mpmath.pi * m / 7))
                    for m in range(7))
            total += A * mpmath.exp(sigma * 1j * (N_ / 7 - mpmath.mpf(1) / 4) * th) * inner
        if total == 0:
            return -math.inf, 0.0
        return float(logpre + mpmath.log(abs(total))), float(mpmath.arg(total))
