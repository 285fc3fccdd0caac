"""Boundary value problems for the fourth order ODE along complex lines.

On the line ``x = e^{i phi} xi + b`` the equation reads

    e^{-4i phi} u'''' + 10 e^{-2i phi} u'^2 + 20 e^{-2i phi} u u''
        + 40 (u^3 - 6 t u + 6 x) = 0,      ' = d/dxi,

with the value and first derivative of the truncated large-x series imposed
at both ends.

Two discretizations are available.

``collocation``
    Node values of ``u`` with Chebyshev differentiation matrices; the ODE is
    collocated at the interior nodes and the rows ``0, 1, Nc-1, Nc`` carry
    the boundary conditions.
``integral`` (default)
    Unknowns are ``v = u''''`` at the nodes plus the Taylor data of ``u`` at
    the left end, ``u = I4 v + c0 + c1 s + c2 s^2/2 + c3 s^3/6``. The
    integration matrices are well conditioned, so the residual can be driven
    far below what fourth-order differentiation matrices allow. The residual
    is evaluated in extended precision while the Jacobian stays in double
    (iterative refinement inside Newton).
"""
from __future__ import annotations

import cmath
import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field, asdict, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from . import series as ser
from .spectral import (ChebGrid, build_diff_ops, build_grid, build_integration_ops,
                       interpolate)

log = logging.getLogger(__name__)

A0_ABS = 6.0 ** (1.0 / 3.0)
EXT = np.longdouble
EXTC = np.clongdouble


class SolverError(RuntimeError):
    pass


class NoConvergence(SolverError):
    def __init__(self, msg, history=None, solution=None):
        super().__init__(msg)
        self.history = history or []
        self.solution = solution


class SingularSolve(SolverError):
    pass


@dataclass
class LineDomain:
    """A segment ``xi in [xi_l, xi_r]`` of the line ``x = e^{i phi} xi + b``.

    ``arg_left`` / ``arg_right`` are the unwrapped arguments of ``x`` at the
    two ends, used for the series boundary data. ``left_data`` replaces the
    series on the left by given ``(u, du/dx)``; this is how rays pinned at
    an interior point are posed.
    """

    phi: float = 0.0
    b: complex = 0j
    xi_l: float = -12.0
    xi_r: float = 12.0
    t: complex = 0.0
    Nc: int = 512
    arg_left: float = 3 * math.pi
    arg_right: float = 0.0
    threshold: float = 1e-6
    left_data: tuple | None = None
    allow_origin: bool = False

    def __post_init__(self):
        if not self.xi_l < self.xi_r:
            raise ValueError("invalid interval: need xi_l < xi_r")
        if self.Nc < 8:
            raise ValueError("Nc must be at least 8")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.left_data is None:
            self._check_end(self.xi_l, self.arg_left, "left")
        self._check_end(self.xi_r, self.arg_right, "right")

    def _check_end(self, xi, arg, side):
        z = self.x(xi)
        if abs(z) == 0:
            raise ValueError(f"{side} endpoint is the origin; series undefined")
        d = (cmath.phase(z) - arg) / (2 * math.pi)
        if abs(d - round(d)) > 1e-9:
            raise ValueError(
                f"arg_{side}={arg} inconsistent with the angle {cmath.phase(z)} of x at xi={xi}")

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * self.phi)

    def x(self, xi):
        return self.direction * np.asarray(xi) + self.b

    def endpoint(self, side: str) -> ser.BranchedPoint:
        if side == "left":
            return ser.BranchedPoint(abs(self.x(self.xi_l)), self.arg_left)
        return ser.BranchedPoint(abs(self.x(self.xi_r)), self.arg_right)

    def is_real(self) -> bool:
        """Real t on a line along the real axis."""
        t = complex(self.t)
        s = math.sin(self.phi)
        return t.imag == 0 and abs(s) < 1e-15 and complex(self.b).imag == 0

    def grid(self) -> ChebGrid:
        return build_grid(self.Nc, self.xi_l, self.xi_r, min_nodes=8)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("b", "t"):
            d[k] = [complex(d[k]).real, complex(d[k]).imag]
        if self.left_data is not None:
            d["left_data"] = [[complex(v).real, complex(v).imag] for v in self.left_data]
        return d


@dataclass
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 100
    formulation: str = "integral"
    arithmetic: str = "complex"  # "complex", "real" or "auto"
    initial: str = "smooth"      # "smooth" or "linear"
    extended_precision: bool = True
    step_tol: float = 1e-12
    lambda_min: float = 1e-5
    armijo_alpha: float = 1e-4
    raise_on_failure: bool = True


@dataclass
class BoundaryData:
    S_left: complex
    dS_left: complex     # d/dx
    S_right: complex
    dS_right: complex
    reports: tuple


@dataclass
class LineSolution:
    domain: LineDomain
    u: np.ndarray
    residual_norm: float
    iterations: int
    line_search_failures: int
    boundary_truncation: tuple
    grid: ChebGrid = field(repr=False)
    derivatives: np.ndarray = field(repr=False)
    history: list = field(default_factory=list, repr=False)
    converged: bool = True
    formulation: str = "integral"
    state: np.ndarray | None = field(default=None, repr=False)
    boundary: BoundaryData | None = field(default=None, repr=False)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def x(self) -> np.ndarray:
        return self.domain.x(self.grid.nodes)

    def x_derivative(self, k: int) -> np.ndarray:
        """``d^k u / dx^k`` at the nodes."""
        return self.derivatives[k] * cmath.exp(-1j * k * self.domain.phi)

    def evaluate(self, xi, k: int = 0):
        """Interpolated ``d^k u/dx^k`` at ``xi``."""
        return interpolate(self.grid, self.x_derivative(k), xi)

    def write_csv(self, path) -> None:
        x = self.x
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi", "re_x", "im_x", "re_u", "im_u"])
            for a, b, c in zip(self.xi, x, self.u):
                w.writerow([repr(float(a)), repr(float(b.real)), repr(float(b.imag)),
                            repr(float(c.real)), repr(float(c.imag))])

    def metadata(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "formulation": self.formulation,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "line_search_failures": self.line_search_failures,
            "converged": self.converged,
            "history": [float(h) for h in self.history],
            "truncation": [
                None if r is None else {"M_selected": r.M_selected,
                                        "last_term_size": r.last_term_size,
                                        "modulus": r.endpoint.modulus,
                                        "argument": r.endpoint.argument,
                                        "hit_cap": r.hit_cap}
                for r in self.boundary_truncation
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2)


# --- boundary data -----------------------------------------------------------

def _series_end(t, point: ser.BranchedPoint, threshold: float):
    rep = ser.auto_truncate(t, point, threshold)
    return (ser.evaluate(rep.series, point, 0), ser.evaluate(rep.series, point, 1), rep)


def boundary_data(domain: LineDomain) -> BoundaryData:
    """Series value and x-derivative at both ends.

    Raises :class:`series.ThresholdUnreachable` when an endpoint is too close
    to the origin for the requested threshold.
    """
    if domain.left_data is not None:
        Sl, dSl = (complex(v) for v in domain.left_data)
        rl = None
    else:
        Sl, dSl, rl = _series_end(domain.t, domain.endpoint("left"), domain.threshold)
    Sr, dSr, rr = _series_end(domain.t, domain.endpoint("right"), domain.threshold)
    return BoundaryData(Sl, dSl, Sr, dSr, (rl, rr))


def _boundary_t_derivative(domain: LineDomain, bd: BoundaryData, eps: float = 1e-6) -> np.ndarray:
    """d/dt of (S_l, dS_l, S_r, dS_r) with the truncation orders frozen."""
    out = []
    for side, rep in (("left", bd.reports[0]), ("right", bd.reports[1])):
        if rep is None:
            out += [0j, 0j]
            continue
        M = rep.M_selected
        p = rep.endpoint
        vals = []
        for dt in (eps, -eps):
            a = ser.coefficients(complex(domain.t) + dt, M)
            vals.append(np.array([ser.evaluate(a, p, 0), ser.evaluate(a, p, 1)]))
        out += list((vals[0] - vals[1]) / (2 * eps))
    return np.array(out)


# --- initial iterates --------------------------------------------------------

def _smooth_iterate(domain: LineDomain, xi: np.ndarray) -> np.ndarray:
    x = domain.x(xi).astype(complex)
    w = 1 + x * x
    if np.any(np.abs(w) < 1e-12):
        raise ValueError("1 + x^2 vanishes on the grid")
    # (1 + x^2)^{-1/3} continuous along the line, then each end is matched to
    # the branch x^{-2/3} fixed by arg_left / arg_right and the mismatch, a
    # cube root of unity, is spread linearly over the segment.
    lg = np.log(np.abs(w)) + 1j * np.unwrap(np.angle(w))
    q = np.exp(-lg / 3)

    def shift(i, arg):
        target = np.exp(-2 / 3 * (math.log(abs(x[i])) + 1j * arg))
        k = round(float(np.angle(target / q[i])) / (2 * math.pi / 3))
        return k * 2 * math.pi / 3

    sr = shift(-1, domain.arg_right)
    sl = shift(0, domain.arg_left) if domain.left_data is None else sr
    s = (xi - xi[0]) / (xi[-1] - xi[0])
    q = q * np.exp(1j * (sl + (sr - sl) * s))
    return -A0_ABS * x * q


def initial_iterate(domain: LineDomain, mode: str = "smooth",
                    bd: BoundaryData | None = None) -> np.ndarray:
    """Starting node values for Newton.

    ``smooth``: ``-6^{1/3} x / (1 + x^2)^{1/3}`` with branches matching the
    end arguments; falls back to ``linear`` (with a warning) when ``1 + x^2``
    vanishes at a node. ``linear``: affine interpolation of the boundary
    series values.
    """
    xi = domain.grid().nodes
    if mode == "smooth":
        try:
            u = _smooth_iterate(domain, xi)
            if domain.left_data is not None:
                bd = bd or boundary_data(domain)
                s = (xi - xi[0]) / (xi[-1] - xi[0])
                u = u + (1 - s) ** 3 * (bd.S_left - u[0])
            return u
        except ValueError:
            warnings.warn("smooth initial iterate unavailable, using linear", RuntimeWarning)
            mode = "linear"
    if mode != "linear":
        raise ValueError(f"unknown initial iterate mode {mode!r}")
    bd = bd or boundary_data(domain)
    s = (xi - xi[0]) / (xi[-1] - xi[0])
    return bd.S_left * (1 - s) + bd.S_right * s


# --- discretizations ---------------------------------------------------------

@lru_cache(maxsize=16)
def _ops(Nc: int, xi_l: float, xi_r: float):
    g = build_grid(Nc, xi_l, xi_r, min_nodes=8)
    return g, build_diff_ops(g)


@lru_cache(maxsize=8)
def _integral_ops(Nc: int, xi_l: float, xi_r: float):
    g = build_grid(Nc, xi_l, xi_r, min_nodes=8)
    I1, I2, I3, I4 = build_integration_ops(g)
    s = g.nodes - xi_l
    one, zero = np.ones_like(s), np.zeros_like(s)
    P = [np.stack([one, s, s ** 2 / 2, s ** 3 / 6], 1),
         np.stack([zero, one, s, s ** 2 / 2], 1),
         np.stack([zero, zero, one, s], 1),
         np.stack([zero, zero, zero, one], 1)]
    A = [np.hstack([I, p]) for I, p in zip((I4, I3, I2, I1), P)]
    for a in A:
        a.setflags(write=False)
    return g, A


class _Problem:
    """Residual/Jacobian pair in the unknowns of one discretization."""

    n: int

    def __init__(self, domain: LineDomain, bd: BoundaryData, real: bool, ext: bool):
        self.domain = domain
        self.bd = bd
        self.real = real
        self.e = cmath.exp(-1j * domain.phi)
        self.t = complex(domain.t)
        dt = float if real else complex
        self.dtype = dt
        self.edtype = (EXT if real else EXTC) if ext else dt
        bvals = np.array([bd.S_left, domain.direction * bd.dS_left,
                          bd.S_right, domain.direction * bd.dS_right])
        if real:
            if np.max(np.abs(bvals.imag)) > 1e-10 * max(1.0, np.max(np.abs(bvals))):
                raise ValueError("real arithmetic requested but boundary data are not real")
            bvals = bvals.real
        self.bvals = bvals.astype(self.edtype)

    def _coef(self, c: complex):
        return c.real if self.real else c


class _Integral(_Problem):
    def __init__(self, domain, bd, real, ext):
        super().__init__(domain, bd, real, ext)
        g, A = _integral_ops(domain.Nc, float(domain.xi_l), float(domain.xi_r))
        self.grid = g
        self.A = A
        self.AE = [a.astype(EXT) for a in A[:3]] if ext else A[:3]
        self.n = g.Nc + 1
        x = domain.x(g.nodes)
        self.x = (x.real if real else x).astype(self.edtype)
        self.xd = x.real if real else x
        e = self.e
        self.e2 = self._coef(e ** 2)
        self.e4 = self._coef(e ** 4)
        self.tt = self._coef(self.t)
        self.ode = slice(0, self.n)

    def from_values(self, u: np.ndarray) -> np.ndarray:
        # least squares against the integral map; differentiating node values
        # four times would amplify rounding by ~Nc^8
        A0 = self.A[0].astype(self.dtype)
        u = u.real if self.real else u.astype(complex)
        z = sla.lstsq(A0, u, lapack_driver="gelsy", check_finite=False)[0]
        return z.astype(self.edtype)

    def residual(self, z):
        n = self.n
        u, u1, u2 = (a @ z for a in self.AE)
        r = np.empty(n + 4, dtype=self.edtype)
        r[:n] = (self.e4 * z[:n] + 10 * self.e2 * u1 * u1 + 20 * self.e2 * u * u2
                 + 40 * (u * u * u - 6 * self.tt * u + 6 * self.x))
        r[n] = z[n] - self.bvals[0]
        r[n + 1] = z[n + 1] - self.bvals[1]
        r[n + 2] = u[-1] - self.bvals[2]
        r[n + 3] = u1[-1] - self.bvals[3]
        return r

    def jacobian(self, z):
        n = self.n
        z = z.astype(self.dtype)
        A0, A1, A2 = self.A[:3]
        u, u1, u2 = A0 @ z, A1 @ z, A2 @ z
        e2 = self.e2
        J = (20 * e2 * u1[:, None] * A1 + 20 * e2 * (u2[:, None] * A0 + u[:, None] * A2)
             + (120 * u * u - 240 * self.tt)[:, None] * A0)
        J[:, :n] += self.e4 * np.eye(n)
        Jb = np.zeros((4, n + 4), dtype=J.dtype)
        Jb[0, n] = 1
        Jb[1, n + 1] = 1
        Jb[2] = A0[-1]
        Jb[3] = A1[-1]
        return np.vstack([J, Jb])

    def dF_dt(self, z, dbd):
        u = (self.A[0] @ z.astype(self.dtype))
        dirn = self.domain.direction
        db = np.array([dbd[0], dirn * dbd[1], dbd[2], dirn * dbd[3]])
        if self.real:
            db = db.real
        return np.concatenate([-240 * u, -db])

    def derivatives(self, z):
        z = z.astype(self.dtype)
        d = [a @ z for a in self.A] + [z[: self.n]]
        return np.array(d, dtype=complex)

    def values(self, z):
        return (self.AE[0] @ z).astype(complex)


class _Collocation(_Problem):
    def __init__(self, domain, bd, real, ext):
        super().__init__(domain, bd, real, False)
        g, ops = _ops(domain.Nc, float(domain.xi_l), float(domain.xi_r))
        self.grid = g
        self.ops = ops
        self.n = g.Nc + 1
        x = domain.x(g.nodes)
        self.x = x.real if real else x
        self.e2 = self._coef(self.e ** 2)
        self.e4 = self._coef(self.e ** 4)
        self.tt = self._coef(self.t)
        self.ode = slice(2, self.n - 2)

    def from_values(self, u):
        return (u.real if self.real else u.astype(complex)).copy()

    def residual(self, u):
        o = self.ops
        u1 = o.D1 @ u
        r = (self.e4 * (o.D4 @ u) + 10 * self.e2 * u1 ** 2 + 20 * self.e2 * u * (o.D2 @ u)
             + 40 * (u ** 3 - 6 * self.tt * u + 6 * self.x))
        r[0] = u[0] - self.bvals[0]
        r[1] = u1[0] - self.bvals[1]
        r[-2] = u1[-1] - self.bvals[3]
        r[-1] = u[-1] - self.bvals[2]
        return r

    def jacobian(self, u):
        o = self.ops
        u1, u2 = o.D1 @ u, o.D2 @ u
        J = (self.e4 * o.D4 + 20 * self.e2 * u1[:, None] * o.D1
             + 20 * self.e2 * (np.diag(u2) + u[:, None] * o.D2) + np.diag(120 * u ** 2 - 240 * self.tt))
        n = self.n
        J[0] = 0
        J[0, 0] = 1
        J[1] = o.D1[0]
        J[-2] = o.D1[-1]
        J[-1] = 0
        J[-1, -1] = 1
        return J

    def dF_dt(self, u, dbd):
        dirn = self.domain.direction
        r = -240 * u.astype(complex)
        r[0], r[1], r[-2], r[-1] = -dbd[0], -dirn * dbd[1], -dirn * dbd[3], -dbd[2]
        return r.real if self.real else r

    def derivatives(self, u):
        o = self.ops
        u = u.astype(complex)
        return np.array([u, o.D1 @ u, o.D2 @ u, o.D3 @ u, o.D4 @ u])

    def values(self, u):
        return u.astype(complex)


def residual(domain: LineDomain, u: np.ndarray) -> np.ndarray:
    """Collocation residual at the nodes.

    Rows ``2..Nc-2`` carry the ODE; rows ``0, 1, Nc-1, Nc`` carry
    ``u - S``, ``u' - e^{i phi} S'`` (left) and ``u' - e^{i phi} S'``,
    ``u - S`` (right), where ``S`` is the truncated series at the endpoint.
    """
    prob = _Collocation(domain, boundary_data(domain), False, False)
    return prob.residual(np.asarray(u, dtype=complex))


def jacobian(domain: LineDomain, u: np.ndarray) -> np.ndarray:
    """Jacobian of :func:`residual` with respect to the node values."""
    prob = _Collocation(domain, boundary_data(domain), False, False)
    return prob.jacobian(np.asarray(u, dtype=complex))


# --- Newton-Armijo -------------------------------------------------------------

def parabolic_step(lc: float, lm: float, ff0: float, ffc: float, ffm: float,
                   sigma0: float = 0.1, sigma1: float = 0.5) -> float:
    """Minimizer of the parabola through ``(0, ff0), (lc, ffc), (lm, ffm)``,
    safeguarded to ``[sigma0 lc, sigma1 lc]`` (Kelley's three-point model)."""
    c2 = lm * (ffc - ff0) - lc * (ffm - ff0)
    if c2 >= 0:
        return sigma1 * lc
    c1 = lc * lc * (ffm - ff0) - lm * lm * (ffc - ff0)
    lp = -c1 * 0.5 / c2
    return min(max(lp, sigma0 * lc), sigma1 * lc)


def _solve_linear(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    # equilibrate columns then rows; the integral unknowns span many scales
    cs = np.abs(J).max(axis=0)
    cs[cs == 0] = 1.0
    Js = J / cs
    rs = np.abs(Js).max(axis=1)
    rs[rs == 0] = 1.0
    Js = Js / rs[:, None]
    lu, piv = sla.lu_factor(Js, check_finite=False)
    d = np.abs(np.diag(lu))
    if not np.all(np.isfinite(d)) or d.min() <= np.finfo(float).tiny * max(1.0, d.max()) * 1e3:
        raise SingularSolve("singular linear solve: LU pivot underflow")
    return sla.lu_solve((lu, piv), r / rs, check_finite=False) / cs


@dataclass
class NewtonResult:
    z: np.ndarray
    history: list
    iterations: int
    failures: int
    converged: bool


def _norm2(r) -> float:
    r = np.asarray(r)
    return float(np.sqrt(np.sum(np.abs(r.astype(complex if np.iscomplexobj(r) else float)) ** 2)))


def newton_armijo_core(F: Callable, J: Callable, z: np.ndarray, ode: slice, tol: float = 1e-8,
                       max_iter: int = 100, step_tol: float = 1e-12, lambda_min: float = 1e-5,
                       alpha: float = 1e-4, callback: Callable | None = None) -> NewtonResult:
    """Damped Newton iteration with Armijo backtracking.

    The step ``lam`` starts at 1 and is reduced (halving first, then the
    three-point parabolic model) until
    ``||F(z - lam dz)|| < (1 - alpha lam) ||F(z)||``. If ``lam`` drops below
    ``lambda_min`` the step ``lambda_min`` is taken anyway and counted as a
    line-search failure. Stops when the ODE rows of ``F`` have sup norm below
    ``tol`` or the step is below ``step_tol``.
    """
    hist = []
    failures = 0
    r = F(z)
    for it in range(max_iter + 1):
        res = float(np.max(np.abs(r[ode])))
        hist.append(res)
        if callback is not None:
            callback(it, res)
        if res < tol:
            return NewtonResult(z, hist, it, failures, True)
        if it == max_iter:
            break
        dz = _solve_linear(J(z), r.astype(np.complex128 if np.iscomplexobj(r) else np.float64))
        dz = dz.astype(z.dtype)
        f0 = _norm2(r)
        lam, lam_m, ff_m = 1.0, 1.0, f0 ** 2
        while True:
            zn = z - lam * dz
            rn = F(zn)
            fn = _norm2(rn)
            if np.isfinite(fn) and fn < (1 - alpha * lam) * f0:
                break
            if lam <= lambda_min:
                failures += 1
                lam = lambda_min
                zn = z - lam * dz
                rn = F(zn)
                break
            ffc = fn ** 2 if np.isfinite(fn) else np.inf
            if lam == 1.0 or not np.isfinite(ffc):
                new = 0.5 * lam
            else:
                new = parabolic_step(lam, lam_m, f0 ** 2, ffc, ff_m)
            lam_m, ff_m = lam, ffc
            lam = max(new, lambda_min)
        step = float(np.max(np.abs((lam * dz).astype(complex))))
        z, r = zn, rn
        if step < step_tol:
            res = float(np.max(np.abs(r[ode])))
            hist.append(res)
            return NewtonResult(z, hist, it + 1, failures, True)
    return NewtonResult(z, hist, max_iter, failures, False)


def _use_real(domain: LineDomain, options: SolverOptions) -> bool:
    if options.arithmetic == "real":
        if not domain.is_real():
            raise ValueError("real arithmetic needs real t and a line along the real axis")
        return True
    if options.arithmetic == "auto":
        return domain.is_real()
    if options.arithmetic != "complex":
        raise ValueError(f"unknown arithmetic {options.arithmetic!r}")
    return False


def _make_problem(domain: LineDomain, options: SolverOptions, bd: BoundaryData | None = None):
    bd = bd or boundary_data(domain)
    real = _use_real(domain, options)
    if options.formulation == "integral":
        return _Integral(domain, bd, real, options.extended_precision)
    if options.formulation == "collocation":
        return _Collocation(domain, bd, real, False)
    raise ValueError(f"unknown formulation {options.formulation!r}")


def newton_armijo(domain: LineDomain, u0: np.ndarray | None = None, tol: float | None = None,
                  max_iter: int | None = None, options: SolverOptions | None = None,
                  state0: np.ndarray | None = None) -> LineSolution:
    """Solve the line problem from node values ``u0`` (or a previous state).

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations, unless ``options.raise_on_failure`` is
        off; the exception carries the residual history and the last iterate.
    SingularSolve
        If the LU factorization breaks down.
    """
    options = options or SolverOptions()
    if tol is not None:
        options = replace(options, tol=tol)
    if max_iter is not None:
        options = replace(options, max_iter=max_iter)
    bd = boundary_data(domain)
    prob = _make_problem(domain, options, bd)
    if state0 is not None:
        z = np.asarray(state0).astype(prob.edtype)
    else:
        if u0 is None:
            u0 = initial_iterate(domain, options.initial, bd)
        z = prob.from_values(np.asarray(u0))
    res = newton_armijo_core(prob.residual, prob.jacobian, z, prob.ode, options.tol,
                             options.max_iter, options.step_tol, options.lambda_min,
                             options.armijo_alpha)
    sol = LineSolution(
        domain=domain, u=prob.values(res.z), residual_norm=res.history[-1],
        iterations=res.iterations, line_search_failures=res.failures,
        boundary_truncation=bd.reports, grid=prob.grid, derivatives=prob.derivatives(res.z),
        history=res.history, converged=res.converged, formulation=options.formulation,
        state=res.z, boundary=bd)
    if not res.converged and options.raise_on_failure:
        raise NoConvergence(
            f"no convergence after {options.max_iter} iterations "
            f"(residual {res.history[-1]:.3e})", res.history, sol)
    return sol


def solve_line(domain: LineDomain, options: SolverOptions | None = None,
               u0: np.ndarray | None = None) -> LineSolution:
    """Truncate the series at both ends, build the operators and iterate."""
    return newton_armijo(domain, u0=u0, options=options)


def continue_in_t(domain: LineDomain, t_values: Sequence[complex],
                  options: SolverOptions | None = None,
                  final_options: SolverOptions | None = None) -> list[LineSolution]:
    """Solve along a sequence of t values, each start predicted from the last.

    The first problem starts from the usual initial iterate. Later ones start
    from the Euler predictor ``z + (t_new - t) dz/dt`` with
    ``dz/dt = -J^{-1} dF/dt`` evaluated at the previous solution. Only the
    parameter t changes; the domain is otherwise fixed.
    """
    options = options or SolverOptions()
    final_options = final_options or options
    out: list[LineSolution] = []
    state = None
    for i, t in enumerate(t_values):
        dom = replace(domain, t=t)
        opts = final_options if i == len(t_values) - 1 else options
        if state is not None:
            prev = out[-1]
            pd = prev.domain
            prob = _make_problem(pd, opts, prev.boundary)
            dbd = _boundary_t_derivative(pd, prev.boundary)
            z = prev.state.astype(prob.dtype)
            dzdt = -_solve_linear(prob.jacobian(z), prob.dF_dt(z, dbd))
            dt = complex(t) - complex(pd.t)
            state = z + (dt.real if prob.real else dt) * dzdt
        sol = newton_armijo(dom, options=opts, state0=state)
        log.info("t=%s residual=%.2e iterations=%d", t, sol.residual_norm, sol.iterations)
        out.append(sol)
        state = sol.state
    return out


# --- presets -------------------------------------------------------------------

def preset_domain(name: str, t: complex = 0.0, Nc: int = 512, xi_l: float | None = None,
                  xi_r: float | None = None, b: complex = 0j, phi: float | None = None,
                  threshold: float = 1e-6) -> LineDomain:
    """Line problems used in the experiments.

    ``U0-real``   real axis, arguments ``(3 pi, 0)``;
    ``V0-imag``   imaginary axis ``phi = 5 pi / 2``, arguments ``(7 pi/2, 5 pi/2)``;
    ``U0-offset`` line ``x = xi + b`` parallel to the real axis;
    ``U0-rotated`` line ``phi``, arguments ``(3 pi + phi, phi)``.
    """
    xi_l = -12.0 if xi_l is None else xi_l
    xi_r = 12.0 if xi_r is None else xi_r
    if name == "U0-real":
        return LineDomain(0.0, 0j, xi_l, xi_r, t, Nc, 3 * math.pi, 0.0, threshold,
                          allow_origin=True)
    if name == "V0-imag":
        return LineDomain(5 * math.pi / 2, 0j, xi_l, xi_r, t, Nc, 7 * math.pi / 2,
                          5 * math.pi / 2, threshold, allow_origin=True)
    if name == "U0-offset":
        b = complex(b)
        xl, xr = xi_l + b, xi_r + b
        al = cmath.phase(xl)
        al = al + 2 * math.pi if al < 0 else al
        return LineDomain(0.0, b, xi_l, xi_r, t, Nc, al + 2 * math.pi, cmath.phase(xr), threshold)
    if name == "U0-rotated":
        phi = 0.0 if phi is None else phi
        return LineDomain(phi, 0j, xi_l, xi_r, t, Nc, 3 * math.pi + phi, phi, threshold,
                          allow_origin=True)
    raise ValueError(f"unknown preset {name!r}")
