"""Diagnostics on converged line solutions.

Hamiltonian and Lax identities, the KdV flow in t, the exponentially small
difference between a solution and its asymptotic series, and two ways of
filling a sector of the x-plane.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline

from . import series as ser
from .bvp_solver import (LineDomain, LineSolution, SolverOptions, boundary_data, preset_domain,
                         solve_line)
from .model_curve import stokes_prediction
from .spectral import build_diff_ops

A0_ABS = 6.0 ** (1.0 / 3.0)


def _interior(sol: LineSolution, fraction: float = 2 / 3) -> np.ndarray:
    xi = sol.xi
    c = 0.5 * (xi[0] + xi[-1])
    h = 0.5 * (xi[-1] - xi[0]) * fraction
    return (xi >= c - h) & (xi <= c + h)


def _dx(sol: LineSolution, f: np.ndarray) -> np.ndarray:
    """Spectral x-derivative of node values."""
    D1 = build_diff_ops(sol.grid).D1
    return (D1 @ f) * np.exp(-1j * sol.domain.phi)


# --- Hamiltonians --------------------------------------------------------------

def H1_values(x, t, u, ux, uxx, uxxx):
    return (x * u + u ** 4 / 24 - t * u ** 2 / 2 + u * ux ** 2 / 24
            + ux * uxxx / 240 - uxx ** 2 / 480)


def H0_values(x, t, u, ux, uxx, uxxx):
    return (uxxx ** 2 / 1920 + u * ux * uxxx / 80 + u ** 2 * ux ** 2 / 16 + u ** 5 / 10
            + u ** 3 * uxx / 24 + u * uxx ** 2 / 240 - ux ** 2 * uxx / 480 - ux / 4
            + 1.5 * x * u ** 2 + x * uxx / 4 - t * u ** 3 - t * u * uxx / 4 + t * ux ** 2 / 8)


@dataclass
class HamiltonianTrace:
    x: np.ndarray
    H1: np.ndarray
    H0: np.ndarray
    r1: np.ndarray
    r0: np.ndarray
    interior: np.ndarray

    @property
    def r1_max(self) -> float:
        return float(np.max(np.abs(self.r1[self.interior])))

    @property
    def r0_max(self) -> float:
        return float(np.max(np.abs(self.r0[self.interior])))


def hamiltonians(sol: LineSolution) -> HamiltonianTrace:
    """``H1``, ``H0`` along the line and the residuals ``(H1)_x - u``,
    ``(H0)_x - 3u^2/2``."""
    x, t = sol.x, complex(sol.domain.t)
    d = [sol.x_derivative(k) for k in range(4)]
    h1 = H1_values(x, t, *d)
    h0 = H0_values(x, t, *d)
    u = d[0]
    return HamiltonianTrace(x, h1, h0, _dx(sol, h1) - u, _dx(sol, h0) - 1.5 * u ** 2,
                            _interior(sol))


# --- Lax pair --------------------------------------------------------------------

def lax_matrices(lam: complex, x, t, u, ux, uxx, uxxx):
    """Entries of ``A(lam)`` and ``B(lam)`` as arrays of shape ``(2, 2, n)``."""
    u, ux, uxx, uxxx, x = (np.asarray(v, dtype=complex) for v in (u, ux, uxx, uxxx, x))
    a = (-ux * lam - 3 * u * ux - uxxx / 4) / 60
    b = (lam ** 2 + u * lam + 1.5 * u ** 2 + uxx / 4 - 15 * t) / 30
    c = (lam ** 3 - u * lam ** 2 - (u ** 2 / 2 + uxx / 4 + 15 * t) * lam + 2 * u ** 3
         - ux ** 2 / 4 + u * uxx / 2 + 30 * x) / 30
    A = np.array([[a, b], [c, -a]])
    one = np.ones_like(u)
    B = np.array([[0 * one, one], [lam - 2 * u, 0 * one]])
    return A, B


def lax_residual(sol: LineSolution, lambda_samples=(0, 1 + 1j, -2),
                 fraction: float = 2 / 3) -> float:
    """Max of ``|A_x - B_lam + [A, B]|`` over the samples and interior nodes."""
    x, t = sol.x, complex(sol.domain.t)
    d = [sol.x_derivative(k) for k in range(4)]
    mask = _interior(sol, fraction)
    worst = 0.0
    Blam = np.array([[0, 0], [1, 0]])[:, :, None]
    for lam in lambda_samples:
        A, B = lax_matrices(complex(lam), x, t, *d)
        Ax = np.array([[_dx(sol, A[i, j]) for j in range(2)] for i in range(2)])
        comm = np.einsum("ikn,kjn->ijn", A, B) - np.einsum("ikn,kjn->ijn", B, A)
        M = Ax - Blam + comm
        worst = max(worst, float(np.max(np.abs(M[:, :, mask]))))
    return worst


# --- KdV in t ----------------------------------------------------------------------

def kdv_from_solutions(sm: LineSolution, s0: LineSolution, sp_: LineSolution, delta: float,
                       fraction: float = 2 / 3) -> float:
    """``|u_t + u u_x + u_xxx / 12|`` with a central difference in t."""
    if not (sm.grid.nodes.shape == s0.grid.nodes.shape == sp_.grid.nodes.shape):
        raise ValueError("solutions must share a grid")
    ut = (sp_.u - sm.u) / (2 * delta)
    r = ut + s0.u * s0.x_derivative(1) + s0.x_derivative(3) / 12
    return float(np.max(np.abs(r[_interior(s0, fraction)])))


def _solve_at(template: LineDomain, t: float, options: SolverOptions | None) -> LineSolution:
    return solve_line(replace(template, t=t), options)


def kdv_residual(t_center: float, delta_t: float, template: LineDomain | None = None,
                 options: SolverOptions | None = None) -> float:
    """KdV residual from three solves at ``t_center`` and ``t_center +- delta_t``.

    Any failing solve propagates its exception.
    """
    template = template or preset_domain("U0-real", xi_l=-12.0, xi_r=12.0)
    options = options or SolverOptions(tol=1e-12, max_iter=60)
    sols = [_solve_at(template, t_center + k * delta_t, options) for k in (-1, 0, 1)]
    return kdv_from_solutions(*sols, delta_t)


@dataclass
class KdVStudy:
    deltas: list
    residuals: list
    fd_parts: list

    @property
    def ratios(self) -> list:
        return [a / b for a, b in zip(self.fd_parts, self.fd_parts[1:])]


def kdv_study(t_center: float = -1.0, delta: float = 1e-3, levels: int = 3,
              template: LineDomain | None = None, options: SolverOptions | None = None) -> KdVStudy:
    """Residuals at ``delta, delta/2, ...`` and the finite-difference parts.

    The central difference at step ``h`` is ``u_t + C h^2 + ...``, so
    ``(4/3)(D_h - D_{h/2})`` estimates its error ``C h^2``. Those estimates
    should drop by about 4 per halving.
    """
    template = template or preset_domain("U0-real", xi_l=-12.0, xi_r=12.0)
    options = options or SolverOptions(tol=1e-12, max_iter=60)
    s0 = _solve_at(template, t_center, options)
    deltas = [delta / 2 ** k for k in range(levels)]
    Dh, res = [], []
    mask = _interior(s0)
    for h in deltas:
        sm = _solve_at(template, t_center - h, options)
        sp_ = _solve_at(template, t_center + h, options)
        Dh.append((sp_.u - sm.u) / (2 * h))
        res.append(kdv_from_solutions(sm, s0, sp_, h))
    fd = [float(np.max(np.abs(4 / 3 * (a - b))[mask])) for a, b in zip(Dh, Dh[1:])]
    return KdVStudy(deltas, res, fd)


# --- quasi-linear Stokes difference --------------------------------------------------

class SignalBelowNoise(RuntimeError):
    pass


@dataclass
class DecayFit:
    samples: list
    rate: float
    period: float
    r_squared: float
    window: tuple
    n_samples: int = 0
    amplitude: float = math.nan
    predicted_rate: float = math.nan
    predicted_period: float = math.nan
    x: np.ndarray | None = field(default=None, repr=False)
    difference: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"rate": self.rate, "period": self.period, "r2": self.r_squared,
                "window": list(self.window), "n_samples": self.n_samples,
                "amplitude": self.amplitude, "predicted_rate": self.predicted_rate,
                "predicted_period": self.predicted_period}


def series_on_negative_axis(x: np.ndarray, t: complex = 0.0, cap: int = ser.HARD_CAP) -> tuple:
    """Optimally truncated series at ``|x|`` with ``arg x = 3 pi``.

    Returns values and the last-term sizes used as the truncation error.
    """
    vals, errs = [], []
    for r in np.abs(x):
        p = ser.BranchedPoint(float(r), 3 * math.pi)
        rep = ser.auto_truncate(t, p, threshold=1e-300, cap=cap, strict=False)
        vals.append(ser.evaluate(rep.series, p))
        errs.append(rep.last_term_size)
    return np.array(vals), np.array(errs)


def _local_maxima(y: np.ndarray) -> np.ndarray:
    return np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1


def fit_decay(x: np.ndarray, d: np.ndarray, noise: np.ndarray, window=(4.0, 10.0)) -> DecayFit:
    """Fit the oscillating exponentially small ``d`` on the negative axis.

    ``s = |x|^{7/6}``. The rate is minus the slope of ``log(|d| |x|^{1/4})``
    at the local maxima of ``|d|`` regressed against ``s``; the period is
    twice the spacing of the zero crossings of ``Re d`` in ``s``.
    ``d`` must be sampled finely (many points per oscillation).
    """
    r = np.abs(x)
    order = np.argsort(r)
    r, d, noise = r[order], d[order], noise[order]
    sel = (r >= window[0]) & (r <= window[1])
    floor = np.maximum(10 * noise, 1e-12)
    if not np.any(np.abs(d[sel]) > floor[sel]):
        raise SignalBelowNoise("signal below noise floor in the whole window")
    sel &= np.abs(d) > floor
    rr, dd = r[sel], d[sel]
    s = rr ** (7 / 6)
    ad = np.abs(dd)
    im = _local_maxima(ad)
    if im.size < 3:
        raise SignalBelowNoise("too few envelope maxima above the noise floor")
    X = s[im]
    Y = np.log(ad[im] * rr[im] ** 0.25)
    slope, icpt = np.polyfit(X, Y, 1)
    pred = slope * X + icpt
    r2 = 1 - np.sum((Y - pred) ** 2) / np.sum((Y - Y.mean()) ** 2)
    re = dd.real
    k = np.nonzero(np.sign(re[1:]) != np.sign(re[:-1]))[0]
    # linear interpolation of each crossing
    sc = s[k] - re[k] * (s[k + 1] - s[k]) / (re[k + 1] - re[k])
    if sc.size < 3:
        raise SignalBelowNoise("too few zero crossings")
    half = np.polyfit(np.arange(sc.size), sc, 1)[0]
    samples = list(zip(X.tolist(), Y.tolist()))
    return DecayFit(samples, -float(slope), 2 * abs(float(half)), float(r2),
                    (float(window[0]), float(window[1])), int(im.size),
                    amplitude=float(math.exp(icpt)))


def stokes_difference(t: float = 0.0, window=(4.0, 10.0), solution: LineSolution | None = None,
                      xi_l: float = -20.0, xi_r: float = 12.0, Nc: int = 512,
                      threshold: float = 1e-13, n_samples: int = 4000) -> DecayFit:
    """Measure ``U0 - S`` on the negative axis and fit its envelope.

    ``U0`` is the real-line solution (left end far enough out that the
    exponentially small term omitted by the boundary series is negligible in
    the window); ``S`` is the optimally truncated series with ``arg x = 3 pi``.
    """
    if t != 0:
        raise ValueError("the quantitative Stokes fit is anchored at t = 0")
    if solution is None:
        dom = preset_domain("U0-real", t=0.0, Nc=Nc, xi_l=xi_l, xi_r=xi_r, threshold=threshold)
        solution = solve_line(dom, SolverOptions(tol=1e-10))
    xq = -np.linspace(window[0], window[1], n_samples)
    u = solution.evaluate(xq)
    S, err = series_on_negative_axis(xq, t)
    d = u - S
    fit = fit_decay(xq, d, err, window)
    pred = stokes_prediction(t, 3 * math.pi)
    fit.predicted_rate, fit.predicted_period = pred.rate, pred.period
    fit.x, fit.difference = xq, d
    return fit


# --- oscillation support ---------------------------------------------------------------

@dataclass
class OscillationSupport:
    left: float
    right: float
    extrema: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)


def oscillation_support(sol: LineSolution, fraction: float = 0.1, n_samples: int = 40001,
                        ) -> OscillationSupport:
    """Interval spanned by oscillations of ``Re u`` of significant amplitude.

    Extrema are located on a fine resampling; the half difference of
    consecutive extremal values is the local amplitude. The support runs from
    the leftmost to the rightmost extremum adjacent to an amplitude of at
    least ``fraction`` times the largest one.
    """
    xs = np.linspace(sol.xi[0], sol.xi[-1], n_samples)
    us = np.real(sol.evaluate(xs))
    du = np.diff(us)
    idx = np.nonzero(np.sign(du[1:]) != np.sign(du[:-1]))[0] + 1
    if idx.size < 2:
        return OscillationSupport(math.nan, math.nan, xs[idx], np.array([]))
    ex, ev = xs[idx], us[idx]
    amp = np.abs(np.diff(ev)) / 2
    big = np.nonzero(amp >= fraction * amp.max())[0]
    x = np.real(sol.domain.x(ex))
    return OscillationSupport(float(x[big[0]]), float(x[big[-1] + 1]), x, amp)


# --- sector fields ---------------------------------------------------------------------

@dataclass
class SectorField:
    r: np.ndarray
    theta: np.ndarray
    u: np.ndarray  # shape (len(r), len(theta))
    method: str
    family: str = "typeII"
    m: int = 0
    t: complex = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def re_u(self) -> np.ndarray:
        return self.u.real

    @property
    def im_u(self) -> np.ndarray:
        return self.u.imag

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "theta", "re_u", "im_u"])
            for i, r in enumerate(self.r):
                for j, th in enumerate(self.theta):
                    w.writerow([repr(float(r)), repr(float(th)),
                                repr(float(self.u[i, j].real)), repr(float(self.u[i, j].imag))])

    def write_json(self, path) -> None:
        meta = {"method": self.method, "family": self.family, "m": self.m,
                "t": [complex(self.t).real, complex(self.t).imag],
                "r_range": [float(self.r[0]), float(self.r[-1])],
                "theta_range": [float(self.theta[0]), float(self.theta[-1])],
                "shape": list(self.u.shape), **self.meta}
        with open(path, "w") as fh:
            json.dump(meta, fh, indent=2)


def anchor_domain(family: str, m: int = 0, t: complex = 0.0, Nc: int = 512,
                  L: float = 12.0) -> LineDomain:
    """A line through the origin on which the tritronquee is posed directly.

    ``typeII``: the real axis (arguments ``3 pi``, ``0``); ``typeI``: the
    imaginary axis (``7 pi / 2``, ``5 pi / 2``). Both are rotated by
    ``6 pi m / 7`` for other ``m``.
    """
    rot = 6 * math.pi * m / 7
    if family == "typeII":
        phi, al, ar = rot, 3 * math.pi + rot, rot
    elif family == "typeI":
        phi, al, ar = 2.5 * math.pi + rot, 3.5 * math.pi + rot, 2.5 * math.pi + rot
    else:
        raise ValueError(f"unknown family {family!r}")
    return LineDomain(phi, 0j, -L, L, t, Nc, al, ar, 1e-10, allow_origin=True)


def origin_data(anchor: LineSolution) -> tuple[complex, complex]:
    """``u(0)`` and ``u_x(0)`` from a solution on a line through the origin."""
    xi0 = -complex(anchor.domain.b) / anchor.domain.direction
    if abs(xi0.imag) > 1e-12:
        raise ValueError("line does not pass through the origin")
    return complex(anchor.evaluate(xi0.real, 0)), complex(anchor.evaluate(xi0.real, 1))


def solve_ray(theta: float, R: float, data0: tuple, t: complex = 0.0, Nc: int = 128,
              threshold: float = 1e-10, options: SolverOptions | None = None) -> LineSolution:
    """Radial problem ``x = e^{i theta} r``, ``r in [0, R]``, with ``u(0)``,
    ``u_x(0)`` pinned and the series imposed at ``r = R``."""
    dom = LineDomain(theta, 0j, 0.0, R, t, Nc, theta, theta, threshold, left_data=tuple(data0),
                     allow_origin=True)
    return solve_line(dom, options or SolverOptions(tol=1e-10))


def _ray_bundle(thetas, R, data0, t, Nc, threshold, options, workers):
    def one(th):
        return solve_ray(float(th), R, data0, t, Nc, threshold, options)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, thetas))
    return [one(th) for th in thetas]


def laplace_polar(r: np.ndarray, theta: np.ndarray, boundary: np.ndarray) -> np.ndarray:
    """Dirichlet problem for the Laplacian on a polar grid.

    ``boundary`` has shape ``(len(r), len(theta))``; only its edge values are
    used. Real and imaginary parts are solved independently with the
    5-point stencil of ``u_rr + u_r / r + u_tt / r^2`` on uniform grids.
    """
    nr, nt = len(r), len(theta)
    if nr < 3 or nt < 3:
        raise ValueError("degenerate grid")
    hr, ht = r[1] - r[0], theta[1] - theta[0]
    ni, nj = nr - 2, nt - 2
    ri = r[1:-1]
    idx = np.arange(ni * nj).reshape(ni, nj)
    cW = 1 / hr ** 2 - 1 / (2 * hr * ri)
    cE = 1 / hr ** 2 + 1 / (2 * hr * ri)
    cT = 1 / (ri * ht) ** 2
    cC = -2 / hr ** 2 - 2 * cT
    rows, cols, vals = [], [], []
    rhs = np.zeros(ni * nj, dtype=complex)
    for i in range(ni):
        for j in range(nj):
            k = idx[i, j]
            rows.append(k); cols.append(k); vals.append(cC[i])
            for di, dj, c in ((-1, 0, cW[i]), (1, 0, cE[i]), (0, -1, cT[i]), (0, 1, cT[i])):
                ii, jj = i + di, j + dj
                if 0 <= ii < ni and 0 <= jj < nj:
                    rows.append(k); cols.append(idx[ii, jj]); vals.append(c)
                else:
                    rhs[k] -= c * boundary[ii + 1, jj + 1]
    A = sp.csc_matrix((vals, (rows, cols)), shape=(ni * nj, ni * nj))
    lu = spla.splu(A)
    out = np.array(boundary, dtype=complex)
    sol = lu.solve(rhs.real) + 1j * lu.solve(rhs.imag)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("singular Laplace matrix")
    out[1:-1, 1:-1] = sol.reshape(ni, nj)
    return out


def sector_field(family: str = "typeII", m: int = 0, t: complex = 0.0,
                 r_range=(1.0, 10.0), theta_range=(-1.4, 1.4), n_rays: int = 16,
                 n_r: int = 181, n_theta: int | None = None, method: str = "rays",
                 Nc_ray: int = 128, anchor: LineSolution | None = None,
                 threshold: float = 1e-10, workers: int = 4,
                 options: SolverOptions | None = None) -> SectorField:
    """Field ``u(r e^{i theta})`` over a polar grid.

    ``rays``: ``n_rays`` radial problems at equally spaced angles, pinned at
    the origin by the anchor solution; the polar grid columns are those
    angles. ``laplace``: the two edge rays and ``n_rays`` rays for the inner
    arc (spline in theta), series values on the outer arc, and the 5-point
    Laplace solve inside. ``n_theta`` defaults to ``8 (n_rays - 1) + 1`` so
    every ray angle is a grid column.
    """
    if method not in ("rays", "laplace"):
        raise ValueError(f"unknown method {method!r}")
    if n_rays < 3:
        raise ValueError("need at least 3 rays")
    r0, R = map(float, r_range)
    if anchor is None:
        anchor = solve_line(anchor_domain(family, m, t), SolverOptions(tol=1e-10))
    data0 = origin_data(anchor)
    rays_th = np.linspace(theta_range[0], theta_range[1], n_rays)
    r = np.linspace(r0, R, n_r)
    rays = _ray_bundle(rays_th, R, data0, t, Nc_ray, threshold, options, workers)
    meta = {"n_rays": n_rays, "Nc_ray": Nc_ray, "anchor_u0": [data0[0].real, data0[0].imag],
            "max_ray_residual": max(s.residual_norm for s in rays)}
    if method == "rays":
        u = np.stack([s.evaluate(r) for s in rays], axis=1)
        return SectorField(r, rays_th, u, "rays", family, m, t, meta)
    n_theta = n_theta or 8 * (n_rays - 1) + 1
    th = np.linspace(theta_range[0], theta_range[1], n_theta)
    B = np.zeros((n_r, n_theta), dtype=complex)
    B[:, 0] = rays[0].evaluate(r)
    B[:, -1] = rays[-1].evaluate(r)
    inner = np.array([s.evaluate(r0) for s in rays])
    B[0, :] = CubicSpline(rays_th, inner.real)(th) + 1j * CubicSpline(rays_th, inner.imag)(th)
    for j, a in enumerate(th):
        p = ser.BranchedPoint(R, float(a))
        rep = ser.auto_truncate(t, p, threshold, strict=False)
        B[-1, j] = ser.evaluate(rep.series, p)
    u = laplace_polar(r, th, B)
    return SectorField(r, th, u, "laplace", family, m, t, meta)


def compare_fields(rays: SectorField, lap: SectorField) -> float:
    """Max discrepancy on the columns shared by a rays and a Laplace field."""
    if not np.allclose(rays.r, lap.r):
        raise ValueError("radial grids differ")
    worst = 0.0
    for j, a in enumerate(rays.theta):
        k = int(np.argmin(np.abs(lap.theta - a)))
        if abs(lap.theta[k] - a) > 1e-12:
            continue
        worst = max(worst, float(np.max(np.abs(rays.u[:, j] - lap.u[:, k]))))
    return worst


def field_bounded(fld: SectorField, factor: float = 4.0) -> bool:
    """No blow-up: finite and ``|u| <= factor 6^{1/3} max(r, 1)^{1/3}``."""
    if not np.all(np.isfinite(fld.u)):
        return False
    bound = factor * A0_ABS * np.maximum(fld.r, 1.0) ** (1 / 3)
    return bool(np.all(np.abs(fld.u) <= bound[:, None]))


# --- reports -----------------------------------------------------------------------------

def coefficient_asymptotics_report(Ns, t: complex = 0.0) -> dict:
    """Relative log-magnitude error of the large-N formula at each ``N``."""
    from .model_curve import coefficient_asymptotics

    Ns = [int(n) for n in Ns]
    logmag, _ = ser.coefficients_log(t, max(Ns))
    rows = []
    for N in Ns:
        la, _ = coefficient_asymptotics(N, t)
        lr = float(logmag[N])
        if math.isinf(lr) or math.isinf(la):
            err = 0.0 if lr == la else math.inf
        else:
            err = abs(lr - la) / abs(lr)
        rows.append({"N": N, "log_abs_recurrence": lr, "log_abs_formula": la,
                     "rel_log_error": err})
    errs = [r["rel_log_error"] for r in rows]
    return {"t": [complex(t).real, complex(t).imag], "rows": rows,
            "monotone": all(b < a for a, b in zip(errs, errs[1:]))}


def invariant_suite(quick: bool = True) -> list[tuple[str, bool, str]]:
    """Named invariant checks as ``(name, passed, detail)``."""
    from . import model_curve as mc
    from . import stokes_data as sd

    out = []

    def add(name, ok, detail):
        out.append((name, bool(ok), detail))

    worst = max(max(ser.cn_table_check(t)) for t in (0, 1, -1, 2, -2, 1j))
    add("c_n table", worst < 1e-10, f"max relative residual {worst:.2e}")
    b = ser.coefficients_t0(30)
    lm, _ = ser.coefficients_log(0, 210)
    err = max(abs(lm[7 * n] - math.log(abs(float(b[n])))) for n in range(31))
    add("a_7n(0) = b_n", err < 1e-10, f"max log difference {err:.2e}")
    v = max(sd.validate(s) for s in sd.all_presets().values())
    add("Stokes presets", v < 1e-14, f"max cyclic violation {v:.1e}")
    rot = all(sd.rotate(s, 7).allclose(s) for s in sd.all_presets().values())
    add("rotate^7 = id", rot, "all presets")
    bounds = mc.sector_bounds_t0("typeII")
    add("sector bounds", abs(bounds[0][1] - 1.5266) < 1e-4, f"typeII edge {bounds[0][1]:.4f}")
    if not quick:
        sol = solve_line(preset_domain("U0-real", t=0.0))
        add("U0 residual", sol.residual_norm < 1e-8, f"{sol.residual_norm:.2e}")
        im = float(np.max(np.abs(sol.u.imag)))
        add("U0 real", im < 1e-6, f"max |Im u| {im:.1e}")
        h = hamiltonians(sol)
        add("Hamiltonians", max(h.r1_max, h.r0_max) < 1e-4, f"{h.r1_max:.1e}, {h.r0_max:.1e}")
        lr = lax_residual(sol)
        add("Lax", lr < 1e-4, f"{lr:.1e}")
    return out
