"""Command line interface.

Every command writes its data files plus ``manifest.json`` (the fully
resolved configuration) into an output directory. Complex values are given
as ``re,im``; angles are in radians. ``--config file.toml`` supplies
defaults per command (a ``[solve-line]`` table, say); explicit flags win.
The output root defaults to ``$TRITRONQUEE_OUT`` or ``./out``.

Exit codes: 0 success, 1 numerical failure, 2 invalid configuration.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import analysis as an
from . import bvp_solver as bvp
from . import model_curve as mc
from . import series as ser

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_NUMERIC = 1
EXIT_CONFIG = 2


class ComplexParam(click.ParamType):
    name = "re,im"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        if isinstance(value, (int, float)):
            return complex(value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        try:
            parts = str(value).split(",")
            if len(parts) == 1:
                return complex(float(parts[0]), 0.0)
            if len(parts) == 2:
                return complex(float(parts[0]), float(parts[1]))
        except ValueError:
            pass
        self.fail(f"{value!r} is not a complex number 're,im'", param, ctx)


COMPLEX = ComplexParam()


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(w) for w in v]
    return v


def _outdir(ctx: click.Context, name: str | None, command: str) -> Path:
    root = Path(ctx.obj["out"])
    d = root / (name or command)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(outdir: Path, command: str, params: dict, extra: dict | None = None) -> dict:
    cfg = {k: _jsonable(v) for k, v in sorted(params.items())}
    m = {"command": command, "version": __version__, "config": cfg,
         "config_hash": hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()}
    if extra:
        m.update(extra)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(m, fh, indent=2)
    return m


def _fail(outdir: Path | None, code: int, err: Exception):
    msg = f"{type(err).__name__}: {err}"
    if outdir is not None:
        diag = {"error": type(err).__name__, "message": str(err)}
        hist = getattr(err, "history", None)
        if hist:
            diag["history"] = [float(h) for h in hist]
        with open(outdir / "diagnostic.json", "w") as fh:
            json.dump(diag, fh, indent=2)
    click.echo(msg, err=True)
    sys.exit(code)


def _load_config(ctx, param, value):
    if value is None:
        return None
    try:
        with open(value, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise click.BadParameter(str(err), ctx, param)
    dm = {cmd: {k.replace("-", "_"): v for k, v in tbl.items()}
          for cmd, tbl in data.items() if isinstance(tbl, dict)}
    ctx.default_map = {**(ctx.default_map or {}), **dm}
    return value


@click.group()
@click.version_option(__version__)
@click.option("--config", type=click.Path(dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=False, help="TOML file with per-command defaults.")
@click.option("--out", "out", type=click.Path(file_okay=False),
              default=lambda: os.environ.get("TRITRONQUEE_OUT", "out"), show_default="$TRITRONQUEE_OUT or out",
              help="Output root directory.")
@click.pass_context
def main(ctx, out):
    """Tritronquee solutions: series, line solves, sectors and diagnostics."""
    ctx.ensure_object(dict)
    ctx.obj["out"] = out


@main.command("series")
@click.option("--t", type=COMPLEX, default="0", show_default=True)
@click.option("--max-n", type=int, default=60, show_default=True)
@click.option("--name", default=None, help="Subdirectory name.")
@click.pass_context
def cmd_series(ctx, t, max_n, name):
    """Write the coefficients a_0..a_max_n to coefficients.csv."""
    if max_n < 0:
        _fail(None, EXIT_CONFIG, ValueError("max-n must be non-negative"))
    outdir = _outdir(ctx, name, "series")
    try:
        a = ser.coefficients(t, max_n)
    except ser.CoefficientOverflow as err:
        _fail(outdir, EXIT_NUMERIC, err)
    ser.write_coefficients_csv(outdir / "coefficients.csv", a)
    _manifest(outdir, "series", ctx.params)
    click.echo(str(outdir / "coefficients.csv"))


PRESETS = ("U0-real", "V0-imag", "U0-offset", "U0-rotated", "custom")


def _domain_from(params) -> bvp.LineDomain:
    p = params
    if p["preset"] == "custom":
        if p["arg_left"] is None or p["arg_right"] is None:
            raise ValueError("custom lines need --arg-left and --arg-right")
        return bvp.LineDomain(p["phi"] or 0.0, p["b"], p["xi_l"], p["xi_r"], p["t"], p["nc"],
                              p["arg_left"], p["arg_right"], p["threshold"],
                              allow_origin=p["allow_origin"])
    return bvp.preset_domain(p["preset"], t=p["t"], Nc=p["nc"], xi_l=p["xi_l"], xi_r=p["xi_r"],
                             b=p["b"], phi=p["phi"], threshold=p["threshold"])


def _cache_path(ctx, params) -> Path:
    key = {k: _jsonable(v) for k, v in sorted(params.items()) if k not in ("name", "cache")}
    h = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:20]
    d = Path(ctx.obj["out"]) / ".cache"
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{h}.npz"


@main.command("solve-line")
@click.option("--preset", type=click.Choice(PRESETS), default="U0-real", show_default=True)
@click.option("--t", type=COMPLEX, default="0", show_default=True)
@click.option("--b", type=COMPLEX, default="0", show_default=True)
@click.option("--phi", type=float, default=None)
@click.option("--xi-l", type=float, default=-12.0, show_default=True)
@click.option("--xi-r", type=float, default=12.0, show_default=True)
@click.option("--nc", type=int, default=512, show_default=True)
@click.option("--arg-left", type=float, default=None)
@click.option("--arg-right", type=float, default=None)
@click.option("--allow-origin/--no-allow-origin", default=True, show_default=True)
@click.option("--threshold", type=float, default=1e-6, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=int, default=100, show_default=True)
@click.option("--formulation", type=click.Choice(["integral", "collocation"]), default="integral",
              show_default=True)
@click.option("--arithmetic", type=click.Choice(["complex", "real", "auto"]), default="complex",
              show_default=True)
@click.option("--initial", type=click.Choice(["smooth", "linear"]), default="smooth",
              show_default=True)
@click.option("--continue-from", "continue_from", type=float, default=None,
              help="Reach t by continuation from this real t (real lines only).")
@click.option("--t-step", type=float, default=0.25, show_default=True)
@click.option("--cache/--no-cache", default=False, show_default=True)
@click.option("--name", default=None)
@click.pass_context
def cmd_solve_line(ctx, **p):
    """Solve along a line and write solution.csv, solution.json."""
    outdir = _outdir(ctx, p["name"], "solve-line")
    try:
        dom = _domain_from(p)
        opts = bvp.SolverOptions(tol=p["tol"], max_iter=p["max_iter"],
                                 formulation=p["formulation"], arithmetic=p["arithmetic"],
                                 initial=p["initial"])
        bvp._use_real(dom, opts)
    except ValueError as err:
        _fail(outdir, EXIT_CONFIG, err)
    cpath = _cache_path(ctx, p) if p["cache"] else None
    try:
        state0 = None
        if cpath is not None and cpath.exists():
            state0 = np.load(cpath)["state"]
        if p["continue_from"] is not None and state0 is None:
            t_end = complex(p["t"])
            if t_end.imag != 0:
                raise ValueError("continuation needs real t")
            n = max(1, math.ceil(abs(t_end.real - p["continue_from"]) / p["t_step"]))
            ts = np.linspace(p["continue_from"], t_end.real, n + 1)
            sol = bvp.continue_in_t(dom, ts, opts)[-1]
        else:
            sol = bvp.newton_armijo(dom, options=opts, state0=state0)
    except (bvp.NoConvergence, bvp.SingularSolve, ser.ThresholdUnreachable,
            ser.CoefficientOverflow) as err:
        _fail(outdir, EXIT_NUMERIC, err)
    except ValueError as err:
        _fail(outdir, EXIT_CONFIG, err)
    if cpath is not None:
        # keep the extended precision: rounding the state costs ~1e-8 in residual
        np.savez(cpath, state=np.asarray(sol.state))
    sol.write_csv(outdir / "solution.csv")
    sol.write_json(outdir / "solution.json")
    _manifest(outdir, "solve-line", p, {"residual_norm": sol.residual_norm,
                                        "iterations": sol.iterations})
    click.echo(f"residual {sol.residual_norm:.3e} after {sol.iterations} iterations")


@main.command("sector")
@click.option("--family", type=click.Choice(mc.FAMILIES), default="typeII", show_default=True)
@click.option("--m", type=int, default=0, show_default=True)
@click.option("--t", type=COMPLEX, default="0", show_default=True)
@click.option("--r-min", type=float, default=1.0, show_default=True)
@click.option("--r-max", type=float, default=10.0, show_default=True)
@click.option("--theta-min", type=float, default=-1.4, show_default=True)
@click.option("--theta-max", type=float, default=1.4, show_default=True)
@click.option("--n-rays", type=int, default=16, show_default=True)
@click.option("--n-r", type=int, default=181, show_default=True)
@click.option("--n-theta", type=int, default=None)
@click.option("--nc-ray", type=int, default=128, show_default=True)
@click.option("--method", type=click.Choice(["rays", "laplace"]), default="rays", show_default=True)
@click.option("--workers", type=int, default=4, show_default=True)
@click.option("--name", default=None)
@click.pass_context
def cmd_sector(ctx, **p):
    """Fill a polar sector and write field.csv, field.json."""
    outdir = _outdir(ctx, p["name"], "sector")
    try:
        fld = an.sector_field(p["family"], p["m"], p["t"], (p["r_min"], p["r_max"]),
                              (p["theta_min"], p["theta_max"]), p["n_rays"], p["n_r"],
                              p["n_theta"], p["method"], p["nc_ray"], workers=p["workers"])
    except (bvp.NoConvergence, bvp.SingularSolve, np.linalg.LinAlgError,
            ser.ThresholdUnreachable) as err:
        _fail(outdir, EXIT_NUMERIC, err)
    except ValueError as err:
        _fail(outdir, EXIT_CONFIG, err)
    fld.write_csv(outdir / "field.csv")
    fld.write_json(outdir / "field.json")
    _manifest(outdir, "sector", p, {"bounded": an.field_bounded(fld)})
    click.echo(str(outdir / "field.csv"))


@main.command("stokes-diff")
@click.option("--window-min", type=float, default=4.0, show_default=True)
@click.option("--window-max", type=float, default=10.0, show_default=True)
@click.option("--xi-l", type=float, default=-20.0, show_default=True)
@click.option("--nc", type=int, default=512, show_default=True)
@click.option("--threshold", type=float, default=1e-13, show_default=True)
@click.option("--name", default=None)
@click.pass_context
def cmd_stokes_diff(ctx, **p):
    """Fit the exponentially small U0 - series difference on the negative axis."""
    outdir = _outdir(ctx, p["name"], "stokes-diff")
    try:
        fit = an.stokes_difference(0.0, (p["window_min"], p["window_max"]), xi_l=p["xi_l"],
                                   Nc=p["nc"], threshold=p["threshold"])
    except (an.SignalBelowNoise, bvp.NoConvergence, ser.ThresholdUnreachable) as err:
        _fail(outdir, EXIT_NUMERIC, err)
    except ValueError as err:
        _fail(outdir, EXIT_CONFIG, err)
    with open(outdir / "fit.json", "w") as fh:
        json.dump(fit.to_json(), fh, indent=2)
    _manifest(outdir, "stokes-diff", p)
    click.echo(json.dumps(fit.to_json()))


@main.command("coeff-asym")
@click.option("--t", type=COMPLEX, default="0", show_default=True)
@click.option("--max-n", type=int, default=350, show_default=True)
@click.option("--step", type=int, default=70, show_default=True)
@click.option("--name", default=None)
@click.pass_context
def cmd_coeff_asym(ctx, t, max_n, step, name):
    """Compare recurrence coefficients with the large-N formula."""
    outdir = _outdir(ctx, name, "coeff-asym")
    if step < 15 or max_n < step:
        _fail(outdir, EXIT_CONFIG, ValueError("need 15 <= step <= max-n"))
    rep = an.coefficient_asymptotics_report(range(step, max_n + 1, step), t)
    with open(outdir / "report.json", "w") as fh:
        json.dump(rep, fh, indent=2)
    _manifest(outdir, "coeff-asym", ctx.params)
    for row in rep["rows"]:
        click.echo(f"N={row['N']:4d} rel_log_error={row['rel_log_error']:.4e}")
    click.echo(f"monotone decrease: {rep['monotone']}")


@main.command("curve")
@click.option("--x", "modulus", type=float, required=True, help="|x|")
@click.option("--arg", "argument", type=float, default=0.0, show_default=True)
@click.option("--t", type=COMPLEX, default="0", show_default=True)
def cmd_curve(modulus, argument, t):
    """Print the model-curve data at (x, t) as JSON."""
    try:
        p = mc.branch_points(ser.BranchedPoint(modulus, argument), t)
    except mc.DegenerateCurve as err:
        _fail(None, EXIT_NUMERIC, err)
    except ValueError as err:
        _fail(None, EXIT_CONFIG, err)
    click.echo(p.to_json())


@main.command("check")
@click.option("--quick/--full", default=True, show_default=True,
              help="Skip the slower solver-based checks.")
def cmd_check(quick):
    """Run the invariant suite; exit 1 if any check fails."""
    results = an.invariant_suite(quick=quick)
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if not all(ok for _, ok, _ in results):
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
