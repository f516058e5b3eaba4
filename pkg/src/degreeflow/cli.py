"""Command-line interface.

Subcommands: ``solve`` (PDE field on a grid), ``steady`` (stationary profile
and residuals), ``ode`` (truncated master-equation reference), ``mc``
(stochastic ensemble against the reference), and ``compare`` (field vs
stationary profile: norms, decay-law fit, bend detection, oracle deviation).
All numeric output files are CSV with 17-significant-digit floats and carry
the canonical config hash, so identical configurations reproduce identical
bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import detect_bend, diff_norms, fit_rate
from .characteristics import solve_grid
from .config import ExperimentConfig, _parse_constants, parse_config
from .degree_ode import first_moment, gf_eval, integrate
from .errors import (
    AccuracyError,
    DegenerateSeedError,
    DegreeFlowError,
    DomainError,
    IntegrationError,
    NoSteadyStateError,
    TruncationError,
    ValidationError,
)
from .graphsim import SimConfig, run
from .model import Degeneracy, derive_riccati, steady_constants
from .riccati import solve_closed_form
from .steady import (
    SteadyCaseTag,
    SteadyState,
    construct,
    explicit_constants,
    residual,
    steady_from_rates,
)

_EXCLUDE = 1e-3  # residuals are not reported this close to a singular point


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: list[str], rows, cfg_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _steady_state(cfg: ExperimentConfig):
    """(state, constants-or-None) honoring an explicit constants override."""
    if cfg.steady_constants is not None:
        constants = explicit_constants(*cfg.steady_constants)
        return construct(constants, anchor=cfg.steady_anchor), constants
    state = steady_from_rates(cfg.rates, anchor=cfg.steady_anchor)
    constants = steady_constants(cfg.rates)
    if constants.degeneracy is not Degeneracy.REGULAR:
        constants = None
    return state, constants


# -- subcommands -------------------------------------------------------------


def cmd_solve(cfg: ExperimentConfig) -> int:
    h = cfg.initial()
    x, t = cfg.x_grid(), cfg.t_grid()
    field = solve_grid(x, t, cfg.rates, h, cfg.solver_tol)
    out = _outdir(cfg)
    rows = (
        (tj, xi, field.G[j, i], field.Gx[j, i])
        for j, tj in enumerate(t)
        for i, xi in enumerate(x)
    )
    _write_csv(out / "field.csv", ["t", "x", "G", "Gx"], rows, cfg.hash)
    g = field.g
    _write_csv(
        out / "gmoment.csv",
        ["t", "g", "dg_dt"],
        ((tj, g(tj), g.derivative(tj)) for tj in t),
        cfg.hash,
    )
    print(f"solved field on {x.size} x {t.size} grid -> {out / 'field.csv'}")
    if np.any(x == 1.0):
        i1 = int(np.argmax(x == 1.0))
        closure = float(np.max(np.abs(field.Gx[:, i1] - g(t))))
        unit = float(np.max(np.abs(field.G[:, i1] - 1.0)))
        print(f"normalization max |G(1,t)-1| = {unit:.3e}")
        print(f"moment closure max |Gx(1,t)-g(t)| = {closure:.3e}")
    return 0


def cmd_steady(cfg: ExperimentConfig) -> int:
    state, constants = _steady_state(cfg)
    x = cfg.x_grid()
    values = state(x)
    res = np.full_like(x, np.nan)
    if constants is not None:
        ok = np.ones(x.size, dtype=bool)
        for s in state.case.singular_points:
            ok &= np.abs(x - s) > _EXCLUDE
        if np.any(ok):
            res[ok] = residual(state, constants, x[ok])
    out = _outdir(cfg)
    _write_csv(out / "steady.csv", ["x", "g_star", "residual"], zip(x, values, res), cfg.hash)
    print(f"case: {state.case.tag.value}")
    print(f"singular points: {list(state.case.singular_points)}")
    print(f"G*(1) = {state.value_at_one}")
    print(f"slope at 1 = {state.slope_at_one}")
    if state.value_at_ratio is not None:
        print(f"G*(c2/c1) = {state.value_at_ratio}")
    print(f"certified: {state.certified} ({state.note})")
    if constants is not None and np.any(np.isfinite(res)):
        print(f"max |residual| away from singular points = {np.nanmax(np.abs(res)):.3e}")
    print(f"wrote {out / 'steady.csv'}")
    return 0


def cmd_ode(cfg: ExperimentConfig) -> int:
    h = cfg.initial()
    p0 = h.coefficients(cfg.oracle_k_max)
    traj = integrate(p0, cfg.rates, cfg.t_max, cfg.oracle_tol, cfg.oracle_mass_tol)
    t = cfg.t_grid()
    out = _outdir(cfg)
    rows = (
        (tj, k, dist.p[k])
        for tj in t
        for dist in (traj.at(float(tj)),)
        for k in range(dist.p.size)
    )
    _write_csv(out / "ode.csv", ["t", "k", "p"], rows, cfg.hash)
    g0 = h.mean_degree
    g = solve_closed_form(derive_riccati(cfg.rates), g0) if g0 > 0.0 else None
    moments = []
    max_gap = 0.0
    for tj in t:
        mu = traj.first_moment(float(tj))
        gv = g(float(tj)) if g is not None else float("nan")
        gap = abs(mu - gv) if g is not None else float("nan")
        if g is not None:
            max_gap = max(max_gap, gap)
        moments.append((tj, traj.mass(float(tj)), mu, gv, gap))
    _write_csv(out / "ode_moments.csv", ["t", "mass", "first_moment", "g_closed", "gap"], moments, cfg.hash)
    drift = max(abs(traj.mass(float(tj)) - 1.0) for tj in t)
    print(f"integrated master equation to t = {cfg.t_max} at k_max = {cfg.oracle_k_max}")
    print(f"max |mass - 1| on output grid = {drift:.3e}")
    if g is not None:
        print(f"max |first moment - closed form| = {max_gap:.3e}")
    print(f"wrote {out / 'ode.csv'}")
    return 0


def cmd_mc(cfg: ExperimentConfig) -> int:
    sim = SimConfig(
        rates=cfg.rates,
        n_nodes=cfg.mc_nodes,
        sample_times=cfg.mc_sample_times,
        seed=cfg.mc_seed,
        replicas=cfg.mc_replicas,
        graph=cfg.mc_graph,
        graph_degree=cfg.mc_graph_degree,
        k_max=cfg.mc_k_max,
    )
    result = run(sim)
    h = cfg.initial()
    t_end = max(cfg.mc_sample_times)
    traj = None
    if t_end > 0.0:
        traj = integrate(h.coefficients(cfg.oracle_k_max), cfg.rates, t_end, cfg.oracle_tol, cfg.oracle_mass_tol)
    kk = cfg.mc_k_max + 1
    rows = []
    tvs = []
    for j, tj in enumerate(result.times):
        ref_full = traj.at(float(tj)).p if traj is not None and tj > 0.0 else h.coefficients(cfg.oracle_k_max)
        ref = ref_full[:kk]
        mean = result.mean[j]
        # total variation with the truncated tails lumped into one bin
        tv = 0.5 * float(np.sum(np.abs(mean - ref))) + 0.5 * abs(
            (1.0 - mean.sum()) - (1.0 - ref.sum())
        )
        tvs.append(tv)
        for k in range(kk):
            rows.append((tj, k, mean[k], result.stderr[j, k], ref[k], tv))
    out = _outdir(cfg)
    _write_csv(out / "mc.csv", ["t", "k", "mean", "stderr", "ode_p", "tv"], rows, cfg.hash)
    print(
        f"simulated {cfg.mc_replicas} replicas of N = {cfg.mc_nodes} "
        f"({cfg.mc_graph} start, seed {cfg.mc_seed})"
    )
    for tj, tv in zip(result.times, tvs):
        print(f"t = {tj:g}: total variation vs reference = {tv:.4f}")
    if any(result.absorbed):
        print(f"absorbed replicas: {sum(result.absorbed)}/{cfg.mc_replicas}")
    if result.skipped:
        print(f"skipped placements: {result.skipped}")
    print(f"wrote {out / 'mc.csv'}")
    return 0


def cmd_compare(cfg: ExperimentConfig) -> int:
    h = cfg.initial()
    x, t = cfg.x_grid(), cfg.t_grid()
    field = solve_grid(x, t, cfg.rates, h, cfg.solver_tol)
    state, constants = _steady_state(cfg)
    series = diff_norms(field, state)
    out = _outdir(cfg)
    _write_csv(
        out / "norms.csv",
        ["t", "sup_norm", "l2_norm", "argmax_x"],
        zip(series.times, series.sup_norm, series.l2_norm, series.argmax_x),
        cfg.hash,
    )
    report: dict = {
        "config_hash": cfg.hash,
        "steady_case": state.case.tag.value,
        "certified": state.certified,
        "slope_at_one": state.slope_at_one,
    }
    window = (cfg.fit_t_min, cfg.fit_t_max if cfg.fit_t_max is not None else cfg.t_max)
    try:
        fit = fit_rate(series, window, cfg.fit_norm)
        report["fit"] = {
            "model": fit.model,
            "rate": fit.rate,
            "r_squared": fit.r_squared,
            "r2_exponential": fit.r2_exponential,
            "r2_algebraic": fit.r2_algebraic,
            "n_points": fit.n_points,
        }
        print(f"decay law ({cfg.fit_norm} norm, window {window}): {fit.model}, rate {fit.rate:.4f}, R^2 {fit.r_squared:.4f}")
    except (ValidationError, DomainError) as exc:
        report["fit"] = {"error": str(exc)}
        print(f"decay-law fit unavailable: {exc}")
    bend = detect_bend(series, boundary=float(x[0]), jump=cfg.bend_jump)
    report["bend_time"] = bend
    print(f"sup-norm maximizer bend: {bend}")
    try:
        traj = integrate(h.coefficients(cfg.oracle_k_max), cfg.rates, cfg.t_max, cfg.oracle_tol, cfg.oracle_mass_tol)
        dev = 0.0
        for j, tj in enumerate(t):
            ref = gf_eval(traj.at(float(tj)), x)
            dev = max(dev, float(np.max(np.abs(field.G[j] - ref))))
        report["oracle_max_abs_dev"] = dev
        print(f"max |G - oracle| on grid = {dev:.3e}")
    except DegreeFlowError as exc:
        report["oracle_max_abs_dev"] = None
        report["oracle_error"] = str(exc)
        print(f"oracle comparison unavailable: {exc}")
    with open(out / "fit.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out / 'norms.csv'} and {out / 'fit.json'}")
    return 0


# -- argument handling --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degreeflow",
        description="Degree-distribution dynamics of randomly evolving networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment INI file")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--tol", type=float, help="solver consistency tolerance")
    common.add_argument("--seed", type=int, help="simulation seed (overrides [mc] seed)")
    common.add_argument("--kmax", type=int, help="truncation index (overrides [oracle] k_max)")
    common.add_argument(
        "--constants",
        help="explicit stationary constants c1,c2,c3,c4,m (overrides [steady] constants)",
    )
    for name, text in (
        ("solve", "solve the generating-function PDE on the configured grid"),
        ("steady", "construct the stationary profile and its residuals"),
        ("ode", "integrate the truncated master-equation reference"),
        ("mc", "run the stochastic ensemble against the reference"),
        ("compare", "compare the solved field against the stationary profile"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    return parser


_HANDLERS = {
    "solve": cmd_solve,
    "steady": cmd_steady,
    "ode": cmd_ode,
    "mc": cmd_mc,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        cfg = cfg.override(
            out_dir=args.out,
            solver_tol=args.tol,
            mc_seed=args.seed,
            oracle_k_max=args.kmax,
            steady_constants=_parse_constants(args.constants) if args.constants else None,
        )
        return _HANDLERS[args.command](cfg)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NoSteadyStateError as exc:
        print(f"no steady state: {exc}", file=sys.stderr)
        return 3
    except (IntegrationError, AccuracyError, TruncationError, DegenerateSeedError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
