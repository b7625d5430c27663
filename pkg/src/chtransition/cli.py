"""Command-line front end.

Subcommands: ``classify``, ``simulate``, ``reduce``, ``sweep``,
``validate``.  Each takes ``--config PATH`` plus ``--out DIR``,
``--seed N`` and ``--quiet`` and writes plot-ready CSV/JSON files under the
output directory.  Exit codes: 0 success, 1 numeric failure, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import bifurcated_amplitude, census_check, classify_transition
from .config import ConfigError, RunConfig, load_config
from .linstab import critical_set, growth_rate, verify_pes
from .manifold import ReducedState, cubic_coefficients, integrate_reduced
from .params import critical_temperature
from .simulator import (
    SimState,
    StepConfig,
    StepRejectedError,
    field_from_modes,
    random_initial_field,
    simulate,
)
from .spectral import inverse_transform, save_grid

# ConfigError is caught first in main(); any other ValueError from the
# numerics (no supercritical regime, marginal discriminant, wrong side,
# degenerate cubic) is a numeric failure, as is a rejected step
_NUMERIC_ERRORS = (ValueError, StepRejectedError)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path: Path, comments: list[str], header: list[str], rows) -> None:
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def _mode_column(K) -> str:
    return "y_" + "_".join(str(k) for k in K)


def _step_config(cfg: RunConfig) -> StepConfig:
    s = cfg.simulate
    return StepConfig(
        dt=s.dt,
        grid=s.grid,
        scheme=s.scheme,
        rhs=s.rhs,
        stabilization=s.stabilization,
        dealias=s.dealias,
    )


def _initial_state(cfg: RunConfig, seed: int, T: float) -> SimState:
    s = cfg.simulate
    if s.seed_modes is not None:
        u0 = field_from_modes(s.seed_modes, s.grid, cfg.domain)
    else:
        rng = np.random.default_rng(seed)
        u0 = random_initial_field(
            cfg.domain, s.grid, s.seed_amplitude, rng, band_limit=s.band_limit
        )
    return SimState(u=u0, t=0.0, T=T, params=cfg.physical)


def cmd_classify(cfg: RunConfig, out: Path, seed: int, quiet: bool) -> int:
    report = classify_transition(cfg.physical, cfg.domain)
    check = census_check(report, cfg.physical, cfg.domain)
    pes = verify_pes(cfg.physical, cfg.domain)
    _write_json(out / "report.json", report.as_dict())
    (out / "report.txt").write_text(report.to_text() + "\n")
    _write_json(out / "pes.json", pes.as_dict())
    _write_json(out / "equilibria.json", check.as_dict())
    _say(quiet, report.to_text())
    if not check.matches:
        _say(quiet, "census check mismatches: " + "; ".join(check.mismatches))
        return 1
    if not pes.passed:
        _say(quiet, "exchange-of-stabilities violations: " + "; ".join(pes.violations))
        return 1
    _say(quiet, f"wrote {out / 'report.json'}")
    return 0


def _trajectory_rows(result, modes):
    for i in range(len(result.times)):
        row = [result.times[i], result.mass[i], result.energy[i], result.dissipation[i]]
        row.extend(result.amplitudes[K][i] for K in modes)
        yield row


def cmd_simulate(cfg: RunConfig, out: Path, seed: int, quiet: bool) -> int:
    state0 = _initial_state(cfg, seed, cfg.T)
    step_cfg = _step_config(cfg)
    result = simulate(
        state0, step_cfg, t_end=cfg.simulate.t_end, record_every=cfg.simulate.record_every
    )
    modes = critical_set(cfg.physical, cfg.domain).modes
    _write_csv(
        out / "trajectory.csv",
        [f"seed = {seed}", f"T = {_fmt(cfg.T)}", "columns: time, mean of u, free energy, "
         "energy production rate, critical-mode amplitudes"],
        ["t", "mass", "energy", "dissipation"] + [_mode_column(K) for K in modes],
        _trajectory_rows(result, modes),
    )
    terminal = {_mode_column(K): result.amplitudes[K][-1] for K in modes}
    _write_json(
        out / "run.json",
        {
            "schema_version": 1,
            "seed": seed,
            "T": cfg.T,
            "t_end": cfg.simulate.t_end,
            "steps": result.steps_taken,
            "converged": result.converged,
            "terminal_amplitudes": terminal,
            "max_abs_mass": float(np.abs(result.mass).max()),
        },
    )
    if cfg.simulate.save_final_field:
        save_grid(out / "u_final.bin", inverse_transform(result.final_state.u))
    _say(
        quiet,
        f"simulated to t = {result.final_state.t:.6g} "
        f"({result.steps_taken} steps, converged={result.converged}); "
        f"terminal amplitudes {terminal}",
    )
    return 0


def cmd_reduce(cfg: RunConfig, out: Path, seed: int, quiet: bool) -> int:
    m = cfg.domain.multiplicity
    if len(cfg.reduce.y0) != m:
        raise ConfigError(
            f"reduce.y0 has {len(cfg.reduce.y0)} components but the domain "
            f"carries {m} critical modes"
        )
    y0 = ReducedState(y=cfg.reduce.y0, T=cfg.T)
    traj = integrate_reduced(
        y0,
        cfg.physical,
        cfg.domain,
        dt=cfg.reduce.dt,
        steps=cfg.reduce.steps,
        sigma_at=cfg.reduce.sigma_at,
        record_every=cfg.reduce.record_every,
    )
    modes = critical_set(cfg.physical, cfg.domain).modes
    _write_csv(
        out / "reduced.csv",
        [f"seed = {seed}", f"T = {_fmt(cfg.T)}", f"escaped = {traj.escaped}"],
        ["t"] + [_mode_column(K) for K in modes],
        ([traj.times[i]] + list(traj.states[i]) for i in range(len(traj.times))),
    )
    _say(
        quiet,
        f"reduced trajectory: {len(traj.times)} records, escaped={traj.escaped}, "
        f"final y = {tuple(float(v) for v in traj.final)}",
    )
    return 0


def _sweep_point(cfg: RunConfig, seed: int, eps: float, tc: float):
    T = tc * (1.0 - eps)
    amp_pred = bifurcated_amplitude(cfg.physical, cfg.domain, T)
    s = cfg.simulate
    u0 = field_from_modes({(1, 0, 0): 0.5 * amp_pred}, s.grid, cfg.domain)
    state0 = SimState(u=u0, t=0.0, T=T, params=cfg.physical)
    beta = growth_rate((1, 0, 0), T, cfg.physical, cfg.domain)
    t_end = min(s.t_end, 12.0 / beta)
    result = simulate(
        state0, _step_config(cfg), t_end=t_end,
        record_every=max(1, s.record_every), steady_tol=1e-9,
    )
    amp = abs(result.amplitudes[(1, 0, 0)][-1])
    return eps, T, amp, amp_pred


def cmd_sweep(cfg: RunConfig, out: Path, seed: int, quiet: bool) -> int:
    if cfg.domain.multiplicity != 1:
        raise ConfigError("the amplitude sweep applies to a single critical mode (m = 1)")
    tc = critical_temperature(cfg.physical, cfg.domain)
    eps = sorted(cfg.sweep.epsilons)
    if any(e <= 0 or e >= 1 for e in eps):
        raise ConfigError("sweep epsilons must lie in (0, 1)")
    workers = max(1, cfg.sweep.workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda e: _sweep_point(cfg, seed, e, tc), eps))
    else:
        points = [_sweep_point(cfg, seed, e, tc) for e in eps]
    points.sort()
    log_dt = [math.log(tc - T) for _, T, _, _ in points]
    log_amp = [math.log(a) for _, _, a, _ in points]
    slope, intercept = np.polyfit(log_dt, log_amp, 1)
    _write_csv(
        out / "sweep.csv",
        [f"seed = {seed}", f"Tc = {_fmt(tc)}",
         "columns: relative quench, temperature, measured amplitude, predicted amplitude"],
        ["epsilon", "T", "amplitude", "predicted"],
        points,
    )
    _write_json(
        out / "sweep.json",
        {
            "schema_version": 1,
            "seed": seed,
            "Tc": tc,
            "slope": float(slope),
            "intercept": float(intercept),
            "points": [
                {"epsilon": e, "T": T, "amplitude": a, "predicted": pr}
                for e, T, a, pr in points
            ],
        },
    )
    _say(quiet, f"sweep: fitted log-amplitude slope {slope:.4f} (square-root law is 0.5)")
    return 0


def cmd_validate(cfg: RunConfig, out: Path, seed: int, quiet: bool) -> int:
    m = cfg.domain.multiplicity
    if len(cfg.validate.y0) != m:
        raise ConfigError(
            f"validate.y0 has {len(cfg.validate.y0)} components but the domain "
            f"carries {m} critical modes"
        )
    modes = critical_set(cfg.physical, cfg.domain).modes
    beta = growth_rate(modes[0], cfg.T, cfg.physical, cfg.domain)
    if beta <= 0:
        raise ValueError(
            "validation needs T below the critical temperature (growing critical modes)"
        )
    horizon = cfg.validate.relaxation_times / beta
    s = cfg.simulate
    seeds = {K: a for K, a in zip(modes, cfg.validate.y0)}
    state0 = SimState(
        u=field_from_modes(seeds, s.grid, cfg.domain), t=0.0, T=cfg.T, params=cfg.physical
    )
    result = simulate(state0, _step_config(cfg), t_end=horizon, record_every=1)
    n_steps = len(result.times) - 1
    traj = integrate_reduced(
        ReducedState(y=cfg.validate.y0, T=cfg.T),
        cfg.physical,
        cfg.domain,
        dt=s.dt,
        steps=n_steps,
        record_every=1,
    )
    a1, _ = cubic_coefficients(cfg.physical, cfg.domain)
    scale = math.sqrt(beta / a1) if a1 > 0 else float(np.abs(traj.states).max())
    n = min(len(result.times), len(traj.times))
    devs = np.stack(
        [np.abs(result.amplitudes[K][:n] - traj.states[:n, j]) for j, K in enumerate(modes)]
    )
    max_dev = float(devs.max())
    rows = []
    for i in range(n):
        row = [result.times[i]]
        row.extend(result.amplitudes[K][i] for K in modes)
        row.extend(traj.states[i])
        rows.append(row)
    _write_csv(
        out / "validate.csv",
        [f"seed = {seed}", f"T = {_fmt(cfg.T)}"],
        ["t"]
        + [f"pde_{_mode_column(K)}" for K in modes]
        + [f"reduced_{_mode_column(K)}" for K in modes],
        rows,
    )
    _write_json(
        out / "validate.json",
        {
            "schema_version": 1,
            "seed": seed,
            "T": cfg.T,
            "horizon": horizon,
            "max_deviation": max_dev,
            "amplitude_scale": scale,
            "relative_deviation": max_dev / scale,
        },
    )
    _say(
        quiet,
        f"validate: max |pde - reduced| = {max_dev:.3e} "
        f"({max_dev / scale:.2%} of the bifurcated amplitude)",
    )
    return 0


_COMMANDS = {
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chtransition",
        description="Transition analysis and spectral simulation of a "
        "conserved binary mixture with concentration-dependent mobility.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to the run configuration")
        sp.add_argument("--out", default="out", help="output directory (default: ./out)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.seed
    try:
        return args.func(cfg, out, seed, args.quiet)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
