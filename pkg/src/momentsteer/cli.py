"""Command-line front end.

``momentsteer CONFIG [--seed S] [--out DIR] [--nodes N] [--order n] [--check]``

Exit status: 0 success, 2 config error, 3 no feasible start, 4 infeasible
control, 5 realization failure, 6 moment/entropy diagnostics failure,
7 sampling failure, 1 anything else raised by the library.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import realizer
from .config import load_config
from .engine import initial_ensemble, run_density_steering, run_occupation_steering
from .errors import ConfigError, SteeringError
from .maxent import error_report
from .moments import moments_of_density, moments_of_samples
from .planner import derive_plan

log = logging.getLogger("momentsteer")

#: bump when a column layout changes
CSV_SCHEMA = "momentsteer-csv-1"


def _write_table(path, header, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def _moment_header(order):
    return ["k"] + [f"m{l}" for l in range(1, 2 * order + 1)]


def _write_moments(path, seqs, order):
    rows = [[k, *s.values] for k, s in enumerate(seqs)]
    _write_table(path, _moment_header(order), rows)


def _fmt(values):
    return "[" + ", ".join(format(v, ".6g") for v in values) + "]"


def _plan_only(cfg):
    sched = cfg.schedule()
    x_T = moments_of_density(cfg.terminal, cfg.order)
    if cfg.mode == "density":
        x0 = moments_of_density(cfg.initial, cfg.order)
    else:
        init = cfg.load_initial_samples() if cfg.initial_samples else cfg.initial
        x0 = moments_of_samples(initial_ensemble(init, cfg.agents, cfg.master_seed).states,
                                cfg.order)
    return derive_plan(x0, x_T, sched), x_T


def _report_moments(lines, label, got, want):
    rel = np.abs(got - want) / np.maximum(np.abs(want), 1e-300)
    lines.append(f"{label} = {_fmt(got)}")
    lines.append(f"{label}_relative_error = {_fmt(rel)}")


def run(cfg, out_dir, check=False, workers=1):
    """Execute *cfg*, writing artifacts into *out_dir*. Returns the report lines."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = cfg.order
    lines = [f"schema = {CSV_SCHEMA}", f"mode = {cfg.mode}", f"order = {n}",
             f"horizon = {cfg.horizon}", f"master_seed = {cfg.master_seed}"]

    if check:
        plan, x_T = _plan_only(cfg)
        run_, ens = None, None
    elif cfg.mode == "density":
        run_ = run_density_steering(cfg.initial, cfg.terminal, cfg.schedule(), cfg.constraint,
                                    node_count=cfg.nodes, heavy_tail=cfg.heavy_tail, tol=cfg.tol)
        plan, x_T, ens = run_.plan, run_.target_moments, None
    else:
        init = cfg.load_initial_samples() if cfg.initial_samples else cfg.initial
        run_, ens = run_occupation_steering(
            init, cfg.terminal, cfg.schedule(), cfg.constraint, rng_master=cfg.master_seed,
            n_agents=cfg.agents, node_count=cfg.nodes, heavy_tail=cfg.heavy_tail,
            keep_history=cfg.history, workers=workers, tol=cfg.tol,
        )
        plan, x_T = run_.plan, run_.target_moments

    lines.append(f"k0 = {plan.k0}")
    lines.append(f"coefficients = {_fmt(run_.schedule.coeffs if run_ else cfg.schedule().coeffs)}")
    _write_moments(out / "moments_states.csv", plan.states, n)
    _write_moments(out / "moments_controls.csv", plan.all_controls(), n)
    lines.append(f"desired_moments = {_fmt(x_T.values)}")
    _report_moments(lines, "planned_terminal_moments", plan.states[-1].values, x_T.values)
    if check:
        lines.append("check = plan only, controls not realized")
        return lines

    for k in range(plan.k0, plan.horizon):
        p = run_.realized_at(k)
        _write_table(out / f"control_density_{k}.csv", ["u", "p"], realizer.density_table(p, cfg.nodes))
        lines.append(f"control_{k}_newton_iterations = {p.iterations}")

    if ens is not None:
        if ens.history is not None:
            for snap in ens.history:
                _write_table(out / f"agents_{snap.step}.csv", ["x"], snap.states[:, None])
                _write_table(out / f"controls_{snap.step}.csv", ["u"], snap.controls[:, None])
            _write_table(out / f"agents_{ens.step}.csv", ["x"], ens.states[:, None])
            states = [s.states for s in ens.history] + [ens.states]
            _write_moments(out / "moments_empirical.csv",
                           [moments_of_samples(s, n) for s in states], n)
        lines.append(f"agents = {ens.size}")
        _report_moments(lines, "terminal_empirical_moments", ens.moments(n).values, x_T.values)
        lines.append(f"rejection_constants = {_fmt(run_.rejection_constants)}")
        terminal = ens.states
    else:
        terminal = None

    try:
        if terminal is None:
            # the terminal density of a density-mode run has no closed form;
            # report the desired-vs-max-entropy leg only
            rep = error_report(cfg.terminal, cfg.terminal, n)
            lines += [f"H_maxent = {rep.H_maxent:.17g}", f"H_desired = {rep.H_desired:.17g}",
                      f"KL_desired = {rep.KL_desired:.17g}"]
        else:
            lines += error_report(terminal, cfg.terminal, n).lines()
    except SteeringError as exc:
        lines.append(f"error_bound = unavailable ({type(exc).__name__}: {exc})")
    return lines


def build_parser():
    ap = argparse.ArgumentParser(
        prog="momentsteer",
        description="Steer an agent ensemble between distributions through its power moments.",
    )
    ap.add_argument("config", help="TOML run configuration")
    ap.add_argument("--seed", type=int, help="override master_seed")
    ap.add_argument("--out", help="output directory (default: config 'output' or runs/<name>)")
    ap.add_argument("--nodes", type=int, help="override the quadrature node count")
    ap.add_argument("--order", type=int, help="override the moment order n")
    ap.add_argument("--check", action="store_true", help="plan only, without realizing controls")
    ap.add_argument("--workers", type=int, default=1, help="sampling threads (default 1)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(master_seed=args.seed, nodes=args.nodes, order=args.order)
        if cfg.nodes < 64 or cfg.order < 1:
            raise ConfigError("--nodes must be >= 64 and --order >= 1")
        out = args.out or cfg.output or str(Path("runs") / Path(args.config).stem)
        lines = run(cfg, out, check=args.check, workers=args.workers)
    except SteeringError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    Path(out, "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
