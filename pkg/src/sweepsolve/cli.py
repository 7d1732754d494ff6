"""Command-line front end: run one problem, run a grid study, or run the circuit demo.

Exit codes: 0 success, 1 configuration error, 2 projection failure,
3 convergence regression (study errors not nonincreasing).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .circuits import build_circuit
from .config import (
    BuiltProblem,
    ProblemConfig,
    build_problem,
    load_problem,
    signal_to_dict,
)
from .diagnostics import convergence_study
from .errors import ProjectionFailure, SweepsolveError
from .lcs import complementarity_residual, recover_original

FMT = "{:.17g}"


def _fmt(value: float) -> str:
    return FMT.format(float(value))


def _atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def trajectory_csv(built: BuiltProblem, traj) -> str:
    """CSV text for one run: node rows with certificate data, plus multiplier
    estimates and complementarity residuals for LCS problems."""
    is_lcs = built.reformulation is not None
    if is_lcs:
        states = traj.nodes @ built.reformulation.R_inv.T
        _, zeta = recover_original(built.reformulation, traj)
        m = zeta.shape[1]
    else:
        states = traj.nodes
        zeta, m = None, 0
    d = states.shape[1]

    header = ["t"] + [f"x_{j + 1}" for j in range(d)]
    header += ["dist_residual", "cert_gap", "cert_eta", "pg_iters"]
    if is_lcs:
        header += [f"zeta_{j + 1}" for j in range(m)] + ["comp_residual"]

    lines = [",".join(header)]
    for k in range(traj.nodes.shape[0]):
        if k == 0:
            residual, gap, eta, iters = _initial_residual(built, traj), 0.0, \
                traj.schedule.eta, 0
        else:
            cert = traj.certificates[k - 1]
            residual, gap, eta, iters = cert.enlargement_residual, \
                cert.value_gap, cert.eta, cert.iterations
        row = [_fmt(traj.grid[k])]
        row += [_fmt(v) for v in states[k]]
        row += [_fmt(residual), _fmt(gap), _fmt(eta), str(iters)]
        if is_lcs:
            row += [_fmt(v) for v in zeta[k]]
            comp = complementarity_residual(built.system, states[k], zeta[k],
                                            float(traj.grid[k]))
            row.append(_fmt(comp))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _initial_residual(built: BuiltProblem, traj) -> float:
    from .sets import distance_bounds
    from .errors import UnsupportedKind
    try:
        return distance_bounds(built.problem.set_, 0.0, traj.nodes[0])[1]
    except UnsupportedKind:
        return 0.0


def _apply_global_overrides(config: ProblemConfig, args) -> ProblemConfig:
    if args.quadrature_subintervals is not None:
        config.solver["quadrature_subintervals"] = args.quadrature_subintervals
    if args.max_proj_iters is not None:
        config.solver["projection_max_iters"] = args.max_proj_iters
    if args.no_warm_start:
        config.solver["warm_start"] = False
    return config


def _figure_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def _run_and_write(built: BuiltProblem, out_path: str, plot: bool) -> int:
    traj = built.problem.run(built.config.n)
    text = trajectory_csv(built, traj)
    _atomic_write_text(out_path, text)
    print(f"wrote {traj.nodes.shape[0]} rows to {out_path}")
    if plot:
        from .plotting import render_run_figure
        if built.reformulation is not None:
            states = traj.nodes @ built.reformulation.R_inv.T
        else:
            states = traj.nodes
        figure = render_run_figure(traj.grid, states, _figure_path(out_path))
        print(f"wrote figure to {figure}")
    return 0


def cmd_run(args) -> int:
    config = _apply_global_overrides(load_problem(args.config), args)
    built = build_problem(config)
    return _run_and_write(built, args.out, args.plot)


def cmd_study(args) -> int:
    config = _apply_global_overrides(load_problem(args.config), args)
    n_list = [int(part) for part in args.n.split(",") if part.strip()]
    if not n_list:
        raise SweepsolveError("empty n list")
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])):
        from .errors import ConfigError
        raise ConfigError("study n list must be strictly ascending")
    if args.ref <= max(n_list):
        from .errors import ConfigError
        raise ConfigError("reference n must exceed every study n")
    built = build_problem(config)
    table = convergence_study(built.problem, n_list, args.ref)
    _atomic_write_text(args.out, table.to_csv_text())
    print(f"wrote study table ({len(table.rows)} rows) to {args.out}")
    if args.plot:
        from .plotting import render_study_figure
        figure = render_study_figure(table, _figure_path(args.out))
        print(f"wrote figure to {figure}")
    if not table.errors_nonincreasing():
        print("convergence regression: study errors are not nonincreasing",
              file=sys.stderr)
        return 3
    return 0


def circuit_problem_config(variant: str) -> ProblemConfig:
    """Built-in circuit demo: n=100 on [0,1], exponents (2.1, 1.05), x0 = 0."""
    system = build_circuit(variant=variant)
    return ProblemConfig(
        kind="lcs",
        horizon=1.0,
        initial_state=np.zeros(3),
        n=100,
        eps_exponent=2.1,
        eta_exponent=1.05,
        solver={"quadrature_subintervals": 8, "projection_max_iters": 100_000,
                "warm_start": True, "slack_fraction": None, "slack_seed": 0},
        system=system,
        input_spec=signal_to_dict(system.u),
    )


def cmd_demo_circuit(args) -> int:
    config = _apply_global_overrides(circuit_problem_config(args.variant), args)
    if args.variant == "discontinuous":
        print(
            "notice: discontinuous input drives a discontinuous moving set; "
            "this regime is outside the convergence theory (exploratory run, "
            "no bound checks asserted)",
            file=sys.stderr,
        )
    built = build_problem(config)
    return _run_and_write(built, args.out, args.plot)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweepsolve",
        description="Catching-up solver for sweeping processes with certified "
                    "inexact projections",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--quadrature-subintervals", type=int, metavar="K",
                        help="Simpson subintervals per drift integral")
    parser.add_argument("--max-proj-iters", type=int, metavar="K",
                        help="projected-gradient iteration cap per projection")
    parser.add_argument("--no-warm-start", action="store_true",
                        help="disable multiplier warm starts between steps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one problem file")
    p_run.add_argument("--config", required=True, help="problem file (JSON)")
    p_run.add_argument("--out", required=True, help="trajectory CSV path")
    p_run.add_argument("--plot", action="store_true",
                       help="also render a PNG figure next to the CSV")
    p_run.set_defaults(func=cmd_run)

    p_study = sub.add_parser("study", help="convergence study over grid sizes")
    p_study.add_argument("--config", required=True)
    p_study.add_argument("--n", required=True, metavar="N1,N2,...",
                         help="ascending comma-separated grid sizes")
    p_study.add_argument("--ref", required=True, type=int,
                         help="reference grid size (must exceed all study n)")
    p_study.add_argument("--out", required=True, help="study CSV path")
    p_study.add_argument("--plot", action="store_true")
    p_study.set_defaults(func=cmd_study)

    p_demo = sub.add_parser("demo-circuit", help="built-in ideal-diode circuit")
    p_demo.add_argument("--variant", choices=("smooth", "discontinuous"),
                        default="smooth")
    p_demo.add_argument("--out", required=True, help="trajectory CSV path")
    p_demo.add_argument("--plot", action="store_true")
    p_demo.set_defaults(func=cmd_demo_circuit)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProjectionFailure as exc:
        print(f"projection failure: {exc}", file=sys.stderr)
        return 2
    except SweepsolveError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
