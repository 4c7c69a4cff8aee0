"""Command line entry point.

    levymem <subcommand> --config run.yaml [--out DIR]
    levymem --check

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 acceptance failure.
"""

import argparse
import os
import sys
import time

from . import io
from .config import load
from .elliptic import EllipticOptions, solve_elliptic, verify_elliptic_estimates
from .errors import (BoundUnavailable, ConfigError, GridMismatchError, InadmissibleKernelError,
                     KernelDomainError, PicardNonConvergence, PotentialError, SolverError)
from .memory_fixed_point import MemoryProblem, PicardOptions, solve_memory, uniqueness_indicator
from .nonlocal_op import assemble, poincare_lower_bound
from .parabolic import energy_check, max_principle_check, solve_parabolic
from . import studies

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4


def _path(out, name):
    return os.path.join(out, name)


def run_solve_elliptic(cfg, out, dump_matrix=None):
    grid = cfg.build_grid()
    kernel = cfg.build_kernel()
    K = assemble(kernel, grid, cfg.build_quad())
    p = cfg.build_potential()
    f = cfg.build_forcing(grid)
    sol = solve_elliptic(K, p, f, EllipticOptions(tol=cfg.solver.elliptic_tol))
    v = sol.v.values
    files = [io.write_csv(_path(out, "solution.csv"), ("x", "v", "chi_v", "phi_v"),
                          io.solution_rows(grid, v, p.chi(v), p.phi(v)))]
    report = {"kernel": kernel.name, "potential": p.name, "n": grid.n,
              "residual": sol.residual, "newton_iters": sol.newton_iters, "J": sol.J_value,
              "e1_xi": sol.estimates.e1, "e2_chi_l2": sol.estimates.e2, "e3_phi_l2": sol.estimates.e3}
    try:
        C = poincare_lower_bound(kernel, grid, cfg.build_quad())
        est = verify_elliptic_estimates(sol, f, C)
        report.update({"poincare_C": C, "bound1": est.bounds[0], "bound2": est.bounds[1],
                       "bound3": est.bounds[2], "delta": est.delta,
                       "holds1": est.holds[0], "holds2": est.holds[1], "holds3": est.holds[2]})
    except BoundUnavailable as exc:
        report["poincare_C"] = f"unavailable ({exc})"
    files.append(io.write_report(_path(out, "estimates.txt"), report))
    if dump_matrix is not None:
        files.append(io.write_csv(_path(out, "matrix.csv"), ("i", "j", "value"),
                                  io.matrix_rows(K, dump_matrix)))
    return files


def run_solve_parabolic(cfg, out):
    grid = cfg.build_grid()
    K = assemble(cfg.build_kernel(), grid, cfg.build_quad())
    u0 = cfg.build_initial(grid)
    zeta = cfg.build_weight(grid)
    traj = solve_parabolic(K, zeta, u0, cfg.build_time(), cfg.solver.theta)
    files = [io.write_csv(_path(out, "trajectory.csv"), ("t", "x", "value"), io.trajectory_rows(traj)),
             io.write_csv(_path(out, "ledger.csv"), ("n", "half_l2_sq", "diss_xi", "diss_zeta"),
                          io.ledger_rows(traj))]
    report = {"theta": traj.theta, "steps": traj.tgrid.steps, "dt": traj.tgrid.dt,
              "max_principle": max_principle_check(traj)}
    if traj.theta == 1.0:
        en = energy_check(traj)
        report.update({"energy_holds": en.holds, "energy_max_violation": en.max_violation})
    files.append(io.write_report(_path(out, "report.txt"), report))
    return files


def run_solve_memory(cfg, out):
    grid = cfg.build_grid()
    kernel = cfg.build_kernel()
    quad = cfg.build_quad()
    prob = MemoryProblem(kernel, grid, cfg.build_potential(), cfg.build_initial(grid),
                         cfg.build_time(), quad, theta=cfg.solver.theta)
    s = cfg.solver
    opts = PicardOptions(tol=s.tol, max_iters=s.max_iters, damping=s.damping,
                         elliptic_tol=s.elliptic_tol)
    failure = None
    try:
        sol = solve_memory(prob, opts)
    except PicardNonConvergence as exc:
        failure, sol = exc, exc.solution
    rep = sol.report
    ind = uniqueness_indicator(prob)
    files = [
        io.write_csv(_path(out, "trajectory.csv"), ("t", "x", "value"), io.trajectory_rows(sol.trajectory)),
        io.write_csv(_path(out, "solution.csv"), ("x", "v", "u_T"),
                     zip(grid.x, sol.v.values, sol.u_T.values)),
        io.write_csv(_path(out, "residuals.csv"), ("k", "residual", "ratio"), io.residual_rows(rep)),
    ]
    report = {"kernel": kernel.name, "potential": prob.potential.name, "Lambda": ind["Lambda"],
              "kappa": ind["kappa"], "kappa_lambda_T2": ind["value"],
              "unique_regime": ind["unique_regime"], "converged": rep.converged,
              "iterations": rep.iterations, "evaluations": rep.evaluations,
              "ball_violations": rep.ball_violations,
              "final_residual": rep.residual_history[-1]}
    if sol.consistency is not None:
        report.update({"duhamel_residual": sol.consistency.duhamel_residual,
                       "v_vs_integral": sol.consistency.v_vs_integral})
    files.append(io.write_report(_path(out, "report.txt"), report))
    if failure is not None:
        raise SolverError(str(failure), stage="picard", diagnostics={"files": files})
    return files


def run_study_fracpoisson(cfg, out):
    rows = studies.study_fracpoisson(cfg.study.s_list, cfg.study.n_list, cfg.domain.a, cfg.domain.b,
                                     cfg.build_quad())
    return [io.write_csv(_path(out, "fracpoisson.csv"), studies.FRACPOISSON_HEADER,
                         ((r.s, r.n, r.err_l2, r.err_linf_interior, r.order) for r in rows))]


def run_study_kernel_limit(cfg, out):
    base = cfg.build_kernel(epsilon=None)
    rows = studies.study_kernel_limit(cfg.study.eps_list, cfg.build_grid(), cfg.build_time(), base,
                                      cfg.build_quad(), cfg.study.diffusivity,
                                      cfg.initial.amplitude, cfg.solver.theta)
    return [io.write_csv(_path(out, "kernel_limit.csv"), studies.KERNEL_LIMIT_HEADER,
                         ((r.eps, r.err_linf, r.err_l2) for r in rows))]


def run_study_threshold(cfg, out):
    grid = cfg.build_grid()
    s = cfg.solver
    opts = PicardOptions(tol=s.tol, max_iters=s.max_iters, damping=s.damping,
                         elliptic_tol=s.elliptic_tol)
    dt = cfg.time.T / cfg.time.steps
    rows = studies.study_threshold(cfg.study.T_list, cfg.build_potential(), cfg.build_initial(grid),
                                   cfg.build_kernel(), cfg.build_quad(), dt=dt, opts=opts)
    return [io.write_csv(_path(out, "threshold.csv"), studies.THRESHOLD_HEADER,
                         ((r.T, r.kappa, r.kLT2, r.converged, r.iters, r.last_ratio, r.duhamel_residual)
                          for r in rows))]


COMMANDS = {
    "solve-elliptic": run_solve_elliptic,
    "solve-parabolic": run_solve_parabolic,
    "solve-memory": run_solve_memory,
    "study-fracpoisson": run_study_fracpoisson,
    "study-kernel-limit": run_study_kernel_limit,
    "study-threshold": run_study_threshold,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="levymem", description=__doc__.split("\n\n")[0])
    ap.add_argument("--check", action="store_true", help="run the acceptance suite and exit")
    sub = ap.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML experiment file")
        sp.add_argument("--out", default=None, help="output directory (default: config 'output')")
        if name == "solve-elliptic":
            sp.add_argument("--dump-matrix", type=float, default=None, metavar="THRESH",
                            help="also write matrix.csv with entries |K_ij| > THRESH")
    return ap


def run_check(stream=sys.stdout):
    from .acceptance import run_all
    ok = True
    for res in run_all():
        print(res.line(), file=stream, flush=True)
        ok &= res.passed
    return EXIT_OK if ok else EXIT_CHECK


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.check:
        return run_check()
    if args.command is None:
        ap.print_help()
        return EXIT_CONFIG

    try:
        cfg = load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or cfg.output
    os.makedirs(out, exist_ok=True)
    kwargs = {}
    if args.command == "solve-elliptic":
        kwargs["dump_matrix"] = args.dump_matrix
    t0 = time.perf_counter()
    try:
        files = COMMANDS[args.command](cfg, out, **kwargs)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        files = exc.diagnostics.get("files", [])
        io.write_manifest(out, args.command, cfg.echo(), time.perf_counter() - t0,
                          [os.path.basename(f) for f in files])
        return EXIT_SOLVER
    except (KernelDomainError, InadmissibleKernelError, PotentialError, GridMismatchError) as exc:
        # kernel, potential or grid objects rejected the configured values
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    io.write_manifest(out, args.command, cfg.echo(), time.perf_counter() - t0,
                      [os.path.basename(f) for f in files])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
