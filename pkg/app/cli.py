"""
Command-line front end

    qdot solve --config problem.json
    qdot optimize --config problem.json --start schwarz
    qdot check --config problem.json
    qdot schwarz --config problem.json
    qdot reproduce-paper --resolution 2048

Exit codes: 0 success, 1 conditions not satisfied (check), 2 solver error,
3 config error, 4 conditions violated without --force (optimize),
5 reproduction check failed.
"""

import argparse
import logging
import math
import os
import sys
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from app.core.config import Settings, get_settings
from app.core.exceptions import ArgumentError, ConfigError, SolverError
from app.core.logging_config import configure_logging
from app.core.units import UNIT_NOTE, gamma_from_mass, gamma_from_si
from app.services.admissibility import (
    AdmissibilityReport,
    assess,
    confinement_mask,
    disk_ground_mode_analytic,
    potential_profile,
    radial_potential_table,
)
from app.services.nlep import solve_nonlinear
from app.services.optimize import OptimizationReport, minimize_ground_state
from app.services.problem import (
    DOT_BAND,
    DOT_GAMMA_SI,
    DOT_LAMBDA_SQUARED,
    DOT_MASS_KG,
    DOT_R1,
    DOT_R2,
    Problem,
    build_problem,
    load_config,
    disk_dot_config,
)
from app.services.rearrange import schwarz_decreasing, schwarz_increasing
from app.storage.artifacts import ArtifactWriter, read_field_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONDITIONS = 1
EXIT_SOLVER = 2
EXIT_CONFIG = 3
EXIT_ADMISSIBILITY = 4
EXIT_REPRODUCTION = 5


def _problem(args: argparse.Namespace, settings: Settings) -> Problem:
    if not args.config:
        raise ConfigError("--config is required for this command")
    return build_problem(load_config(args.config), settings, args.resolution, args.tol)


def _print_admissibility(report: AdmissibilityReport) -> None:
    print(f"C_omega (Poincare constant): {report.C_omega:.10g} nm^-2")
    print(f"condition on p0: {'ok' if report.cond_p_ok else 'VIOLATED'} (margin {report.cond_p_margin:.6g})")
    print(
        f"condition on q0: {'ok' if report.cond_q_ok else 'VIOLATED'} "
        f"(lhs {report.cond_q_lhs:.6g} vs rhs {report.cond_q_rhs:.6g})"
    )
    for note in report.notes:
        print(f"note: {note}")


def _resolve_start(args: argparse.Namespace, problem: Problem) -> Tuple[str, Optional[np.ndarray], Optional[np.ndarray]]:
    start = args.start or problem.config.optimize.start
    if start.startswith("csv:"):
        folder = start[len("csv:"):]
        p = read_field_csv(os.path.join(folder, "p_final.csv"), problem.mesh)
        q = read_field_csv(os.path.join(folder, "q_final.csv"), problem.mesh)
        return "custom", p, q
    return start, None, None


def _write_report(writer: ArtifactWriter, report: OptimizationReport) -> None:
    mesh = report.mesh
    writer.write_json("report.json", report.summary())
    writer.write_field("p_final.csv", mesh, report.p_final)
    writer.write_field("q_final.csv", mesh, report.q_final)
    writer.write_field("u_final.csv", mesh, report.u_final)
    writer.write_series("lambda_history.csv", report.lambda_history, "lambda")
    if report.snapshots:
        rows = [
            (it, i, float(p[i]), float(q[i]))
            for it, p, q in report.snapshots
            for i in range(mesh.n_cells)
        ]
        writer.write_table("snapshots.csv", rows, ["iteration", "cell_index", "p", "q"])


def _print_report(report: OptimizationReport) -> None:
    gs = report.ground_state
    print(f"iterations: {report.iterations}, converged: {report.converged}, cycled: {report.cycled}")
    print(f"lambda = {gs.lam:.10g} eV, lambda^2 = {gs.lambda_squared:.10g} eV^2")
    print(f"monotone descent: {report.monotone}")
    if report.certificate is not None:
        cert = report.certificate
        if cert.passed:
            print("fixed-point certificate: passed")
        else:
            print(
                f"fixed-point certificate: FAILED (p differs on cells {cert.p_mismatch_cells}, "
                f"q differs on cells {cert.q_mismatch_cells})"
            )
        print(
            f"tied cells in u^2: {cert.tied_cells}, measure error p {cert.p_measure_error:.3g}, "
            f"q {cert.q_measure_error:.3g}"
        )
        if cert.schwarz_gap is not None:
            print(
                f"schwarz certificate: {'passed' if cert.schwarz_ok else 'FAILED'} "
                f"(gap p {cert.schwarz_gap_p:.4g} <= {cert.schwarz_bound_p:.4g}, "
                f"gap q {cert.schwarz_gap_q:.4g} <= {cert.schwarz_bound_q:.4g})"
            )
    for note in report.notes:
        print(f"note: {note}")


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    problem = _problem(args, settings)
    if problem.q_dist.is_two_level:
        admissibility = assess(problem.mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol)
        if not admissibility.ok:
            logger.warning("Admissibility conditions do not hold; solving anyway")
    gs = solve_nonlinear(problem.mesh, problem.p, problem.q, problem.opts)

    writer = ArtifactWriter(args.out_dir or settings.out_dir)
    writer.write_json("groundstate.json", gs.summary())
    writer.write_field("u.csv", problem.mesh, gs.u)
    print(f"lambda = {gs.lam:.10g} eV")
    print(f"lambda^2 = {gs.lambda_squared:.10g} eV^2")
    print(f"residual = {gs.residual:.3e}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace, settings: Settings) -> int:
    problem = _problem(args, settings)
    if not problem.q_dist.is_two_level:
        raise ConfigError("q: optimization needs a characteristic (two-level) q0")
    admissibility = assess(problem.mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol)
    _print_admissibility(admissibility)
    if not admissibility.ok and not args.force:
        print("admissibility conditions violated; rerun with --force to optimize anyway")
        return EXIT_ADMISSIBILITY

    start, p_start, q_start = _resolve_start(args, problem)
    opt_cfg = problem.config.optimize
    report = minimize_ground_state(
        problem.mesh,
        problem.p_dist,
        problem.q_dist,
        problem.opts,
        max_iters=opt_cfg.max_iters or settings.max_iters,
        tol=opt_cfg.tol or settings.fixed_point_tol,
        start=start,
        seed=args.seed if args.seed is not None else opt_cfg.seed,
        p_start=p_start,
        q_start=q_start,
        check_conditions=False,
        record_snapshots=args.snapshots,
    )
    _write_report(ArtifactWriter(args.out_dir or settings.out_dir), report)
    _print_report(report)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    problem = _problem(args, settings)
    if not problem.q_dist.is_two_level:
        raise ConfigError("q: the condition on q0 needs a characteristic (two-level) q0")
    report = assess(problem.mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol)
    _print_admissibility(report)

    writer = ArtifactWriter(args.out_dir or settings.out_dir)
    writer.write_json("admissibility.json", report.summary())
    writer.write_field("psi.csv", problem.mesh, report.psi)
    try:
        gs = solve_nonlinear(problem.mesh, problem.p, problem.q, problem.opts)
    except SolverError as e:
        logger.warning(f"Skipping confinement mask: {e}")
    else:
        confinement = confinement_mask(problem.mesh, problem.p, problem.q, gs)
        writer.write_field("confinement.csv", problem.mesh, confinement.mask)
        print(f"confined region measure: {confinement.measure:.6g} nm^2 (lambda^2 = {gs.lambda_squared:.6g})")
    return EXIT_OK if report.ok else EXIT_CONDITIONS


def cmd_schwarz(args: argparse.Namespace, settings: Settings) -> int:
    problem = _problem(args, settings)
    mesh = problem.mesh
    if not mesh.is_disk:
        raise ConfigError("mesh: Schwarz rearrangements need a disk mesh")
    writer = ArtifactWriter(args.out_dir or settings.out_dir)
    for name, dist in (("p", problem.p_dist), ("q", problem.q_dist)):
        writer.write_field(f"{name}_schwarz_increasing.csv", mesh, schwarz_increasing(mesh, dist))
        writer.write_field(f"{name}_schwarz_decreasing.csv", mesh, schwarz_decreasing(mesh, dist))
    print(f"wrote Schwarz rearrangements of p0 and q0 to {writer.out_dir}")
    return EXIT_OK


def _support_inner_radius(problem: Problem, f: np.ndarray) -> float:
    """Inner face of the outermost contiguous support of a radial field"""
    r = problem.mesh.radii
    h = problem.mesh.radius / problem.mesh.resolution[0]
    support = r[f > 0]
    return float(support.min() - h / 2) if support.size else math.nan


def cmd_reproduce_paper(args: argparse.Namespace, settings: Settings) -> int:
    resolution = args.resolution or settings.dot_resolution
    print(f"SI gamma = {DOT_GAMMA_SI:.10g} J*m^2 -> {gamma_from_si(DOT_GAMMA_SI):.6g} eV*nm^2")
    print(f"particle mass {DOT_MASS_KG:.6g} kg -> gamma = {gamma_from_mass(DOT_MASS_KG):.6g} eV*nm^2")
    print(f"internal gamma = {settings.gamma:.6g} eV*nm^2 ({UNIT_NOTE})")

    problem = build_problem(disk_dot_config(resolution, settings.gamma), settings, tol=args.tol)
    mesh = problem.mesh
    admissibility = assess(mesh, problem.p_dist, problem.q_dist, problem.gamma, problem.opts.eig_tol)
    _print_admissibility(admissibility)

    start, p_start, q_start = _resolve_start(args, problem)
    report = minimize_ground_state(
        mesh,
        problem.p_dist,
        problem.q_dist,
        problem.opts,
        max_iters=settings.max_iters,
        tol=settings.fixed_point_tol,
        start=start,
        seed=args.seed,
        p_start=p_start,
        q_start=q_start,
        check_conditions=False,
    )
    gs = report.ground_state
    V = potential_profile(mesh, report.p_final, report.q_final, gs.lam)
    confinement = confinement_mask(mesh, report.p_final, report.q_final, gs)

    writer = ArtifactWriter(args.out_dir or settings.out_dir)
    _write_report(writer, report)
    writer.write_table("potential_table.csv", radial_potential_table(mesh, V), ["r_from", "r_to", "V"])
    writer.write_frame(
        "radial_profile.csv",
        _radial_profile(mesh, V, gs.u, admissibility.psi, confinement.mask),
    )
    _print_report(report)

    h = mesh.radius / resolution
    r1 = _support_inner_radius(problem, report.q_final)
    r2 = _support_inner_radius(problem, report.p_final)
    low, high = DOT_LAMBDA_SQUARED * (1 - DOT_BAND), DOT_LAMBDA_SQUARED * (1 + DOT_BAND)
    q_support = report.q_final > 0
    checks = [
        ("lambda^2", gs.lambda_squared, f"[{low:.3f}, {high:.3f}]", low <= gs.lambda_squared <= high),
        ("condition p0", admissibility.cond_p_margin, "> 0", admissibility.cond_p_ok),
        ("condition q0", admissibility.cond_q_lhs, f"< {admissibility.cond_q_rhs:.6g}", admissibility.cond_q_ok),
        ("converged", report.converged, True, report.converged),
        ("monotone", report.monotone, True, report.monotone),
        ("r1", r1, DOT_R1, abs(r1 - DOT_R1) <= h),
        ("r2", r2, DOT_R2, abs(r2 - DOT_R2) <= h),
        (
            "schwarz certificate",
            report.certificate.schwarz_gap if report.certificate else None,
            "within bound",
            bool(report.certificate and report.certificate.passed and report.certificate.schwarz_ok),
        ),
        (
            "confinement",
            confinement.measure,
            "V < lambda^2 exactly off the q support",
            bool(np.all(confinement.mask[~q_support] == 1) and np.all(confinement.mask[q_support] == 0)),
        ),
    ]
    writer.write_table(
        "reproduction.csv",
        [(name, str(observed), str(expected), ok) for name, observed, expected, ok in checks],
        ["check", "observed", "expected", "ok"],
    )
    failed = [c for c in checks if not c[3]]
    print("piecewise potential V(r):")
    for r_from, r_to, value in radial_potential_table(mesh, V):
        print(f"  ({r_from:.4f}, {r_to:.4f}] nm: {value:.6g}")
    if failed:
        print("reproduction checks FAILED:")
        for name, observed, expected, _ in failed:
            print(f"  {name}: observed {observed}, expected {expected}")
        return EXIT_REPRODUCTION
    print("all reproduction checks passed")
    return EXIT_OK


def _radial_profile(mesh, V, u, psi, mask):
    return pd.DataFrame(
        {
            "r": mesh.radii,
            "V": V,
            "u": u,
            "psi": psi,
            "psi_bessel": disk_ground_mode_analytic(mesh),
            "confined": mask,
        }
    )


COMMANDS = {
    "solve": cmd_solve,
    "optimize": cmd_optimize,
    "check": cmd_check,
    "schwarz": cmd_schwarz,
    "reproduce-paper": cmd_reproduce_paper,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON problem config")
    common.add_argument("--out-dir", dest="out_dir", help="directory for reports and field CSVs")
    common.add_argument("--resolution", type=int, help="override the radial (or per-side) cell count")
    common.add_argument(
        "--start", help="start placement: adversarial | schwarz | random | csv:DIR (with p_final.csv, q_final.csv)"
    )
    common.add_argument("--force", action="store_true", help="optimize even if the conditions fail")
    common.add_argument("--seed", type=int, help="seed for the random start")
    common.add_argument("--tol", type=float, help="root tolerance for the nonlinear solve")
    common.add_argument("--snapshots", action="store_true", help="dump per-iteration p, q to snapshots.csv")

    parser = argparse.ArgumentParser(
        prog="qdot", description="Ground-state energy minimization over rearrangement classes of quantum dot potentials"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, settings)
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        logger.error(f"Solver error: {e} (last residual {e.last_residual}, context {e.context})")
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ArgumentError as e:
        logger.error(f"Invalid input: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
