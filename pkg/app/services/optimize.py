"""
Alternating minimization of the ground-state energy over two rearrangement classes

Each iteration freezes the current wave function u and moves both potentials
to their minimizing placements against u²: q by the bathtub principle (fill
the cells where u² is smallest) and p by the rearrangement ordered opposite
to u². Both moves lower the Rayleigh functional at fixed u, and re-solving
minimizes over u, so the energies never increase. The loop stops at a fixed
point, on a revisited placement (cycle), or after max_iters.

Alternating descent can stall at a self-consistent placement that is not the
minimum. When both classes are two-level on a uniform mesh and the number of
support placements is at most placement_limit, a stalled run is compared
against every placement and resumes from the best one if that is lower.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from app.core.exceptions import ArgumentError, CertificateError, SolverError
from app.models.schemas import CertificateSummary, OptimizationSummary
from app.services.admissibility import assess
from app.services.field import Distribution, Field, check_bounded, is_rearrangement, l1_distance
from app.services.mesh import Mesh
from app.services.nlep import GroundState, SolverOptions, rayleigh_functional, solve_nonlinear
from app.services.rearrange import (
    bathtub_min,
    distribution_error,
    opposite_rearrangement,
    schwarz_increasing,
    similar_rearrangement,
    tied_cells,
)

logger = logging.getLogger(__name__)

START_POLICIES = ("adversarial", "schwarz", "random", "custom")

# per-step slack before a step counts as an increase
MONOTONE_TOL = 1e-12

# most two-level support placements compared exhaustively when descent stalls
PLACEMENT_LIMIT = 4096


class DescentStep(NamedTuple):
    p: Field
    q: Field
    ground_state: GroundState
    # Rayleigh functional of the new placement at the previous u
    frozen_value: Optional[float] = None


@dataclass(frozen=True)
class FixedPointCertificate:
    passed: bool
    p_mismatch_cells: List[int] = field(default_factory=list)
    q_mismatch_cells: List[int] = field(default_factory=list)
    schwarz_gap_p: Optional[float] = None
    schwarz_gap_q: Optional[float] = None
    schwarz_bound_p: Optional[float] = None
    schwarz_bound_q: Optional[float] = None
    tied_cells: int = 0
    p_measure_error: float = 0.0
    q_measure_error: float = 0.0

    @property
    def schwarz_gap(self) -> Optional[float]:
        if self.schwarz_gap_p is None:
            return None
        return self.schwarz_gap_p + self.schwarz_gap_q

    @property
    def schwarz_ok(self) -> Optional[bool]:
        if self.schwarz_gap_p is None:
            return None
        return self.schwarz_gap_p <= self.schwarz_bound_p and self.schwarz_gap_q <= self.schwarz_bound_q

    def raise_for_failure(self) -> None:
        if not self.passed:
            raise CertificateError(
                f"fixed point not reproduced: p differs on cells {self.p_mismatch_cells}, "
                f"q differs on cells {self.q_mismatch_cells}",
                p_cells=self.p_mismatch_cells,
                q_cells=self.q_mismatch_cells,
            )

    def summary(self) -> CertificateSummary:
        return CertificateSummary(
            passed=self.passed,
            p_mismatch_cells=self.p_mismatch_cells,
            q_mismatch_cells=self.q_mismatch_cells,
            schwarz_gap=self.schwarz_gap,
            schwarz_gap_p=self.schwarz_gap_p,
            schwarz_gap_q=self.schwarz_gap_q,
            schwarz_bound_p=self.schwarz_bound_p,
            schwarz_bound_q=self.schwarz_bound_q,
            schwarz_ok=self.schwarz_ok,
            tied_cells=self.tied_cells,
            p_measure_error=self.p_measure_error,
            q_measure_error=self.q_measure_error,
        )


@dataclass(frozen=True)
class OptimizationReport:
    mesh: Mesh = field(repr=False)
    lambda_history: List[float]
    p_final: Field = field(repr=False)
    q_final: Field = field(repr=False)
    u_final: Field = field(repr=False)
    ground_state: GroundState = field(repr=False)
    iterations: int
    converged: bool
    fixed_point_gap: float
    monotone: bool
    cycled: bool = False
    best_index: int = 0
    schwarz_gap: Optional[float] = None
    certificate: Optional[FixedPointCertificate] = None
    snapshots: List[Tuple[int, Field, Field]] = field(default_factory=list, repr=False)
    notes: List[str] = field(default_factory=list)

    def summary(self) -> OptimizationSummary:
        return OptimizationSummary(
            mesh=self.mesh.describe(),
            lambda_history=list(self.lambda_history),
            lambda_final=self.ground_state.lam,
            lambda_squared_final=self.ground_state.lambda_squared,
            iterations=self.iterations,
            converged=self.converged,
            cycled=self.cycled,
            monotone=self.monotone,
            fixed_point_gap=self.fixed_point_gap,
            schwarz_gap=self.schwarz_gap,
            best_index=self.best_index,
            certificate=self.certificate.summary() if self.certificate else None,
            notes=list(self.notes),
        )


def decreasing_seed(mesh: Mesh) -> Field:
    """Nonnegative weight, largest at the center and decreasing outward"""
    d = mesh.distance_from_center()
    return d.max() - d


def initial_fields(
    mesh: Mesh,
    p_dist: Distribution,
    q_dist: Distribution,
    start: str = "adversarial",
    seed: Optional[int] = None,
    p_start: Optional[Field] = None,
    q_start: Optional[Field] = None,
) -> Tuple[Field, Field]:
    """Starting placement of both potentials"""
    if start == "adversarial":
        # the worst placement: both potentials piled onto the center
        w = decreasing_seed(mesh)
        return similar_rearrangement(mesh, p_dist, w), similar_rearrangement(mesh, q_dist, w)
    if start == "schwarz":
        if mesh.is_disk:
            return schwarz_increasing(mesh, p_dist), schwarz_increasing(mesh, q_dist)
        w = decreasing_seed(mesh)
        return opposite_rearrangement(mesh, p_dist, w), opposite_rearrangement(mesh, q_dist, w)
    if start == "random":
        rng = np.random.default_rng(seed)
        return (
            similar_rearrangement(mesh, p_dist, rng.random(mesh.n_cells)),
            similar_rearrangement(mesh, q_dist, rng.random(mesh.n_cells)),
        )
    if start == "custom":
        if p_start is None or q_start is None:
            raise ArgumentError("custom start needs both p_start and q_start")
        p = check_bounded(mesh, p_start, p_dist.max_value, "p_start")
        q = check_bounded(mesh, q_start, q_dist.max_value, "q_start")
        for name, f, dist in (("p", p, p_dist), ("q", q, q_dist)):
            member = similar_rearrangement(mesh, dist, np.maximum(f, 0.0))
            if not is_rearrangement(mesh, f, member, tol=1e-12, measure_tol=mesh.max_cell_measure):
                logger.warning(f"custom start for {name} is not a member of its rearrangement class")
        return p.copy(), q.copy()
    raise ArgumentError(f"unknown start policy '{start}', expected one of {START_POLICIES}")


def descent_step(
    mesh: Mesh, p_dist: Distribution, q_dist: Distribution, gs: GroundState, opts: SolverOptions
) -> DescentStep:
    """Move q then p to their minimizing placements against u², then re-solve"""
    weight = gs.u * gs.u
    q = bathtub_min(mesh, q_dist, weight)
    p = opposite_rearrangement(mesh, p_dist, weight)
    frozen_value = rayleigh_functional(mesh, p, q, gs.u, opts.gamma)
    logger.debug(f"Rayleigh functional at fixed u: {gs.lam:.14g} -> {frozen_value:.14g}")
    return DescentStep(p=p, q=q, ground_state=solve_nonlinear(mesh, p, q, opts), frozen_value=frozen_value)


def _support_cells(mesh: Mesh, dist: Distribution) -> Optional[int]:
    k = dist.support_measure / mesh.cell_measures[0]
    if abs(k - round(k)) > 1e-9:
        return None
    return int(round(k))


def placement_count(mesh: Mesh, p_dist: Distribution, q_dist: Distribution) -> Optional[int]:
    """Number of two-level support placements, or None when the classes cannot be enumerated cell by cell"""
    if not (p_dist.is_two_level and q_dist.is_two_level):
        return None
    if not np.all(mesh.cell_measures == mesh.cell_measures[0]):
        return None
    k_p, k_q = _support_cells(mesh, p_dist), _support_cells(mesh, q_dist)
    if k_p is None or k_q is None:
        return None
    return math.comb(mesh.n_cells, k_p) * math.comb(mesh.n_cells, k_q)


def search_placements(
    mesh: Mesh, p_dist: Distribution, q_dist: Distribution, opts: SolverOptions, limit: int = PLACEMENT_LIMIT
) -> Optional[DescentStep]:
    """Lowest-λ placement over every pair of supports; None for instances too large to enumerate"""
    count = placement_count(mesh, p_dist, q_dist)
    if count is None or count > limit:
        return None
    n = mesh.n_cells
    k_p, k_q = _support_cells(mesh, p_dist), _support_cells(mesh, q_dist)
    best: Optional[DescentStep] = None
    for p_support in combinations(range(n), k_p):
        p = np.zeros(n)
        p[list(p_support)] = p_dist.height
        for q_support in combinations(range(n), k_q):
            q = np.zeros(n)
            q[list(q_support)] = q_dist.height
            gs = solve_nonlinear(mesh, p, q, opts)
            if best is None or gs.lam < best.ground_state.lam:
                best = DescentStep(p=p, q=q, ground_state=gs)
    logger.info(f"Searched {count} placements: lowest lambda={best.ground_state.lam:.12g}")
    return best


def _schwarz_gaps(mesh: Mesh, p, q, p_dist: Distribution, q_dist: Distribution) -> Dict[str, float]:
    gap_p = l1_distance(mesh, p, schwarz_increasing(mesh, p_dist))
    gap_q = l1_distance(mesh, q, schwarz_increasing(mesh, q_dist))
    return {
        "gap_p": gap_p,
        "gap_q": gap_q,
        "bound_p": 2.0 * mesh.max_cell_measure * p_dist.max_value,
        "bound_q": 2.0 * mesh.max_cell_measure * q_dist.max_value,
    }


def certify_fixed_point(
    mesh: Mesh, report: OptimizationReport, p_dist: Distribution, q_dist: Distribution
) -> FixedPointCertificate:
    """Recompute both updates from u_final and compare with the reported fields cell by cell"""
    if not report.converged:
        raise ArgumentError("only converged reports can be certified")
    weight = report.u_final * report.u_final
    q_again = bathtub_min(mesh, q_dist, weight)
    p_again = opposite_rearrangement(mesh, p_dist, weight)
    p_cells = np.flatnonzero(p_again != report.p_final).tolist()
    q_cells = np.flatnonzero(q_again != report.q_final).tolist()

    gaps: Dict[str, Optional[float]] = {"gap_p": None, "gap_q": None, "bound_p": None, "bound_q": None}
    if mesh.is_disk:
        gaps.update(_schwarz_gaps(mesh, report.p_final, report.q_final, p_dist, q_dist))

    certificate = FixedPointCertificate(
        passed=not p_cells and not q_cells,
        p_mismatch_cells=p_cells,
        q_mismatch_cells=q_cells,
        schwarz_gap_p=gaps["gap_p"],
        schwarz_gap_q=gaps["gap_q"],
        schwarz_bound_p=gaps["bound_p"],
        schwarz_bound_q=gaps["bound_q"],
        tied_cells=tied_cells(weight),
        p_measure_error=distribution_error(mesh, report.p_final, p_dist),
        q_measure_error=distribution_error(mesh, report.q_final, q_dist),
    )
    if not certificate.passed:
        logger.warning(f"Fixed-point certificate failed: p cells {p_cells}, q cells {q_cells}")
    return certificate


def minimize_ground_state(
    mesh: Mesh,
    p_dist: Distribution,
    q_dist: Distribution,
    opts: SolverOptions,
    max_iters: int = 50,
    tol: float = 1e-10,
    start: str = "adversarial",
    seed: Optional[int] = None,
    p_start: Optional[Field] = None,
    q_start: Optional[Field] = None,
    check_conditions: bool = True,
    record_snapshots: bool = False,
    placement_limit: int = PLACEMENT_LIMIT,
) -> OptimizationReport:
    """Minimize λ over p in the class of p_dist and q in the class of q_dist

    placement_limit = 0 disables the exhaustive placement search.
    """
    if not q_dist.is_two_level:
        raise ArgumentError("q0 must be a nonnegative characteristic function (two-level class)")
    if not p_dist.is_nonnegative:
        raise ArgumentError("p0 must be nonnegative")
    if max_iters < 1:
        raise ArgumentError("max_iters must be positive")

    notes: List[str] = []
    if check_conditions:
        admissibility = assess(mesh, p_dist, q_dist, opts.gamma, opts.eig_tol)
        if not admissibility.ok:
            logger.warning("Admissibility conditions do not hold; optimizing anyway")
            notes.extend(admissibility.notes[1:])

    p, q = initial_fields(mesh, p_dist, q_dist, start, seed, p_start, q_start)
    try:
        gs = solve_nonlinear(mesh, p, q, opts)
    except SolverError as e:
        raise e.with_context(iteration=0, start=start)

    history = [gs.lam]
    snapshots = [(0, p, q)] if record_snapshots else []
    seen = {p.tobytes() + q.tobytes(): 0}
    best = (gs.lam, 0, p, q, gs)
    converged = cycled = searched = False
    monotone = True
    gap = float("inf")
    iteration = 0

    for iteration in range(1, max_iters + 1):
        try:
            step = descent_step(mesh, p_dist, q_dist, gs, opts)
        except SolverError as e:
            raise e.with_context(iteration=iteration, lambda_history=list(history))

        gap = l1_distance(mesh, step.p, p) + l1_distance(mesh, step.q, q)
        change = step.ground_state.lam - gs.lam
        if change > MONOTONE_TOL:
            monotone = False
            logger.warning(f"Iteration {iteration}: lambda increased by {change:.3e}")
        p, q, gs = step.p, step.q, step.ground_state
        history.append(gs.lam)
        if record_snapshots:
            snapshots.append((iteration, p, q))
        if gs.lam < best[0]:
            best = (gs.lam, iteration, p, q, gs)
        logger.info(f"Iteration {iteration}: lambda={gs.lam:.12g}, field change={gap:.3e}")

        key = p.tobytes() + q.tobytes()
        stalled = gap <= tol and abs(change) <= tol
        repeated = not stalled and key in seen
        if (stalled or repeated) and not searched:
            searched = True
            try:
                jump = search_placements(mesh, p_dist, q_dist, opts, placement_limit)
            except SolverError as e:
                raise e.with_context(iteration=iteration, lambda_history=list(history))
            if jump is not None and jump.ground_state.lam < gs.lam - tol:
                logger.info(f"Iteration {iteration}: restarting descent from the searched placement")
                notes.append(f"placement search lowered lambda from {gs.lam:.12g} to {jump.ground_state.lam:.12g}")
                p, q, gs = jump.p, jump.q, jump.ground_state
                best = (gs.lam, iteration, p, q, gs)
                seen = {p.tobytes() + q.tobytes(): iteration}
                continue
        if stalled:
            converged = True
            break
        if repeated:
            cycled = True
            logger.warning(f"Placement of iteration {iteration} repeats iteration {seen[key]}; stopping")
            break
        seen[key] = iteration

    if not converged:
        _, best_index, p, q, gs = best
        notes.append("cycle detected" if cycled else f"no fixed point after {max_iters} iterations")
    else:
        best_index = len(history) - 1

    schwarz_gap = None
    if mesh.is_disk:
        gaps = _schwarz_gaps(mesh, p, q, p_dist, q_dist)
        schwarz_gap = gaps["gap_p"] + gaps["gap_q"]

    report = OptimizationReport(
        mesh=mesh,
        lambda_history=history,
        p_final=p,
        q_final=q,
        u_final=gs.u,
        ground_state=gs,
        iterations=iteration,
        converged=converged,
        fixed_point_gap=gap,
        monotone=monotone,
        cycled=cycled,
        best_index=best_index,
        schwarz_gap=schwarz_gap,
        snapshots=snapshots,
        notes=notes,
    )
    if converged:
        report = replace(report, certificate=certify_fixed_point(mesh, report, p_dist, q_dist))
    logger.info(
        f"Optimization finished: converged={converged}, iterations={iteration}, "
        f"lambda^2={gs.lambda_squared:.10g}, schwarz_gap={schwarz_gap}"
    )
    return report

