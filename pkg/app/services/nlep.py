"""
Ground state of the λ-nonlinear Schrödinger problem

    -γΔu + q u + 2λ p u = λ² u   in Ω,   u = 0 on ∂Ω

solved as the root of g(λ) = μ₁(γL + q + 2λp) - λ², where μ₁ is the smallest
eigenvalue of the frozen linear operator. g(0) > 0 and g is concave, so the
positive root is unique; it coincides with the minimum of the Rayleigh
functional over the discrete space.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from app.core.config import Settings
from app.core.exceptions import ArgumentError, ConditionsViolatedError, SolverError
from app.models.schemas import GroundStateSummary
from app.services.field import Field
from app.services.mesh import Mesh, MeshKind, dirichlet_energy, integrate, l2_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    gamma: float = 0.4441
    eig_tol: float = 1e-10
    root_tol: float = 1e-9
    max_outer: int = 100
    max_inner: int = 5000
    dense_limit: int = 400
    strict_interval: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ArgumentError(f"gamma must be positive, got {self.gamma}")
        if not (self.eig_tol > 0 and self.root_tol > 0):
            raise ArgumentError("solver tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ArgumentError("iteration limits must be positive")

    @classmethod
    def from_settings(cls, settings: Settings, **overrides) -> "SolverOptions":
        values = dict(
            gamma=settings.gamma,
            eig_tol=settings.eig_tol,
            root_tol=settings.root_tol,
            max_outer=settings.max_outer,
            max_inner=settings.max_inner,
            dense_limit=settings.dense_limit,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class GroundState:
    lam: float
    u: Field = field(repr=False)
    residual: float
    linear_mu: float
    iterations: Dict[str, int]
    in_interval: bool
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def lambda_squared(self) -> float:
        return self.lam * self.lam

    def summary(self) -> GroundStateSummary:
        return GroundStateSummary(
            lambda_=self.lam,
            lambda_squared=self.lambda_squared,
            residual=self.residual,
            linear_mu=self.linear_mu,
            in_interval=self.in_interval,
            iterations=dict(self.iterations),
            diagnostics=dict(self.diagnostics),
        )


def _frozen_operator(mesh: Mesh, V: np.ndarray, gamma: float) -> sp.csr_matrix:
    return (gamma * mesh.symmetric_operator + sp.diags(V)).tocsr()


def linear_ground_state(
    mesh: Mesh,
    V,
    gamma: float,
    tol: float = 1e-10,
    max_inner: int = 5000,
    dense_limit: int = 400,
    warm_start: Optional[Field] = None,
) -> Tuple[float, Field]:
    """Smallest eigenpair of γL + diag(V) in the measure-weighted inner product

    Returns (μ₁, u) with ‖u‖ = 1 and u oriented to have positive mean.
    Radial disks use the exact tridiagonal solver, small meshes a dense
    solve, and larger ones shift-invert Lanczos below the spectrum,
    optionally warm-started.
    """
    V = mesh.check_field(V, "V")
    if not gamma > 0:
        raise ArgumentError(f"gamma must be positive, got {gamma}")
    if not np.all(np.isfinite(V)):
        raise ArgumentError("potential must be finite")

    S = _frozen_operator(mesh, V, gamma)
    sqrt_m = np.sqrt(mesh.cell_measures)
    if mesh.kind is MeshKind.DISK_RADIAL and mesh.n_cells > 1:
        w, vecs = eigh_tridiagonal(S.diagonal(), S.diagonal(1), select="i", select_range=(0, 0))
        mu, y = float(w[0]), vecs[:, 0]
    elif mesh.n_cells <= max(dense_limit, 2):
        w, vecs = eigh(S.toarray(), subset_by_index=[0, 0])
        mu, y = float(w[0]), vecs[:, 0]
    else:
        v0 = sqrt_m if warm_start is None else mesh.check_field(warm_start, "warm_start") * sqrt_m
        try:
            w, vecs = eigsh(S, k=1, sigma=float(V.min()), which="LM", v0=v0, tol=tol, maxiter=max_inner)
        except ArpackNoConvergence as e:
            last = float("nan")
            if len(e.eigenvalues):
                y_last = e.eigenvectors[:, 0]
                last = float(np.linalg.norm(S @ y_last - e.eigenvalues[0] * y_last))
            raise SolverError(f"eigensolver did not converge in {max_inner} iterations", last_residual=last) from e
        except ArpackError as e:
            raise SolverError(f"eigensolver failed: {e}") from e
        mu, y = float(w[0]), vecs[:, 0]

    y = y / np.linalg.norm(y)
    eig_residual = float(np.linalg.norm(S @ y - mu * y))
    scale = max(1.0, float(abs(S).sum(axis=1).max()))
    if not eig_residual <= tol * scale:
        raise SolverError(
            f"eigen residual {eig_residual:.3e} exceeds tolerance {tol * scale:.3e}",
            last_residual=eig_residual,
        )

    u = y / sqrt_m
    if integrate(mesh, u) < 0:
        u = -u
    return mu, u


def frozen_eigenpair(
    mesh: Mesh, p, q, lam: float, opts: SolverOptions, warm_start: Optional[Field] = None
) -> Tuple[float, Field]:
    """(μ₁, u) of the frozen operator γL + q + 2λp"""
    V = mesh.check_field(q, "q") + 2.0 * lam * mesh.check_field(p, "p")
    return linear_ground_state(
        mesh, V, opts.gamma, opts.eig_tol, opts.max_inner, opts.dense_limit, warm_start=warm_start
    )


def rayleigh_functional(mesh: Mesh, p, q, u, gamma: float, q_sup: Optional[float] = None) -> Optional[float]:
    """Closed-form Rayleigh functional; None when q_sup is given and the value leaves (0, √q_sup)"""
    u = mesh.check_field(u, "u")
    norm_sq = integrate(mesh, u * u)
    if norm_sq == 0:
        raise ArgumentError("Rayleigh functional is undefined for u = 0")
    pu = integrate(mesh, mesh.check_field(p, "p") * u * u)
    qu = integrate(mesh, mesh.check_field(q, "q") * u * u) + gamma * dirichlet_energy(mesh, u)
    value = (pu + math.sqrt(pu * pu + qu * norm_sq)) / norm_sq
    if q_sup is not None and value >= math.sqrt(q_sup):
        return None
    return value


def residual(mesh: Mesh, p, q, gs: GroundState, gamma: float) -> float:
    """‖λ²u - (γLu + qu + 2λpu)‖ in L²(Ω)"""
    u = mesh.check_field(gs.u, "u")
    p, q = mesh.check_field(p, "p"), mesh.check_field(q, "q")
    lam = gs.lam
    r = lam * lam * u - (gamma * mesh.laplacian(u) + q * u + 2.0 * lam * p * u)
    return l2_norm(mesh, r)


def level_set_fraction(u, atol: float = 1e-12) -> float:
    """Fraction of cells whose value is shared by another cell within atol"""
    s = np.sort(np.asarray(u, dtype=float))
    if s.size < 2:
        return 0.0
    close = np.diff(s) <= atol
    shared = np.zeros(s.size, dtype=bool)
    shared[:-1] |= close
    shared[1:] |= close
    return float(shared.mean())


def hellmann_feynman_slope(mesh: Mesh, p, u) -> float:
    """dμ₁/dλ = 2∫p u² for normalized u"""
    return 2.0 * integrate(mesh, mesh.check_field(p, "p") * u * u)


def solve_nonlinear(mesh: Mesh, p, q, opts: SolverOptions) -> GroundState:
    """Principal eigenpair (λ, u) of the quadratic problem

    Bisection on g(λ) until the bracket is 1e-3·√‖q‖_∞ wide, then Newton
    steps with the Hellmann–Feynman derivative, kept inside the bracket.
    """
    p, q = mesh.check_field(p, "p"), mesh.check_field(q, "q")
    if p.min() < 0 or q.min() < 0:
        raise ArgumentError("p and q must be nonnegative")

    p_sup, q_sup = float(p.max()), float(q.max())
    interval_end = math.sqrt(q_sup)
    counters = {"outer": 0, "inner": 0}
    cache: Dict[str, object] = {"u": None}

    def evaluate(lam: float) -> Tuple[float, float, Field]:
        counters["inner"] += 1
        mu, u = frozen_eigenpair(mesh, p, q, lam, opts, warm_start=cache["u"])
        cache["u"] = u
        g = mu - lam * lam
        logger.debug(f"g({lam:.12g}) = {g:.3e}")
        return g, mu, u

    lo = 0.0
    g_lo, _, _ = evaluate(lo)
    hi, g_hi = interval_end, float("inf")
    if interval_end > 0:
        g_hi, _, _ = evaluate(hi)
        if g_hi > 0:
            hi = 1.5 * interval_end
            g_hi, _, _ = evaluate(hi)
    if g_hi > 0:
        if opts.strict_interval:
            raise ConditionsViolatedError(
                f"g has no sign change on [0, {hi:.6g}]: admissibility conditions violated",
                last_residual=g_hi,
                context={"sqrt_q_sup": interval_end},
            )
        # μ₁(λ) ≤ g(0) + 2λ max p, so g(hi) ≤ 0 here
        hi = p_sup + math.sqrt(p_sup * p_sup + g_lo)
        g_hi, _, _ = evaluate(hi)
        if g_hi > opts.root_tol:
            raise SolverError(f"failed to bracket the root: g({hi:.6g}) = {g_hi:.3e}", last_residual=g_hi)

    width_target = 1e-3 * (interval_end if interval_end > 0 else hi)
    while hi - lo > width_target:
        counters["outer"] += 1
        if counters["outer"] > opts.max_outer:
            raise SolverError("bisection exceeded max_outer", last_residual=abs(g_hi), context=dict(counters))
        mid = 0.5 * (lo + hi)
        g_mid, _, _ = evaluate(mid)
        if g_mid > 0:
            lo = mid
        else:
            hi, g_hi = mid, g_mid

    lam, g = 0.5 * (lo + hi), g_hi
    while True:
        counters["outer"] += 1
        if counters["outer"] > opts.max_outer:
            raise SolverError("root iteration exceeded max_outer", last_residual=abs(g), context=dict(counters))
        g, mu, u = evaluate(lam)
        if abs(g) <= opts.root_tol:
            break
        if g > 0:
            lo = lam
        else:
            hi = lam
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            break
        slope = hellmann_feynman_slope(mesh, p, u) - 2.0 * lam
        step = lam - g / slope if slope < 0 else float("nan")
        lam = step if lo < step < hi else 0.5 * (lo + hi)

    in_interval = interval_end > 0 and 0 < lam < interval_end
    if not in_interval:
        logger.warning(f"root lambda={lam:.6g} lies outside J = (0, {interval_end:.6g})")

    gs = GroundState(lam=lam, u=u, residual=0.0, linear_mu=mu, iterations=dict(counters), in_interval=in_interval)
    diagnostics = {
        "g_at_root": g,
        "slope_at_root": hellmann_feynman_slope(mesh, p, u) - 2.0 * lam,
        "min_u": float(u.min()),
        "level_set_fraction": level_set_fraction(u),
    }
    gs = replace(gs, residual=residual(mesh, p, q, gs, opts.gamma), diagnostics=diagnostics)
    logger.info(f"Solved ground state: lambda={lam:.10g}, lambda^2={gs.lambda_squared:.10g}, residual={gs.residual:.2e}")
    return gs
