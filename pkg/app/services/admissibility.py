"""
Standing hypotheses of the optimization problem

  condition on p₀:   0 ≤ p₀ < √(γ C_Ω) / 2
  condition on q₀:   ∫p̃ψ² + √((∫p̃ψ²)² + ∫q̃ψ² + γ‖ψ‖²_{H¹₀}) < √‖q₀‖_∞
  confinement:       V(λ, x) = q + 2λp < λ² on part of Ω

with C_Ω the first Dirichlet eigenvalue of the Laplacian, ψ its normalized
eigenfunction, and p̃, q̃ the bathtub maximizers against ψ².
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy import special

from app.core.exceptions import ArgumentError
from app.core.units import UNIT_NOTE
from app.models.schemas import AdmissibilitySummary
from app.services.field import Distribution, Field
from app.services.mesh import Mesh, dirichlet_energy, integrate
from app.services.nlep import GroundState, linear_ground_state
from app.services.rearrange import bathtub_max, similar_rearrangement

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdmissibilityReport:
    C_omega: float
    psi: Field = field(repr=False)
    cond_p_ok: bool
    cond_p_margin: float
    cond_q_ok: bool
    cond_q_lhs: float
    cond_q_rhs: float
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.cond_p_ok and self.cond_q_ok

    def summary(self) -> AdmissibilitySummary:
        return AdmissibilitySummary(
            C_omega=self.C_omega,
            cond_p_ok=self.cond_p_ok,
            cond_p_margin=self.cond_p_margin,
            cond_q_ok=self.cond_q_ok,
            cond_q_lhs=self.cond_q_lhs,
            cond_q_rhs=self.cond_q_rhs,
            notes=list(self.notes),
        )


class Confinement(NamedTuple):
    mask: Field
    measure: float


def poincare_constant(mesh: Mesh, tol: float = 1e-10) -> float:
    """Best Poincaré constant = smallest Dirichlet eigenvalue of -Δ"""
    mu, _ = linear_ground_state(mesh, np.zeros(mesh.n_cells), 1.0, tol)
    return mu


def laplacian_ground_mode(mesh: Mesh, tol: float = 1e-10) -> Field:
    """Positive, L²-normalized first Dirichlet eigenfunction"""
    _, psi = linear_ground_state(mesh, np.zeros(mesh.n_cells), 1.0, tol)
    return psi


def bessel_j0(x: float) -> float:
    return float(special.j0(x))


def bessel_j0_zero(k: int = 1) -> float:
    """k-th positive zero of J₀"""
    return float(special.jn_zeros(0, k)[k - 1])


def disk_ground_mode_analytic(mesh: Mesh) -> Field:
    """ψ(r) = J₀(j₀,₁ r/R) / (√π R |J₁(j₀,₁)|), normalized on the disk"""
    R = mesh.radius
    j01 = bessel_j0_zero(1)
    amplitude = 1.0 / (math.sqrt(math.pi) * R * abs(special.j1(j01)))
    return amplitude * special.j0(j01 * mesh.radii / R)


def check_condition_p(p_dist: Distribution, gamma: float, C_omega: float) -> Tuple[bool, float]:
    """(max p₀ < √(γ C_Ω)/2, margin)"""
    if not p_dist.is_nonnegative:
        raise ArgumentError("p₀ must be nonnegative")
    rhs = math.sqrt(gamma * C_omega) / 2.0
    margin = rhs - p_dist.max_value
    return margin > 0, margin


def check_condition_q(
    mesh: Mesh, p_dist: Distribution, q_dist: Distribution, psi: Field, gamma: float
) -> Tuple[bool, float, float]:
    """(lhs < rhs, lhs, rhs) for the condition on q₀"""
    if not q_dist.is_two_level:
        raise ArgumentError("condition on q₀ needs a two-level (characteristic) class")
    psi = mesh.check_field(psi, "psi")
    weight = psi * psi
    # p₀ need not be two-level; the similar rearrangement is the maximizer in general
    p_tilde = similar_rearrangement(mesh, p_dist, weight)
    q_tilde = bathtub_max(mesh, q_dist, weight)
    a = integrate(mesh, p_tilde * weight)
    lhs = a + math.sqrt(a * a + integrate(mesh, q_tilde * weight) + gamma * dirichlet_energy(mesh, psi))
    rhs = math.sqrt(q_dist.max_value)
    return lhs < rhs, lhs, rhs


def assess(mesh: Mesh, p_dist: Distribution, q_dist: Distribution, gamma: float, tol: float = 1e-10) -> AdmissibilityReport:
    """Evaluate both conditions with their supporting quantities"""
    C_omega = poincare_constant(mesh, tol)
    psi = laplacian_ground_mode(mesh, tol)
    p_ok, p_margin = check_condition_p(p_dist, gamma, C_omega)
    q_ok, lhs, rhs = check_condition_q(mesh, p_dist, q_dist, psi, gamma)

    notes = [UNIT_NOTE]
    if q_dist.max_value == 0 or q_dist.support_measure == 0:
        notes.append("degenerate q0: zero potential makes the condition on q0 unsatisfiable")
    if not p_ok:
        notes.append(f"condition on p0 violated: max p0 exceeds sqrt(gamma*C_omega)/2 by {-p_margin:.6g}")
    elif p_margin < 1e-3 * max(1.0, p_dist.max_value):
        notes.append(f"condition on p0 holds with a small margin {p_margin:.3e}")
    if not q_ok:
        notes.append(f"condition on q0 violated: lhs {lhs:.6g} >= rhs {rhs:.6g}")
    logger.info(f"Admissibility: C_omega={C_omega:.8g}, p ok={p_ok} (margin {p_margin:.4g}), q ok={q_ok} ({lhs:.6g} vs {rhs:.6g})")
    return AdmissibilityReport(
        C_omega=C_omega,
        psi=psi,
        cond_p_ok=p_ok,
        cond_p_margin=p_margin,
        cond_q_ok=q_ok,
        cond_q_lhs=lhs,
        cond_q_rhs=rhs,
        notes=notes,
    )


def potential_profile(mesh: Mesh, p, q, lam: float) -> Field:
    """V(λ, x) = q + 2λp"""
    return mesh.check_field(q, "q") + 2.0 * lam * mesh.check_field(p, "p")


def confinement_mask(mesh: Mesh, p, q, gs: GroundState) -> Confinement:
    """1 where V(λ, x) < λ², with the measure of that region"""
    V = potential_profile(mesh, p, q, gs.lam)
    mask = (V < gs.lambda_squared).astype(float)
    return Confinement(mask=mask, measure=integrate(mesh, mask))


def radial_potential_table(mesh: Mesh, V) -> List[Tuple[float, float, float]]:
    """Piecewise-constant radial profile as (r_from, r_to, value) rows over (r_from, r_to]"""
    mesh.require_disk()
    V = mesh.check_field(V, "V")
    n_rings = int(mesh.ring_index.max()) + 1
    h = mesh.radius / n_rings
    ring_values = np.zeros(n_rings)
    ring_values[mesh.ring_index] = V
    rows: List[Tuple[float, float, float]] = []
    start = 0
    for i in range(1, n_rings + 1):
        if i == n_rings or ring_values[i] != ring_values[start]:
            rows.append((start * h, i * h, float(ring_values[start])))
            start = i
    return rows
