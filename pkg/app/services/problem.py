"""
Problem configs: JSON loading, unit conversion and realization on a mesh
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from pydantic import ValidationError

from app.core.config import Settings
from app.core.exceptions import ArgumentError, ConfigError
from app.core.units import gamma_from_mass, to_internal
from app.models.schemas import MeshConfig, PotentialSpec, ProblemConfig, Quantity
from app.services.field import Distribution, Field, distribution_of, make_annular_characteristic
from app.services.mesh import Mesh, build_disk_polar, build_disk_radial, build_rectangle
from app.services.nlep import SolverOptions
from app.services.rearrange import opposite_rearrangement, schwarz_increasing
from app.storage.artifacts import read_field_csv

logger = logging.getLogger(__name__)

# Disk quantum dot example: R = 2.4 nm, q₀ of height 2.13 on an outer annulus
# from r₁ = 2.13 nm, p₀ of height 0.27 on an outer annulus from r₂ = 2.26 nm.
DOT_RADIUS = 2.4
DOT_R1 = 2.13
DOT_R2 = 2.26
DOT_Q_HEIGHT = 2.13
DOT_P_HEIGHT = 0.27
DOT_GAMMA_SI = 7.114043325e-38
DOT_MASS_KG = 7.81638e-32
DOT_LAMBDA_SQUARED = 0.45
DOT_BAND = 0.10


@dataclass(frozen=True)
class Problem:
    config: ProblemConfig = field(repr=False)
    mesh: Mesh
    gamma: float
    p: Field = field(repr=False)
    q: Field = field(repr=False)
    p_dist: Distribution = field(repr=False)
    q_dist: Distribution = field(repr=False)
    opts: SolverOptions


def _format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        where = ".".join(str(x) for x in err.get("loc", ())) or "<document>"
        parts.append(f"{where}: {err.get('msg')}")
    return "; ".join(parts)


def parse_config(text: str, source: str = "<config>") -> ProblemConfig:
    try:
        return ProblemConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_format_validation_error(e)}") from e


def load_config(path: str) -> ProblemConfig:
    """Read and validate a JSON problem config"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, source=path)


def _length(q: Quantity, where: str) -> float:
    return to_internal(q.value, q.unit, "length", where)


def build_mesh(cfg: MeshConfig, resolution: Optional[int] = None) -> Mesh:
    """Mesh from its config; resolution overrides the radial (or per-side) cell count"""
    try:
        if cfg.kind == "disk_radial":
            return build_disk_radial(_length(cfg.radius, "mesh.radius"), resolution or cfg.n)
        if cfg.kind == "disk_polar":
            return build_disk_polar(_length(cfg.radius, "mesh.radius"), resolution or cfg.n_r, cfg.n_t)
        return build_rectangle(
            _length(cfg.a, "mesh.a"), _length(cfg.b, "mesh.b"), resolution or cfg.nx, resolution or cfg.ny
        )
    except ArgumentError as e:
        raise ConfigError(f"mesh: {e}") from e


def resolve_gamma(quantity: Optional[Quantity], settings: Settings) -> float:
    """γ in eV·nm² from an explicit value, an SI value, or a particle mass"""
    if quantity is None:
        return settings.gamma
    if quantity.unit == "kg":
        return gamma_from_mass(quantity.value)
    gamma = to_internal(quantity.value, quantity.unit, "gamma", "gamma")
    if gamma <= 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    return gamma


def build_potential(spec: PotentialSpec, mesh: Mesh, dimension: str, name: str) -> Tuple[Field, Distribution]:
    """Realize a potential spec as a field plus the rearrangement class it generates"""
    try:
        if spec.kind == "csv":
            values = read_field_csv(spec.path, mesh)
            dist = distribution_of(mesh, values)
        else:
            height = to_internal(spec.height.value, spec.height.unit, dimension, f"{name}.height")
            if spec.kind == "constant":
                values = np.full(mesh.n_cells, height)
                dist = distribution_of(mesh, values)
            elif spec.kind == "annulus":
                inner = _length(spec.inner_radius, f"{name}.inner_radius")
                outer = _length(spec.outer_radius, f"{name}.outer_radius")
                values = make_annular_characteristic(mesh, height, inner, outer)
                dist = distribution_of(mesh, values)
            else:
                area = to_internal(spec.area.value, spec.area.unit, "area", f"{name}.area")
                dist = Distribution.two_level(height, area, mesh.total_measure)
                values = _outward_placement(mesh, dist)
    except ArgumentError as e:
        raise ConfigError(f"{name}: {e}") from e

    if values.min() < 0:
        raise ConfigError(f"{name}: potentials must be nonnegative")
    return values, dist


def _outward_placement(mesh: Mesh, dist: Distribution) -> Field:
    if mesh.is_disk:
        return schwarz_increasing(mesh, dist)
    d = mesh.distance_from_center()
    return opposite_rearrangement(mesh, dist, d.max() - d)


def build_problem(
    cfg: ProblemConfig, settings: Settings, resolution: Optional[int] = None, tol: Optional[float] = None
) -> Problem:
    mesh = build_mesh(cfg.mesh, resolution)
    gamma = resolve_gamma(cfg.gamma, settings)
    p, p_dist = build_potential(cfg.p, mesh, "energy", "p")
    q, q_dist = build_potential(cfg.q, mesh, "energy^2", "q")
    try:
        opts = SolverOptions.from_settings(
            settings,
            gamma=gamma,
            eig_tol=cfg.solver.eig_tol,
            root_tol=tol or cfg.solver.root_tol,
            max_outer=cfg.solver.max_outer,
            max_inner=cfg.solver.max_inner,
            strict_interval=cfg.solver.strict_interval,
        )
    except ArgumentError as e:
        raise ConfigError(f"solver: {e}") from e
    logger.info(f"Built problem on {mesh.kind.value} mesh {mesh.resolution} with gamma={gamma:.6g} eV*nm^2")
    return Problem(config=cfg, mesh=mesh, gamma=gamma, p=p, q=q, p_dist=p_dist, q_dist=q_dist, opts=opts)


def disk_dot_config(resolution: int, gamma: float) -> ProblemConfig:
    """The disk quantum dot example, with both classes given by height and support area"""
    q_area = math.pi * (DOT_RADIUS ** 2 - DOT_R1 ** 2)
    p_area = math.pi * (DOT_RADIUS ** 2 - DOT_R2 ** 2)
    return ProblemConfig.model_validate(
        {
            "mesh": {"kind": "disk_radial", "radius": {"value": DOT_RADIUS, "unit": "nm"}, "n": resolution},
            "gamma": {"value": gamma, "unit": "eV*nm^2"},
            "p": {
                "kind": "two_level",
                "height": {"value": DOT_P_HEIGHT, "unit": "eV"},
                "area": {"value": p_area, "unit": "nm^2"},
            },
            "q": {
                "kind": "two_level",
                "height": {"value": DOT_Q_HEIGHT, "unit": "eV^2"},
                "area": {"value": q_area, "unit": "nm^2"},
            },
        }
    )
