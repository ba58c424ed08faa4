"""
Discretized domains with cell measures and a symmetric Dirichlet Laplacian

Every grid is cell centered, so r = 0 is never a node. The operator is stored
as the symmetric stiffness matrix K = M L (M = diag(cell measures)), which
makes L self-adjoint in the measure-weighted inner product and gives the
discrete gradient energy as <u, L u>_M = u . K u.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import ArgumentError
from app.models.schemas import MeshDescription

logger = logging.getLogger(__name__)

MIN_CELLS = 8


class MeshKind(str, Enum):
    DISK_RADIAL = "disk_radial"
    DISK_POLAR = "disk_polar"
    RECTANGLE = "rectangle"


@dataclass(frozen=True)
class Mesh:
    """Immutable cell-centered grid; safe to share between threads"""

    kind: MeshKind
    cell_centers: np.ndarray = field(repr=False)
    cell_measures: np.ndarray = field(repr=False)
    geometry: Dict[str, float]
    resolution: Tuple[int, ...]
    stiffness: sp.csr_matrix = field(repr=False)
    ring_index: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_cells(self) -> int:
        return int(self.cell_measures.size)

    @property
    def is_disk(self) -> bool:
        return self.kind in (MeshKind.DISK_RADIAL, MeshKind.DISK_POLAR)

    @property
    def area(self) -> float:
        """Analytic |Ω|"""
        if self.is_disk:
            return math.pi * self.geometry["radius"] ** 2
        return self.geometry["a"] * self.geometry["b"]

    @property
    def radius(self) -> float:
        self.require_disk()
        return self.geometry["radius"]

    @property
    def radii(self) -> np.ndarray:
        self.require_disk()
        return self.cell_centers[:, 0]

    @property
    def max_cell_measure(self) -> float:
        return float(self.cell_measures.max())

    @property
    def total_measure(self) -> float:
        return math.fsum(self.cell_measures)

    @cached_property
    def symmetric_operator(self) -> sp.csr_matrix:
        """M^{-1/2} K M^{-1/2}: the Laplacian in the Euclidean frame y = M^{1/2} u"""
        scale = sp.diags(1.0 / np.sqrt(self.cell_measures))
        return (scale @ self.stiffness @ scale).tocsr()

    def require_disk(self) -> None:
        if not self.is_disk:
            raise ArgumentError(f"operation needs a disk mesh, got {self.kind.value}")

    def check_field(self, values, name: str = "field") -> np.ndarray:
        """Return values as a float array, rejecting length mismatches"""
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size != self.n_cells:
            raise ArgumentError(f"{name} has shape {arr.shape}, mesh has {self.n_cells} cells")
        return arr

    def laplacian(self, u) -> np.ndarray:
        """Apply the negative Dirichlet Laplacian L = M^{-1} K"""
        u = self.check_field(u, "u")
        return (self.stiffness @ u) / self.cell_measures

    def distance_from_center(self) -> np.ndarray:
        if self.is_disk:
            return self.cell_centers[:, 0].copy()
        a, b = self.geometry["a"], self.geometry["b"]
        return np.hypot(self.cell_centers[:, 0] - a / 2, self.cell_centers[:, 1] - b / 2)

    def describe(self) -> MeshDescription:
        return MeshDescription(kind=self.kind.value, geometry=dict(self.geometry), resolution=list(self.resolution))


def _check_length(value: float, name: str) -> float:
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
        raise ArgumentError(f"{name} must be a positive finite length, got {value!r}")
    return float(value)


def _check_count(value: int, name: str, allow_coarse: bool) -> int:
    floor = 1 if allow_coarse else MIN_CELLS
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < floor:
        raise ArgumentError(f"{name} must be an integer >= {floor}, got {value!r}")
    return int(value)


def _assemble(n: int, left: np.ndarray, right: np.ndarray, coupling: np.ndarray, boundary: np.ndarray) -> sp.csr_matrix:
    """Symmetric stiffness from edge couplings plus Dirichlet boundary terms on the diagonal"""
    diag = boundary.copy()
    np.add.at(diag, left, coupling)
    np.add.at(diag, right, coupling)
    rows = np.concatenate([left, right, np.arange(n)])
    cols = np.concatenate([right, left, np.arange(n)])
    data = np.concatenate([-coupling, -coupling, diag])
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def build_disk_radial(R: float, n: int, allow_coarse: bool = False) -> Mesh:
    """Radial grid for radially symmetric fields on the disk of radius R"""
    R = _check_length(R, "R")
    n = _check_count(n, "n", allow_coarse)
    h = R / n
    r = (np.arange(n) + 0.5) * h
    measures = 2.0 * math.pi * r * h

    faces = np.arange(1, n) * h
    coupling = 2.0 * math.pi * faces / h
    boundary = np.zeros(n)
    # ghost cell u(R + h/2) = -u(R - h/2)
    boundary[-1] = 2.0 * math.pi * R * 2.0 / h
    stiffness = _assemble(n, np.arange(n - 1), np.arange(1, n), coupling, boundary)

    centers = np.column_stack([r, np.zeros(n)])
    logger.debug(f"Built disk_radial mesh R={R} n={n}")
    return Mesh(
        kind=MeshKind.DISK_RADIAL,
        cell_centers=centers,
        cell_measures=measures,
        geometry={"radius": R},
        resolution=(n,),
        stiffness=stiffness,
        ring_index=np.arange(n),
    )


def build_disk_polar(R: float, n_r: int, n_t: int, allow_coarse: bool = False) -> Mesh:
    """Tensor (r, θ) grid, periodic in θ; cell (i, j) has index i * n_t + j"""
    R = _check_length(R, "R")
    n_r = _check_count(n_r, "n_r", allow_coarse)
    n_t = _check_count(n_t, "n_t", allow_coarse)
    if n_t < 3:
        raise ArgumentError(f"n_t must be at least 3 for a periodic stencil, got {n_t}")
    h = R / n_r
    dt = 2.0 * math.pi / n_t
    r = (np.arange(n_r) + 0.5) * h
    theta = (np.arange(n_t) + 0.5) * dt
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    index = np.arange(n_r * n_t).reshape(n_r, n_t)
    measures = (rr * h * dt).ravel()

    radial_left = index[:-1, :].ravel()
    radial_right = index[1:, :].ravel()
    faces = np.arange(1, n_r) * h
    radial_coupling = np.repeat(faces * dt / h, n_t)

    angular_left = index.ravel()
    angular_right = np.roll(index, -1, axis=1).ravel()
    angular_coupling = (h / (rr * dt)).ravel()

    boundary = np.zeros(n_r * n_t)
    boundary[index[-1, :]] = R * dt * 2.0 / h

    stiffness = _assemble(
        n_r * n_t,
        np.concatenate([radial_left, angular_left]),
        np.concatenate([radial_right, angular_right]),
        np.concatenate([radial_coupling, angular_coupling]),
        boundary,
    )
    centers = np.column_stack([rr.ravel(), tt.ravel()])
    logger.debug(f"Built disk_polar mesh R={R} n_r={n_r} n_t={n_t}")
    return Mesh(
        kind=MeshKind.DISK_POLAR,
        cell_centers=centers,
        cell_measures=measures,
        geometry={"radius": R},
        resolution=(n_r, n_t),
        stiffness=stiffness,
        ring_index=np.repeat(np.arange(n_r), n_t),
    )


def build_rectangle(a: float, b: float, nx: int, ny: int, allow_coarse: bool = False) -> Mesh:
    """Cell-centered 5-point grid on [0, a] x [0, b]; cell (i, j) has index i * ny + j"""
    a = _check_length(a, "a")
    b = _check_length(b, "b")
    nx = _check_count(nx, "nx", allow_coarse)
    ny = _check_count(ny, "ny", allow_coarse)
    dx, dy = a / nx, b / ny
    x = (np.arange(nx) + 0.5) * dx
    y = (np.arange(ny) + 0.5) * dy
    xx, yy = np.meshgrid(x, y, indexing="ij")
    index = np.arange(nx * ny).reshape(nx, ny)
    measures = np.full(nx * ny, dx * dy)

    x_left, x_right = index[:-1, :].ravel(), index[1:, :].ravel()
    y_left, y_right = index[:, :-1].ravel(), index[:, 1:].ravel()
    coupling = np.concatenate([np.full(x_left.size, dy / dx), np.full(y_left.size, dx / dy)])

    boundary = np.zeros(nx * ny)
    np.add.at(boundary, index[0, :], 2.0 * dy / dx)
    np.add.at(boundary, index[-1, :], 2.0 * dy / dx)
    np.add.at(boundary, index[:, 0], 2.0 * dx / dy)
    np.add.at(boundary, index[:, -1], 2.0 * dx / dy)

    stiffness = _assemble(
        nx * ny,
        np.concatenate([x_left, y_left]),
        np.concatenate([x_right, y_right]),
        coupling,
        boundary,
    )
    centers = np.column_stack([xx.ravel(), yy.ravel()])
    logger.debug(f"Built rectangle mesh {a}x{b} with {nx}x{ny} cells")
    return Mesh(
        kind=MeshKind.RECTANGLE,
        cell_centers=centers,
        cell_measures=measures,
        geometry={"a": a, "b": b},
        resolution=(nx, ny),
        stiffness=stiffness,
    )


def integrate(mesh: Mesh, f) -> float:
    """Σ f_i |cell_i|, correctly rounded so the result does not depend on summation order"""
    f = mesh.check_field(f, "f")
    return math.fsum(f * mesh.cell_measures)


def dirichlet_energy(mesh: Mesh, u) -> float:
    """Discrete ‖∇u‖² = <u, L u>_M"""
    u = mesh.check_field(u, "u")
    return math.fsum(u * (mesh.stiffness @ u))


def l2_norm(mesh: Mesh, f) -> float:
    f = mesh.check_field(f, "f")
    return math.sqrt(math.fsum(f * f * mesh.cell_measures))
