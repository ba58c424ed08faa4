"""
Fields, distribution functions and the discrete "rearrangement of each other" test

A Field is a float array with one value per mesh cell. A Distribution is the
discrete identity of a rearrangement class: (value, measure) pairs sorted by
value, descending, with equal values merged.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from app.core.exceptions import ArgumentError
from app.services.mesh import Mesh

logger = logging.getLogger(__name__)

Field = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Distribution:
    values: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        measures = np.asarray(self.measures, dtype=float)
        if values.shape != measures.shape or values.ndim != 1 or values.size == 0:
            raise ArgumentError("distribution needs matching, non-empty value and measure lists")
        if np.any(measures <= 0):
            raise ArgumentError("distribution measures must be positive")
        if np.any(np.diff(values) >= 0):
            raise ArgumentError("distribution values must be strictly decreasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "measures", measures)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "Distribution":
        """Build from unordered pairs, merging equal values and dropping empty measures"""
        merged = {}
        for value, measure in pairs:
            if measure < 0:
                raise ArgumentError(f"negative measure {measure} for value {value}")
            if measure > 0:
                merged[float(value)] = merged.get(float(value), 0.0) + float(measure)
        if not merged:
            raise ArgumentError("distribution has no positive measure")
        ordered = sorted(merged.items(), key=lambda kv: -kv[0])
        return cls(np.array([v for v, _ in ordered]), np.array([m for _, m in ordered]))

    @classmethod
    def two_level(cls, height: float, support_measure: float, total_measure: float) -> "Distribution":
        """Class of height * χ_E with |E| = support_measure inside a domain of total_measure"""
        if height < 0:
            raise ArgumentError(f"height must be nonnegative, got {height}")
        if not 0 <= support_measure <= total_measure * (1 + 1e-12):
            raise ArgumentError(f"support measure {support_measure} outside [0, {total_measure}]")
        support_measure = min(support_measure, total_measure)
        return cls.from_pairs([(height, support_measure), (0.0, total_measure - support_measure)])

    @classmethod
    def constant(cls, value: float, total_measure: float) -> "Distribution":
        return cls.from_pairs([(value, total_measure)])

    @property
    def pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.values.tolist(), self.measures.tolist()))

    @property
    def total_measure(self) -> float:
        return math.fsum(self.measures)

    @property
    def max_value(self) -> float:
        return float(self.values[0])

    @property
    def min_value(self) -> float:
        return float(self.values[-1])

    @property
    def is_nonnegative(self) -> bool:
        return self.min_value >= 0

    @property
    def is_two_level(self) -> bool:
        """β χ_E with β ≥ 0; one level (empty or full support) counts"""
        if not self.is_nonnegative:
            return False
        if self.values.size == 1:
            return True
        return self.values.size == 2 and self.min_value == 0.0

    @property
    def height(self) -> float:
        return self.max_value

    @property
    def support_measure(self) -> float:
        """|{value > 0}|"""
        return math.fsum(self.measures[self.values > 0])

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.measures)

    def measure_at_least(self, level: float) -> float:
        """|{f ≥ level}|"""
        return math.fsum(self.measures[self.values >= level])


def distribution_of(mesh: Mesh, f) -> Distribution:
    """Exact multiset of (value, summed measure) for a field"""
    f = mesh.check_field(f, "f")
    values, inverse = np.unique(f, return_inverse=True)
    measures = np.bincount(inverse, weights=mesh.cell_measures, minlength=values.size)
    return Distribution(values[::-1].copy(), measures[::-1].copy())


def is_rearrangement(mesh: Mesh, f, g, tol: float = 1e-9, measure_tol: Optional[float] = None) -> bool:
    """True iff the superlevel-set measures of f and g agree up to tol in value and measure_tol in measure

    For every level α taken by either field, |{f ≥ α}| ≤ |{g ≥ α - tol}| + measure_tol and
    symmetrically; measure_tol defaults to tol.
    """
    measure_tol = tol if measure_tol is None else measure_tol
    df, dg = distribution_of(mesh, f), distribution_of(mesh, g)
    levels = np.union1d(df.values, dg.values)
    for alpha in levels:
        if df.measure_at_least(alpha) > dg.measure_at_least(alpha - tol) + measure_tol:
            return False
        if dg.measure_at_least(alpha) > df.measure_at_least(alpha - tol) + measure_tol:
            return False
    return True


def make_annular_characteristic(mesh: Mesh, height: float, inner_r: float, outer_r: float) -> Field:
    """height on cells with inner_r < r ≤ outer_r, zero elsewhere"""
    mesh.require_disk()
    if not 0 <= inner_r < outer_r <= mesh.radius * (1 + 1e-12):
        raise ArgumentError(f"need 0 <= inner_r < outer_r <= R, got ({inner_r}, {outer_r}) with R={mesh.radius}")
    r = mesh.radii
    return np.where((r > inner_r) & (r <= outer_r), float(height), 0.0)


def l1_distance(mesh: Mesh, f, g) -> float:
    """Measure-weighted L¹ distance"""
    f, g = mesh.check_field(f, "f"), mesh.check_field(g, "g")
    return math.fsum(np.abs(f - g) * mesh.cell_measures)


def check_bounded(mesh: Mesh, f, height: float, name: str = "potential") -> Field:
    """Reject potentials outside 0 ≤ f ≤ height"""
    f = mesh.check_field(f, name)
    if f.size and (f.min() < 0 or f.max() > height):
        raise ArgumentError(f"{name} must satisfy 0 <= {name} <= {height}, got range [{f.min()}, {f.max()}]")
    return f
