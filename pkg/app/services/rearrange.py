"""
Rearrangement toolkit: bathtub extremizers, monotone rearrangements along a
weight, and Schwarz rearrangements on the disk

Every operator goes through one sort-and-assign kernel. Units (cells, or
whole rings for the Schwarz operators) are ordered by weight, ascending, with
ties broken by ascending index; each unit then receives the distribution value
whose cumulative-measure interval contains the unit's cumulative midpoint.
On non-uniform meshes this keeps outputs inside the value set of the class
at the cost of at most one unit measure of distribution error.
"""

import logging
import math

import numpy as np

from app.core.exceptions import ArgumentError
from app.services.field import Distribution, Field, distribution_of
from app.services.mesh import Mesh

logger = logging.getLogger(__name__)

# relative mismatch allowed between a class's total measure and |Ω|
TOTAL_MEASURE_RTOL = 1e-9


def _check_total(total: float, dist: Distribution) -> None:
    if abs(dist.total_measure - total) > TOTAL_MEASURE_RTOL * total:
        raise ArgumentError(
            f"distribution total measure {dist.total_measure:.12g} does not match the domain measure {total:.12g}"
        )


def _check_weight(mesh: Mesh, w) -> np.ndarray:
    w = mesh.check_field(w, "w")
    if w.size and w.min() < 0:
        raise ArgumentError("weight must be nonnegative")
    return w


def _assign(unit_measures: np.ndarray, dist: Distribution, order: np.ndarray, descending: bool) -> np.ndarray:
    """Give units, taken in `order`, the class values in descending (or ascending) order"""
    _check_total(math.fsum(unit_measures), dist)
    values, measures = dist.values, dist.measures
    if not descending:
        values, measures = values[::-1], measures[::-1]
    bounds = np.cumsum(measures)
    taken = unit_measures[order]
    midpoints = np.cumsum(taken) - 0.5 * taken
    idx = np.minimum(np.searchsorted(bounds, midpoints, side="right"), values.size - 1)
    out = np.empty(unit_measures.size)
    out[order] = values[idx]
    return out


def ascending_order(w: np.ndarray) -> np.ndarray:
    """Cells by weight ascending; equal weights keep ascending index"""
    return np.argsort(w, kind="stable")


def tied_cells(w) -> int:
    """Number of cells whose weight equals another cell's weight"""
    s = np.sort(np.asarray(w, dtype=float))
    if s.size < 2:
        return 0
    same = np.diff(s) == 0
    tied = np.zeros(s.size, dtype=bool)
    tied[:-1] |= same
    tied[1:] |= same
    return int(tied.sum())


def distribution_error(mesh: Mesh, f, dist: Distribution) -> float:
    """Largest superlevel-set measure difference between a field and a class"""
    df = distribution_of(mesh, f)
    levels = np.union1d(df.values, dist.values)
    return max(abs(df.measure_at_least(a) - dist.measure_at_least(a)) for a in levels)


def opposite_rearrangement(mesh: Mesh, dist: Distribution, w) -> Field:
    """η(w): the member of the class ordered opposite to w; minimizes ∫ f w"""
    w = _check_weight(mesh, w)
    return _assign(mesh.cell_measures, dist, ascending_order(w), descending=True)


def similar_rearrangement(mesh: Mesh, dist: Distribution, w) -> Field:
    """ξ(w): the member of the class ordered like w; maximizes ∫ f w"""
    w = _check_weight(mesh, w)
    return _assign(mesh.cell_measures, dist, ascending_order(w), descending=False)


def _require_two_level(dist: Distribution) -> None:
    if not dist.is_two_level:
        raise ArgumentError(f"bathtub operators need a two-level class β·χ_E, got values {dist.values.tolist()}")


def bathtub_min(mesh: Mesh, dist: Distribution, w) -> Field:
    """β on the cells of smallest weight, up to the support measure of the class"""
    _require_two_level(dist)
    return opposite_rearrangement(mesh, dist, w)


def bathtub_max(mesh: Mesh, dist: Distribution, w) -> Field:
    """β on the cells of largest weight, up to the support measure of the class"""
    _require_two_level(dist)
    return similar_rearrangement(mesh, dist, w)


def _schwarz(mesh: Mesh, dist: Distribution, increasing: bool) -> Field:
    mesh.require_disk()
    ring_measures = np.bincount(mesh.ring_index, weights=mesh.cell_measures)
    rings = np.arange(ring_measures.size)
    # largest values go to the outermost rings for the increasing rearrangement
    order = rings[::-1] if increasing else rings
    ring_values = _assign(ring_measures, dist, order, descending=True)
    return ring_values[mesh.ring_index]


def schwarz_increasing(mesh: Mesh, dist: Distribution) -> Field:
    """Radial, nondecreasing in r, with the given distribution"""
    return _schwarz(mesh, dist, increasing=True)


def schwarz_decreasing(mesh: Mesh, dist: Distribution) -> Field:
    """Radial, nonincreasing in r, with the given distribution"""
    return _schwarz(mesh, dist, increasing=False)
