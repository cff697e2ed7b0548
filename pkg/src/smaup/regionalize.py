"""Random contiguous aggregation of areas into regions, plus mean aggregation.

Regions are produced by seed-based growing: k seed areas are drawn uniformly
without replacement, then regions repeatedly claim a random unassigned
neighbor until every area is assigned. Each region is contiguous by
construction. Aggregation uses the unweighted mean of member areas.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContiguityError,
    CorruptPartitionError,
    InvalidKError,
    ShapeMismatchError,
)
from .sar import AreaVariable
from .weights import SpatialWeights, is_connected

__all__ = [
    "Regionalization",
    "AggregatedVariable",
    "random_regions",
    "aggregate_mean",
    "validate_regionalization",
    "regionalization_to_csv",
    "regionalization_from_csv",
]


@dataclass(frozen=True)
class Regionalization:
    """A partition of n areas into k labeled regions.

    ``assignment[i]`` is the region label of area i, in [0, k). Labels must
    all be used; contiguity is checked against a weights object by
    :func:`validate_regionalization`.
    """

    assignment: np.ndarray
    k: int

    def __post_init__(self):
        arr = np.asarray(self.assignment, dtype=np.int64)
        if arr.ndim != 1:
            raise CorruptPartitionError(f"assignment must be 1-D, got shape {arr.shape}")
        if self.k < 1:
            raise InvalidKError(f"k must be >= 1, got {self.k}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.k):
            raise CorruptPartitionError(
                f"labels must lie in [0, {self.k}), got range "
                f"[{arr.min()}, {arr.max()}]"
            )
        if np.unique(arr).size != self.k:
            raise CorruptPartitionError("every region label in [0, k) must appear at least once")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "assignment", arr)

    def __eq__(self, other):
        if not isinstance(other, Regionalization):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignment, other.assignment)

    @property
    def n(self) -> int:
        return self.assignment.shape[0]


@dataclass(frozen=True)
class AggregatedVariable:
    """Per-region means and sizes produced by aggregating an area variable."""

    region_means: np.ndarray
    region_sizes: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.region_means, dtype=np.float64)
        sizes = np.asarray(self.region_sizes, dtype=np.int64)
        if means.shape != sizes.shape or means.ndim != 1:
            raise CorruptPartitionError("region_means and region_sizes must be aligned 1-D vectors")
        if np.any(sizes < 1):
            raise CorruptPartitionError("every region must contain at least one area")
        if not np.all(np.isfinite(means)):
            raise CorruptPartitionError("region means must be finite")
        means = means.copy()
        means.flags.writeable = False
        sizes = sizes.copy()
        sizes.flags.writeable = False
        object.__setattr__(self, "region_means", means)
        object.__setattr__(self, "region_sizes", sizes)

    def __eq__(self, other):
        if not isinstance(other, AggregatedVariable):
            return NotImplemented
        return np.array_equal(self.region_means, other.region_means) and np.array_equal(
            self.region_sizes, other.region_sizes
        )

    @property
    def k(self) -> int:
        return self.region_means.shape[0]


def random_regions(w: SpatialWeights, k: int, seed: int = 0) -> Regionalization:
    """Aggregate the n areas of ``w`` into k contiguous regions at random.

    k seed areas are drawn uniformly without replacement. Growth then
    repeats: pick a region uniformly among those with a nonempty frontier
    (unassigned areas adjacent to the region), then assign it a uniformly
    chosen frontier area. Deterministic under a fixed seed.

    Raises
    ------
    InvalidKError
        If k is outside [1, n].
    ContiguityError
        If the contiguity graph is disconnected.
    """
    n = w.n
    if not 1 <= k <= n:
        raise InvalidKError(f"k must be in [1, {n}], got {k}")
    if not is_connected(w):
        raise ContiguityError("contiguous regions are impossible on a disconnected graph")
    rng = np.random.default_rng(seed)
    assignment = np.full(n, -1, dtype=np.int64)
    seeds = rng.choice(n, size=k, replace=False)
    frontiers: list[set[int]] = [set() for _ in range(k)]
    for region, area in enumerate(seeds):
        assignment[area] = region
    for region, area in enumerate(seeds):
        frontiers[region] = {j for j in w.neighbors[area] if assignment[j] < 0}
    active = [r for r in range(k) if frontiers[r]]
    remaining = n - k
    while remaining and active:
        pos = int(rng.integers(len(active)))
        region = active[pos]
        frontier = frontiers[region]
        frontier.difference_update(
            [a for a in frontier if assignment[a] >= 0]
        )
        if not frontier:
            active.pop(pos)
            continue
        ordered = sorted(frontier)
        area = ordered[int(rng.integers(len(ordered)))]
        frontier.discard(area)
        assignment[area] = region
        remaining -= 1
        for j in w.neighbors[area]:
            if assignment[j] < 0:
                frontier.add(j)
        if not frontier and pos < len(active) and active[pos] == region:
            active.pop(pos)

    # Growth covers every area on a connected graph; this fallback guards
    # against weights variants that could strand enclaves.
    if remaining:
        stranded = np.flatnonzero(assignment < 0)
        for area in stranded:
            adjacent_regions = sorted({int(assignment[j]) for j in w.neighbors[area] if assignment[j] >= 0})
            if not adjacent_regions:
                raise CorruptPartitionError(f"area {area} has no assigned neighbor to join")
            assignment[area] = adjacent_regions[int(rng.integers(len(adjacent_regions)))]
        result = Regionalization(assignment=assignment, k=k)
        validate_regionalization(result, w)
        return result
    return Regionalization(assignment=assignment, k=k)


def validate_regionalization(r: Regionalization, w: SpatialWeights) -> None:
    """Raise CorruptPartitionError unless every region is internally connected."""
    if r.n != w.n:
        raise ShapeMismatchError(f"partition covers {r.n} areas but weights has n={w.n}")
    for region in range(r.k):
        members = np.flatnonzero(r.assignment == region)
        member_set = set(int(m) for m in members)
        start = int(members[0])
        seen = {start}
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in w.neighbors[i]:
                if j in member_set and j not in seen:
                    seen.add(j)
                    queue.append(j)
        if len(seen) != members.size:
            raise CorruptPartitionError(
                f"region {region} is not contiguous ({len(seen)} of {members.size} reachable)"
            )


def aggregate_mean(y: AreaVariable, r: Regionalization) -> AggregatedVariable:
    """Per-region unweighted means of ``y`` under partition ``r``."""
    if y.n != r.n:
        raise ShapeMismatchError(f"variable has {y.n} values but partition covers {r.n} areas")
    sizes = np.bincount(r.assignment, minlength=r.k)
    if sizes.size > r.k:
        raise CorruptPartitionError("assignment contains labels outside [0, k)")
    sums = np.bincount(r.assignment, weights=y.values, minlength=r.k)
    return AggregatedVariable(region_means=sums / sizes, region_sizes=sizes)


def regionalization_to_csv(r: Regionalization) -> str:
    """Two-column CSV ``area_id, region_id``."""
    lines = ["area_id,region_id"]
    lines.extend(f"{i},{int(label)}" for i, label in enumerate(r.assignment))
    return "\n".join(lines) + "\n"


def regionalization_from_csv(text: str) -> Regionalization:
    """Parse the two-column ``area_id, region_id`` format."""
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line.lower().replace(" ", "") == "area_id,region_id":
            continue
        try:
            a, g = line.split(",")
            pairs.append((int(a), int(g)))
        except ValueError:
            raise CorruptPartitionError(f"bad partition row: {line!r}") from None
    if not pairs:
        raise CorruptPartitionError("empty partition file")
    pairs.sort()
    ids = [p[0] for p in pairs]
    if ids != list(range(len(ids))):
        raise CorruptPartitionError("area ids must be consecutive 0..n-1")
    labels = np.array([p[1] for p in pairs], dtype=np.int64)
    return Regionalization(assignment=labels, k=int(labels.max()) + 1)
