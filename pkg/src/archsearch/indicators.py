"""Reference-front construction, normalization, and front-quality indicators.

All indicators assume canonical minimization.  They are computed in
normalized objective space: build a reference front across the runs under
comparison, fit a Normalizer to it, and map every front through it.  The
hypervolume reference point defaults to (1.1, ..., 1.1), a 10% margin so
extreme points of the reference front still contribute volume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ContractViolation
from .operators import nondominated_filter, nondominated_mask, unique_rows_first_occurrence

HV_REFERENCE_MARGIN = 1.1
MC_SAMPLES = 1_000_000
EXACT_HV_MAX_DIM = 4
_MC_SEED = 987654321  # fixed so Monte-Carlo estimates are reproducible
_POINT_EQ_TOL = 1e-9


def _as_points(front) -> np.ndarray:
    if isinstance(front, (Front, ReferenceFront)):
        return front.points
    pts = np.asarray(front, dtype=np.float64)
    if pts.ndim != 2:
        raise ContractViolation("a front must be a 2-d array of points")
    return pts


@dataclass(frozen=True)
class Front:
    """A mutually non-dominated, duplicate-free set of objective vectors."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2:
            raise ContractViolation("a front must be a 2-d array of points")
        if not np.isfinite(pts).all():
            raise ContractViolation("front contains non-finite points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points) -> "Front":
        """Build a front from arbitrary points: filter dominance, drop duplicates."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise ContractViolation("a front must be a 2-d array of points")
        return cls(nondominated_filter(pts))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class ReferenceFront:
    """Non-dominated union of several runs' fronts, with per-point provenance.

    input_labels lists every run that went into the union, including runs
    whose points were all dominated away; provenance credits each surviving
    point to exactly one input run.
    """

    points: np.ndarray
    provenance: tuple[Hashable, ...]
    input_labels: tuple[Hashable, ...]

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if len(self.provenance) != len(pts):
            raise ContractViolation("provenance must be aligned with points")
        missing = set(self.provenance) - set(self.input_labels)
        if missing:
            raise ContractViolation(f"provenance labels {missing} not among inputs")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def as_front(self) -> Front:
        return Front(self.points)


def build_reference_front(fronts: Sequence, labels: Sequence[Hashable] | None = None) -> ReferenceFront:
    """Union + non-dominated filter over fronts, keeping per-point provenance.

    A point produced identically by several runs is credited to the lowest
    label; by default labels are the input positions.  Fronts are processed
    in ascending label order, first occurrence wins.
    """
    if not fronts:
        raise ContractViolation("need at least one front")
    if labels is None:
        labels = list(range(len(fronts)))
    if len(labels) != len(fronts):
        raise ContractViolation("labels must be aligned with fronts")
    if len(set(labels)) != len(labels):
        raise ContractViolation("front labels must be unique")

    point_sets = [_as_points(f) for f in fronts]
    dims = {p.shape[1] for p in point_sets}
    if len(dims) != 1:
        raise ContractViolation(f"fronts have mismatched dimensions: {sorted(dims)}")

    order = sorted(range(len(labels)), key=lambda i: labels[i])
    stacked = np.vstack([point_sets[i] for i in order])
    owners = np.concatenate([
        np.full(len(point_sets[i]), rank, dtype=np.int64)
        for rank, i in enumerate(order)
    ])
    first = unique_rows_first_occurrence(stacked)
    deduped, own = stacked[first], owners[first]
    mask = nondominated_mask(deduped)
    ordered_labels = [labels[i] for i in order]
    return ReferenceFront(
        points=deduped[mask],
        provenance=tuple(ordered_labels[o] for o in own[mask]),
        input_labels=tuple(ordered_labels),
    )


@dataclass(frozen=True)
class Normalizer:
    """Per-axis linear map sending reference-front bounds to [0,1].

    The map is not clipped: points outside the reference ranges land
    outside [0,1] and keep their true distances, which matters when a
    snapshot front is scored against a reference built from finals.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ContractViolation("normalizer bounds must be matching vectors")
        if (mins > maxs).any():
            raise ContractViolation("normalizer needs min <= max per axis")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @classmethod
    def from_front(cls, front) -> "Normalizer":
        pts = _as_points(front)
        if len(pts) == 0:
            raise ContractViolation("cannot fit a normalizer to an empty front")
        return cls(mins=pts.min(axis=0), maxs=pts.max(axis=0))

    def apply(self, points) -> np.ndarray:
        pts = _as_points(points)
        if pts.shape[1] != len(self.mins):
            raise ContractViolation("dimension mismatch in normalize")
        span = self.maxs - self.mins
        out = (pts - self.mins) / np.where(span > 0, span, 1.0)
        return np.where(span > 0, out, 0.0)  # degenerate axes map to 0


def normalize(front, norm: Normalizer) -> Front:
    """Map a front into [0,1]^d; clamping can merge points, so re-filter."""
    return Front.of(norm.apply(front))


def hv_reference_point(dimension: int, margin: float = HV_REFERENCE_MARGIN) -> np.ndarray:
    return np.full(dimension, margin)


def _hv_exact_2d(pts: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(pts[:, 0], kind="stable")
    spts = pts[order]
    hv = 0.0
    prev_y = ref[1]
    for x, y in spts:
        hv += (ref[0] - x) * (prev_y - y)
        prev_y = y
    return hv


def _hv_exact(pts: np.ndarray, ref: np.ndarray) -> float:
    """Dimension-sweep recursion; pts non-dominated and within the ref box."""
    if len(pts) == 0:
        return 0.0
    d = pts.shape[1]
    if d == 1:
        return float(ref[0] - pts[:, 0].min())
    if d == 2:
        return _hv_exact_2d(pts, ref)
    zs = np.unique(pts[:, -1])
    hv = 0.0
    for k, z in enumerate(zs):
        upper = zs[k + 1] if k + 1 < len(zs) else ref[-1]
        depth = upper - z
        if depth <= 0:
            continue
        slab = nondominated_filter(pts[pts[:, -1] <= z][:, :-1])
        hv += _hv_exact(slab, ref[:-1]) * depth
    return hv


try:
    from numba import njit

    @njit(cache=True)
    def _mc_dominated_count(samples, pts):  # pragma: no cover - jitted
        count = 0
        for i in range(samples.shape[0]):
            for j in range(pts.shape[0]):
                ok = True
                for k in range(pts.shape[1]):
                    if pts[j, k] > samples[i, k]:
                        ok = False
                        break
                if ok:
                    count += 1
                    break
        return count

except ImportError:  # pragma: no cover - numba is a declared dependency
    def _mc_dominated_count(samples, pts):
        dominated = np.zeros(len(samples), dtype=bool)
        for start in range(0, len(pts), 32):
            sub = pts[start:start + 32]
            dominated |= (sub[None, :, :] <= samples[:, None, :]).all(axis=2).any(axis=1)
            if dominated.all():
                break
        return int(dominated.sum())


def _hv_montecarlo(pts: np.ndarray, ref: np.ndarray, samples: int) -> float:
    lo = pts.min(axis=0)
    span = ref - lo
    volume = float(np.prod(span))
    if volume <= 0.0:
        return 0.0
    # Largest-box points first so the per-sample scan exits early.
    order = np.argsort(-np.prod(ref - pts, axis=1), kind="stable")
    spts = np.ascontiguousarray(pts[order])
    rng = np.random.Generator(np.random.PCG64(_MC_SEED))
    hits = 0
    remaining = samples
    while remaining > 0:
        chunk = min(remaining, 200_000)
        batch = lo + rng.random((chunk, len(ref))) * span
        hits += int(_mc_dominated_count(batch, spts))
        remaining -= chunk
    return volume * hits / samples


def hypervolume(front, ref_point, method: str = "auto", samples: int = MC_SAMPLES) -> float:
    """Lebesgue measure of the region dominated by the front up to ref_point.

    Exact dimension-sweep for d <= 4; seeded Monte-Carlo (±0.005) above.
    `method` forces "exact" or "montecarlo" regardless of dimension.
    """
    pts = _as_points(front)
    ref = np.asarray(ref_point, dtype=np.float64)
    if pts.shape[1] != len(ref):
        raise ContractViolation("ref_point dimension does not match the front")
    beyond = (pts > ref).any(axis=1)
    if beyond.any():
        bad = pts[np.argmax(beyond)]
        raise ContractViolation(f"front point {bad.tolist()} lies beyond ref_point {ref.tolist()}")
    pts = nondominated_filter(pts)
    if len(pts) == 0:
        return 0.0
    if method == "auto":
        method = "exact" if pts.shape[1] <= EXACT_HV_MAX_DIM else "montecarlo"
    if method == "exact":
        return float(_hv_exact(pts, ref))
    if method == "montecarlo":
        return _hv_montecarlo(pts, ref, samples)
    raise ContractViolation(f"unknown hypervolume method {method!r}")


def _nonempty_points(front, name: str) -> np.ndarray:
    pts = _as_points(front)
    if len(pts) == 0:
        raise ContractViolation(f"{name} must not be empty")
    return pts


def generational_distance(front, ref) -> float:
    """sqrt of summed squared nearest-reference distances, divided by n."""
    a = _nonempty_points(front, "front")
    r = _nonempty_points(ref, "reference front")
    d, _ = cKDTree(r).query(a)
    return float(np.sqrt((d ** 2).sum()) / len(a))


def inverted_generational_distance(front, ref) -> float:
    return generational_distance(ref, front)


def additive_epsilon(front, ref) -> float:
    """Smallest eps such that front + eps (per axis) weakly dominates ref."""
    a = _nonempty_points(front, "front")
    r = _nonempty_points(ref, "reference front")
    # max over ref of min over front of max over axes (a_k - r_k);
    # chunked over ref to bound the (n, chunk, d) intermediate
    n, d = a.shape
    chunk = max(1, int(2e7 / max(n * d, 1)))
    worst = -np.inf
    for start in range(0, len(r), chunk):
        diff = a[:, None, :] - r[None, start:start + chunk, :]
        worst = max(worst, float(diff.max(axis=2).min(axis=0).max()))
    return worst


def spacing(front) -> float:
    """Schott's spacing over min Manhattan distances; n <= 1 gives 0."""
    pts = _as_points(front)
    n = len(pts)
    if n <= 1:
        return 0.0
    d, _ = cKDTree(pts).query(pts, k=2, p=1)
    nearest = d[:, 1]
    mean = nearest.mean()
    return float(np.sqrt(((mean - nearest) ** 2).sum() / (n - 1)))


def contribution(front, ref: ReferenceFront, run: Hashable) -> float:
    """Fraction of reference points credited to `run` and present in `front`.

    Presence is point equality within 1e-9 (Chebyshev).  On final fronts the
    credited points are present by construction, so contributions across all
    runs partition the reference front and sum to 1.0; on earlier snapshots
    the value grows as the archive approaches the final front.
    """
    if not isinstance(ref, ReferenceFront):
        raise ContractViolation("contribution needs a ReferenceFront with provenance")
    if run not in set(ref.input_labels):
        raise ContractViolation(f"run {run!r} is not among the reference front's inputs")
    pts = _as_points(front)
    owned = np.array([label == run for label in ref.provenance], dtype=bool)
    if not owned.any() or len(pts) == 0:
        return 0.0
    mine = ref.points[owned]
    d, _ = cKDTree(pts).query(mine, p=np.inf)
    return float((d <= _POINT_EQ_TOL).sum() / len(ref.points))


def indicator_row(front, ref: ReferenceFront, norm: Normalizer, run: Hashable,
                  hv_margin: float = HV_REFERENCE_MARGIN) -> dict[str, float]:
    """The six indicators of one front against a shared reference, normalized.

    Fronts from intermediate snapshots can stick out past the reference
    ranges; such points dominate zero volume, which clipping them onto the
    hypervolume reference point computes exactly.
    """
    npts = nondominated_filter(norm.apply(front))
    nref = norm.apply(ref.points)
    ref_point = hv_reference_point(npts.shape[1], hv_margin)
    return {
        "hv": hypervolume(np.minimum(npts, ref_point), ref_point),
        "gd": generational_distance(npts, nref),
        "igd": inverted_generational_distance(npts, nref),
        "eps": additive_epsilon(npts, nref),
        "spacing": spacing(npts),
        "contribution": contribution(front, ref, run),
    }
