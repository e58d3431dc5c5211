"""Variation operators and dominance machinery over [0,1] gene vectors.

SBX and polynomial mutation follow the standard bounded real-coded forms, so
the distribution-index parameters carry their usual meaning.  All operators
clamp results back into [0,1] and draw every random number from the caller's
generator, which keeps whole runs reproducible from a single seed.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

_EPS = 1e-14


def sbx_crossover(a: np.ndarray, b: np.ndarray, rate: float, di: float,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover of two parents; returns two offspring."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractViolation(f"parent lengths differ: {a.shape} vs {b.shape}")
    c1, c2 = sbx_crossover_pairs(a[None, :], b[None, :], rate, di, rng)
    return c1[0], c2[0]


def sbx_crossover_pairs(a: np.ndarray, b: np.ndarray, rate: float, di: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized SBX over (M, n) parent matrices, pair i with pair i."""
    if a.shape != b.shape:
        raise ContractViolation(f"parent shapes differ: {a.shape} vs {b.shape}")
    m, n = a.shape
    do_pair = rng.random(m) <= rate
    do_gene = rng.random((m, n)) <= 0.5
    u = rng.random((m, n))
    swap = rng.random((m, n)) <= 0.5

    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    diff = hi - lo
    active = do_pair[:, None] & do_gene & (diff > _EPS)
    diff_safe = np.where(diff > _EPS, diff, 1.0)

    exp = 1.0 / (di + 1.0)
    # Child toward the lower parent, bounded below by 0.
    beta1 = 1.0 + 2.0 * lo / diff_safe
    alpha1 = 2.0 - np.power(beta1, -(di + 1.0))
    betaq1 = np.where(u <= 1.0 / alpha1,
                      np.power(u * alpha1, exp),
                      np.power(1.0 / (2.0 - u * alpha1), exp))
    # Child toward the upper parent, bounded above by 1.
    beta2 = 1.0 + 2.0 * (1.0 - hi) / diff_safe
    alpha2 = 2.0 - np.power(beta2, -(di + 1.0))
    betaq2 = np.where(u <= 1.0 / alpha2,
                      np.power(u * alpha2, exp),
                      np.power(1.0 / (2.0 - u * alpha2), exp))

    mid = 0.5 * (lo + hi)
    half = 0.5 * diff
    c_lo = np.clip(mid - betaq1 * half, 0.0, 1.0)
    c_hi = np.clip(mid + betaq2 * half, 0.0, 1.0)

    child1 = np.where(active, np.where(swap, c_hi, c_lo), a)
    child2 = np.where(active, np.where(swap, c_lo, c_hi), b)
    return child1, child2


def polynomial_mutation(g: np.ndarray, rate: float, di: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation; each gene mutates with probability rate."""
    g = np.asarray(g, dtype=np.float64)
    return polynomial_mutation_batch(g[None, :], rate, di, rng)[0]


def polynomial_mutation_batch(genes: np.ndarray, rate: float, di: float,
                              rng: np.random.Generator) -> np.ndarray:
    """Vectorized polynomial mutation over a (M, n) gene matrix."""
    m, n = genes.shape
    do = rng.random((m, n)) <= rate
    u = rng.random((m, n))

    y = genes
    mut_pow = 1.0 / (di + 1.0)
    low_side = u < 0.5
    xy1 = 1.0 - y
    xy2 = y
    val1 = 2.0 * u + (1.0 - 2.0 * u) * np.power(1.0 - xy2, di + 1.0)
    val2 = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * np.power(1.0 - xy1, di + 1.0)
    deltaq = np.where(low_side,
                      np.power(np.maximum(val1, 0.0), mut_pow) - 1.0,
                      1.0 - np.power(np.maximum(val2, 0.0), mut_pow))
    mutated = np.clip(y + deltaq, 0.0, 1.0)
    return np.where(do, mutated, genes)


def dominates_matrix(points: np.ndarray) -> np.ndarray:
    """dom[i, j] is True iff point i dominates point j (minimization)."""
    le = (points[:, None, :] <= points[None, :, :]).all(axis=2)
    lt = (points[:, None, :] < points[None, :, :]).any(axis=2)
    return le & lt


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of points not dominated by any other point.

    Duplicates all stay True here; nondominated_filter collapses them.
    Points are processed in ascending objective-sum order, so any potential
    dominator of a point is accepted before the point itself is tested.
    """
    points = np.asarray(points, dtype=np.float64)
    n, d = points.shape
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.argsort(points.sum(axis=1), kind="stable")
    spts = points[order]
    keep = np.ones(n, dtype=bool)
    accepted = np.empty((n, d))
    acc = 0
    chunk = 256
    for start in range(0, n, chunk):
        block = spts[start:start + chunk]
        m = len(block)
        alive = np.ones(m, dtype=bool)
        if acc:
            for a0 in range(0, acc, 8192):
                sub = accepted[a0:min(a0 + 8192, acc)]
                le = (sub[None, :, :] <= block[:, None, :]).all(axis=2)
                lt = (sub[None, :, :] < block[:, None, :]).any(axis=2)
                alive &= ~(le & lt).any(axis=1)
                if not alive.any():
                    break
        for j in range(m):
            if not alive[j]:
                continue
            prior = block[:j][alive[:j]]
            if len(prior):
                c = block[j]
                if ((prior <= c).all(axis=1) & (prior < c).any(axis=1)).any():
                    alive[j] = False
        keep[start:start + m] = alive
        survivors = block[alive]
        accepted[acc:acc + len(survivors)] = survivors
        acc += len(survivors)
    mask = np.zeros(n, dtype=bool)
    mask[order] = keep
    return mask


def unique_rows_first_occurrence(points: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct row, in input order."""
    seen: set[bytes] = set()
    idx = []
    for i, row in enumerate(points):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            idx.append(i)
    return np.array(idx, dtype=np.int64)


def nondominated_filter(points: np.ndarray) -> np.ndarray:
    """Exactly the non-dominated points, duplicates collapsed, input order kept."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ContractViolation("points must be a 2-d array")
    if len(points) == 0:
        return points.reshape(0, points.shape[1] if points.ndim == 2 else 0)
    first = unique_rows_first_occurrence(points)
    deduped = points[first]
    return deduped[nondominated_mask(deduped)]


def fast_nondominated_ranks(points: np.ndarray) -> np.ndarray:
    """NSGA-II style front ranks (0 = best) via dominance-count peeling."""
    n = len(points)
    dom = dominates_matrix(points)
    n_dom = dom.sum(axis=0).astype(np.int64)
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.flatnonzero(n_dom == 0)
    r = 0
    while current.size:
        ranks[current] = r
        n_dom[current] = -1
        n_dom -= dom[current].sum(axis=0)
        current = np.flatnonzero(n_dom == 0)
        r += 1
    return ranks


def crowding_distance(points: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get +inf."""
    n, d = points.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(d):
        order = np.argsort(points[:, k], kind="stable")
        col = points[order, k]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            interior = order[1:-1]
            dist[interior] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = fast_nondominated_ranks(points)
    crowd = np.zeros(len(points))
    for r in np.unique(ranks):
        members = np.flatnonzero(ranks == r)
        crowd[members] = crowding_distance(points[members])
    return ranks, crowd


def environmental_selection(points: np.ndarray, capacity: int) -> np.ndarray:
    """Indices of the `capacity` survivors by rank, then crowding distance."""
    ranks, crowd = rank_and_crowding(points)
    # Sort by (rank asc, crowding desc); stable so equal keys keep input order.
    order = np.lexsort((-crowd, ranks))
    return order[:capacity]


def crowded_tournament(ranks: np.ndarray, crowd: np.ndarray, count: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Binary tournaments by (rank, crowding); returns `count` winner indices."""
    n = len(ranks)
    i = rng.integers(0, n, size=count)
    j = rng.integers(0, n, size=count)
    better = (ranks[j] < ranks[i]) | ((ranks[j] == ranks[i]) & (crowd[j] > crowd[i]))
    return np.where(better, j, i)
