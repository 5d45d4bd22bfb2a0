"""Covering numbers, packings and entropy numbers of finite (pseudo-)metric spaces.

Balls are closed: ``B(x, eps) = {y : d(x, y) <= eps}``. Unless a grid of
candidate centers is supplied, centers are taken from the point set
itself ("in-set" policy). In-set and ambient covering numbers satisfy
``N_inset(2 eps) <= N_ambient(eps) <= N_inset(eps)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .seqspace import MonotoneSeq

EXACT_CAP = 25
MILP_CAP = 4000
TRIANGLE_TOL = 1e-12


class CoverKind(enum.Enum):
    EXACT = "EXACT"
    UPPER_GREEDY = "UPPER_GREEDY"
    LOWER_PACKING = "LOWER_PACKING"


class SizeCapError(RuntimeError):
    """A resource cap was hit (cloud too large for the requested method)."""


class CentersInSet:
    def __repr__(self):
        return "CENTERS_IN_SET"


CENTERS_IN_SET = CentersInSet()


@dataclass(frozen=True)
class CentersFromGrid:
    grid: np.ndarray


def _pnorm_rows(diff, p):
    a = np.abs(diff)
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.einsum("...i,...i->...", a, a))
    return (a**p).sum(axis=-1) ** (1.0 / p)


class PointCloud:
    """Finite subset of ``R^d`` under an ``l_p`` norm, or an abstract set
    described by a distance table.

    Parameters
    ----------
    points : array_like, shape (m, d) or (m,)
        Coordinates; may be None when ``distances`` is given.
    norm_p : float
        ``p`` in ``[1, inf]``.
    distances : array_like, shape (m, m), optional
        Symmetric table with zero diagonal. Zero off-diagonal entries are
        allowed (pseudo-metric). The triangle inequality is checked with
        absolute tolerance ``1e-12`` scaled by the table maximum.
    """

    def __init__(self, points=None, norm_p=2.0, distances=None, check=True):
        if points is None and distances is None:
            raise ValueError("need points or a distance table")
        if not (1 <= norm_p <= math.inf):
            raise ValueError("norm_p must lie in [1, inf]")
        self.norm_p = float(norm_p)
        self._dist = None
        self.points = None
        if points is not None:
            pts = np.asarray(points, dtype=float)
            if pts.ndim == 1:
                pts = pts[:, None]
            if pts.ndim != 2:
                raise ValueError("points must form an (m, d) array")
            if pts.shape[0] == 0:
                raise ValueError("empty cloud")
            if not np.all(np.isfinite(pts)):
                raise ValueError("point coordinates must be finite")
            self.points = pts
            self.points.setflags(write=False)
        if distances is not None:
            D = np.array(distances, dtype=float)
            if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
                raise ValueError("distance table must be square and non-empty")
            if self.points is not None and D.shape[0] != self.points.shape[0]:
                raise ValueError("distance table size does not match points")
            if check:
                _validate_table(D)
            D.setflags(write=False)
            self._dist = D

    @property
    def size(self):
        return self._dist.shape[0] if self._dist is not None else self.points.shape[0]

    def __len__(self):
        return self.size

    @property
    def has_table(self):
        return self._dist is not None

    def dist_from(self, i):
        """Distances from point ``i`` to every point."""
        if self._dist is not None:
            return self._dist[i]
        return _pnorm_rows(self.points - self.points[i], self.norm_p)

    def dist_to_external(self, x):
        if self.points is None:
            raise ValueError("external centers need coordinates")
        return _pnorm_rows(self.points - np.asarray(x, dtype=float), self.norm_p)

    def distance_matrix(self):
        if self._dist is None:
            P = self.points
            D = np.empty((P.shape[0], P.shape[0]))
            for i in range(P.shape[0]):
                D[i] = _pnorm_rows(P - P[i], self.norm_p)
            D.setflags(write=False)
            self._dist = D
        return self._dist

    def diameter(self):
        if self._dist is not None:
            return float(self._dist.max())
        return max(float(self.dist_from(i).max()) for i in range(self.size))


def _validate_table(D):
    if not np.all(np.isfinite(D)):
        raise ValueError("distance table must be finite")
    if np.any(D < 0):
        raise ValueError("distances must be non-negative")
    if np.any(np.diag(D) != 0):
        raise ValueError("distance table must have a zero diagonal")
    scale = max(1.0, float(D.max()))
    if not np.allclose(D, D.T, rtol=0, atol=TRIANGLE_TOL * scale):
        raise ValueError("distance table must be symmetric")
    tol = TRIANGLE_TOL * scale
    m = D.shape[0]
    for k in range(m):
        # d(i,j) <= d(i,k) + d(k,j) for all i, j
        if np.any(D > D[:, k][:, None] + D[k][None, :] + tol):
            raise ValueError("distance table violates the triangle inequality")
    return True


@dataclass(frozen=True)
class CoveringResult:
    epsilon: float
    count: int
    centers: tuple
    kind: CoverKind
    policy: str = "in-set"
    meta: dict = field(default_factory=dict, compare=False)

    def as_row(self):
        return (self.epsilon, self.count, self.kind.value)


def verify_cover(cloud, result):
    """Independent post-check that every point lies within ``epsilon`` of a center."""
    if result.kind == CoverKind.LOWER_PACKING:
        idx = list(result.centers)
        for a in range(len(idx)):
            d = cloud.dist_from(idx[a])
            for b in range(a + 1, len(idx)):
                if not d[idx[b]] > 2 * result.epsilon:
                    return False
        return True
    near = np.full(cloud.size, np.inf)
    for c in result.centers:
        if isinstance(c, (int, np.integer)):
            near = np.minimum(near, cloud.dist_from(int(c)))
        else:
            near = np.minimum(near, cloud.dist_to_external(c))
    return bool(np.all(near <= result.epsilon))


def greedy_cover(cloud, epsilon, policy=CENTERS_IN_SET):
    """Farthest-point greedy cover (upper bound on the covering number).

    The first center is point 0; each further center is the uncovered
    point farthest from the chosen centers, ties going to the lowest index.
    With ``CentersFromGrid`` the farthest uncovered point is instead covered
    by the grid point that contains it and covers the most uncovered points.
    """
    if cloud.size == 0:
        raise ValueError("empty cloud")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if isinstance(policy, CentersFromGrid):
        return _greedy_grid(cloud, float(epsilon), np.atleast_2d(np.asarray(policy.grid, float)))
    centers, _ = _farthest_point(cloud, stop_eps=float(epsilon))
    res = CoveringResult(float(epsilon), len(centers), tuple(centers), CoverKind.UPPER_GREEDY)
    return res


def _farthest_point(cloud, stop_eps=None, k_max=None):
    """Gonzalez traversal. Returns centers and the covering radius after each one."""
    mind = np.array(cloud.dist_from(0), dtype=float, copy=True)
    centers, radii = [0], [float(mind.max())]
    while True:
        if stop_eps is not None and radii[-1] <= stop_eps:
            break
        if k_max is not None and len(centers) >= k_max:
            break
        j = int(np.argmax(mind))
        if mind[j] <= 0:
            break
        centers.append(j)
        np.minimum(mind, cloud.dist_from(j), out=mind)
        radii.append(float(mind.max()))
    return centers, radii


def _greedy_grid(cloud, eps, grid):
    if grid.shape[1] == 1 and cloud.points is not None and cloud.points.shape[1] != 1:
        grid = grid.T
    covered = np.zeros(cloud.size, bool)
    mind = np.full(cloud.size, np.inf)
    D = np.stack([cloud.dist_to_external(g) for g in grid], axis=0)  # (G, m)
    inball = D <= eps
    chosen = []
    first = True
    while not covered.all():
        if first:
            j = 0
            first = False
        else:
            cand = np.where(covered, -np.inf, mind)
            j = int(np.argmax(cand))
        opts = np.flatnonzero(inball[:, j])
        if opts.size == 0:
            raise ValueError("grid cannot cover point %d at this radius" % j)
        gain = inball[opts][:, ~covered].sum(axis=1)
        g = int(opts[int(np.argmax(gain))])
        chosen.append(g)
        covered |= inball[g]
        mind = np.minimum(mind, D[g])
    centers = tuple(tuple(grid[g]) for g in chosen)
    return CoveringResult(eps, len(chosen), centers, CoverKind.UPPER_GREEDY, policy="grid")


def packing_lower(cloud, epsilon):
    """Maximal ``2 eps``-separated subset built in index order."""
    if cloud.size == 0:
        raise ValueError("empty cloud")
    eps = float(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    chosen = []
    ok = np.ones(cloud.size, bool)
    for i in range(cloud.size):
        if ok[i]:
            chosen.append(i)
            ok &= cloud.dist_from(i) > 2 * eps
    return CoveringResult(eps, len(chosen), tuple(chosen), CoverKind.LOWER_PACKING)


# ---------------------------------------------------------------- exact covers

def _interval_balls(cloud, eps):
    """If every ball is a contiguous run in a fixed point order, return
    ``(order, lo, hi)`` with ball ``order[c]`` covering positions ``lo[c]..hi[c]``.
    Otherwise None.
    """
    if cloud.points is not None and cloud.points.shape[1] == 1 and not cloud.has_table:
        x = cloud.points[:, 0]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        m = xs.size
        lo = np.minimum(np.searchsorted(xs, xs - eps, side="left"), np.arange(m))
        hi = np.maximum(np.searchsorted(xs, xs + eps, side="right") - 1, np.arange(m))
        # searchsorted works on x -+ eps; settle the edges on the actual gaps
        while True:
            grow = (lo > 0) & (xs - xs[np.maximum(lo - 1, 0)] <= eps)
            shrink = xs - xs[lo] > eps
            if not (grow.any() or shrink.any()):
                break
            lo = lo - grow + shrink
        while True:
            grow = (hi < m - 1) & (xs[np.minimum(hi + 1, m - 1)] - xs <= eps)
            shrink = xs[hi] - xs > eps
            if not (grow.any() or shrink.any()):
                break
            hi = hi + grow - shrink
        return order, lo, hi
    if cloud.size > 4096:
        return None
    D = cloud.distance_matrix()
    B = D <= eps
    m = cloud.size
    pos = np.arange(m)
    lo = np.argmax(B, axis=1)
    hi = m - 1 - np.argmax(B[:, ::-1], axis=1)
    contiguous = (B.sum(axis=1) == hi - lo + 1) & (lo <= pos) & (pos <= hi)
    if not contiguous.all():
        return None
    return pos, lo, hi


def _interval_cover(order, lo, hi):
    """Optimal cover of positions ``0..m-1`` by the intervals ``[lo_c, hi_c]``."""
    m = lo.size
    # for each left end, the interval reaching furthest right
    best_hi = np.full(m, -1)
    best_c = np.full(m, -1)
    for c in range(m):
        if hi[c] > best_hi[lo[c]]:
            best_hi[lo[c]] = hi[c]
            best_c[lo[c]] = c
    reach = np.maximum.accumulate(best_hi)
    arg = best_c.copy()
    for i in range(1, m):
        if best_hi[i] < reach[i]:
            arg[i] = arg[i - 1]
    chosen = []
    u = 0
    while u < m:
        c = arg[u]
        if c < 0 or reach[u] < u:
            raise RuntimeError("interval cover failed")
        chosen.append(int(order[c]))
        u = int(reach[u]) + 1
    return chosen


def _bnb_cover(B, ub_centers):
    """Minimum set cover of all columns by rows of boolean matrix ``B``."""
    m = B.shape[0]
    full = (1 << m) - 1
    masks = [sum(1 << j for j in np.flatnonzero(B[i])) for i in range(m)]
    by_size = sorted(range(m), key=lambda i: (-bin(masks[i]).count("1"), i))
    # candidates covering a given element, ordered by ball size
    covering = [[i for i in by_size if masks[i] >> e & 1] for e in range(m)]
    max_ball = max(bin(x).count("1") for x in masks)
    best = [list(ub_centers)]

    def rec(covered, chosen):
        if covered == full:
            if len(chosen) < len(best[0]):
                best[0] = list(chosen)
            return
        remaining = m - bin(covered).count("1")
        if len(chosen) + -(-remaining // max_ball) >= len(best[0]):
            return
        # branch on the uncovered element with the fewest covering candidates
        unc = full & ~covered
        e_best, opts_best = None, None
        e = 0
        while unc:
            if unc & 1:
                opts = covering[e]
                if opts_best is None or len(opts) < len(opts_best):
                    e_best, opts_best = e, opts
            unc >>= 1
            e += 1
        for i in opts_best:
            chosen.append(i)
            rec(covered | masks[i], chosen)
            chosen.pop()

    rec(0, [])
    return sorted(best[0])


def _milp_cover(B):
    from scipy.optimize import Bounds, LinearConstraint, milp

    m = B.shape[0]
    res = milp(np.ones(m), constraints=LinearConstraint(B.T.astype(float), lb=1.0, ub=np.inf),
               integrality=np.ones(m), bounds=Bounds(0, 1))
    if res.status != 0:
        raise ArithmeticError(f"set-cover ILP did not reach optimality: {res.message}")
    return sorted(int(i) for i in np.flatnonzero(res.x > 0.5))


def exact_cover(cloud, epsilon, solver="auto"):
    """Minimum number of in-set closed balls of radius ``epsilon`` covering the cloud.

    Clouds whose balls are contiguous runs along a line (1-d coordinates,
    or a table whose balls are index intervals) are solved exactly by an
    interval sweep at any size. Otherwise ``solver="auto"`` uses
    branch-and-bound with the size capped at 25 points; ``solver="milp"``
    opts into an integer program (HiGHS) for clouds up to ``MILP_CAP``.
    """
    eps = float(epsilon)
    if cloud.size == 0:
        raise ValueError("empty cloud")
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if solver not in ("auto", "bnb", "milp"):
        raise ValueError("solver must be auto, bnb or milp")
    if solver == "milp":
        if cloud.size > MILP_CAP:
            raise SizeCapError(f"ILP cover is capped at {MILP_CAP} points (got {cloud.size})")
        centers = _milp_cover(cloud.distance_matrix() <= eps)
        return CoveringResult(eps, len(centers), tuple(centers), CoverKind.EXACT,
                              meta={"solver": "milp"})
    iv = _interval_balls(cloud, eps) if solver == "auto" else None
    if iv is not None:
        centers = _interval_cover(*iv)
        return CoveringResult(eps, len(centers), tuple(sorted(centers)), CoverKind.EXACT,
                              meta={"solver": "interval"})
    if cloud.size > EXACT_CAP:
        raise SizeCapError(f"exact cover is capped at {EXACT_CAP} points (got {cloud.size})")
    D = cloud.distance_matrix()
    B = D <= eps
    ub, _ = _farthest_point(cloud, stop_eps=eps)
    centers = _bnb_cover(B, ub)
    return CoveringResult(eps, len(centers), tuple(centers), CoverKind.EXACT,
                          meta={"solver": "branch-and-bound"})


# ------------------------------------------------------------ entropy numbers

class Method(enum.Enum):
    EXACT = "EXACT"
    GREEDY = "GREEDY"


def _distance_levels(cloud):
    if cloud.points is not None and cloud.points.shape[1] == 1 and not cloud.has_table:
        x = np.sort(cloud.points[:, 0])
        # every pairwise gap; for a sorted line these are x[j] - x[i]
        if x.size <= 4096:
            lv = (x[None, :] - x[:, None])
            lv = np.unique(lv[lv >= 0])
            return lv
    D = cloud.distance_matrix()
    return np.unique(D[np.triu_indices(cloud.size, k=0)])


def entropy_numbers(cloud, n_max, method=Method.EXACT, solver="auto"):
    """``(eps_1, ..., eps_{n_max})`` with in-set centers.

    EXACT bisects over the sorted set of pairwise distances (the only radii
    at which the in-set covering number can change) using ``exact_cover``.
    GREEDY uses the farthest-point ordering: the covering radius of its
    first ``n`` centers is exactly the smallest distance level at which the
    greedy cover needs at most ``n`` balls. ``solver`` is passed to
    ``exact_cover``.
    """
    method = Method(method) if not isinstance(method, Method) else method
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if method is Method.GREEDY:
        _, radii = _farthest_point(cloud, k_max=n_max)
        out = np.zeros(n_max)
        out[: len(radii)] = radii[:n_max]
        return MonotoneSeq(np.minimum.accumulate(out))
    levels = _distance_levels(cloud)
    cache = {}

    def count(i):
        if i not in cache:
            cache[i] = exact_cover(cloud, levels[i], solver=solver).count
        return cache[i]

    out = np.empty(n_max)
    hi_prev = levels.size - 1
    for n in range(1, n_max + 1):
        lo, hi = 0, hi_prev
        while lo < hi:
            mid = (lo + hi) // 2
            if count(mid) <= n:
                hi = mid
            else:
                lo = mid + 1
        out[n - 1] = levels[lo]
        hi_prev = lo
    return MonotoneSeq(out)


def covering_profile(cloud, eps_values, method=Method.EXACT):
    """``N(eps)`` for each radius, as ``CoveringResult`` objects."""
    method = Method(method) if not isinstance(method, Method) else method
    f = exact_cover if method is Method.EXACT else greedy_cover
    return [f(cloud, e) for e in eps_values]


def interval_entropy_under_phi(phi, n):
    """Model value ``phi(1/(2n))`` for the entropy numbers of ``[0,1]`` under
    a metric comparable to ``phi(|s-t|)``."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    return float(phi(1.0 / (2 * n)))
