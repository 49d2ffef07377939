"""Wasserstein-type distances between point clouds and weighted measures.

wp_1d is the exact 1-D quantile coupling; exact_wp_small is an assignment
oracle for tiny equal-weight clouds; sliced_wp averages 1-D distances over
random unit directions.  tv_histogram and set_discrepancy compare measures on
grids and box families.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import CoverageWarning, SizeError
from .tilting import Dataset, WeightedMeasure


@dataclass(frozen=True)
class DiscreteMeasure1D:
    """Sorted atom positions with merged duplicates and masses summing to 1."""

    positions: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True).reshape(-1)
        mas = np.array(self.masses, dtype=float, copy=True).reshape(-1)
        if pos.size != mas.size or pos.size == 0:
            raise ValueError("positions and masses must be nonempty and equal length")
        if (np.diff(pos) <= 0).any():
            raise ValueError("positions must be strictly increasing; merge atoms first")
        if (mas < 0).any():
            raise ValueError("masses must be nonnegative")
        total = mas.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1, got {total!r}")
        pos.flags.writeable = False
        mas.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mas)

    @classmethod
    def from_samples(cls, values, weights=None) -> "DiscreteMeasure1D":
        v = np.asarray(values, dtype=float).reshape(-1)
        if weights is None:
            w = np.full(v.size, 1.0 / v.size)
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
            w = w / w.sum()
        pos, inv = np.unique(v, return_inverse=True)
        mas = np.zeros(pos.size)
        np.add.at(mas, inv, w)
        return cls(positions=pos, masses=mas)


def wp_1d(a: DiscreteMeasure1D, b: DiscreteMeasure1D, p: float = 1.0) -> float:
    """Exact p-Wasserstein distance between 1-D discrete measures.

    Integrates |F^{-1}(u) - G^{-1}(u)|^p over u in (0, 1) piecewise on the
    merged breakpoints of the two cumulative-mass sequences, then takes the
    1/p power.
    """
    if p < 1:
        raise ValueError("need p >= 1")
    ca = np.cumsum(a.masses)
    cb = np.cumsum(b.masses)
    edges = np.concatenate(([0.0], np.union1d(ca[:-1], cb[:-1]), [1.0]))
    du = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    ia = np.minimum(np.searchsorted(ca, mids, side="left"), ca.size - 1)
    ib = np.minimum(np.searchsorted(cb, mids, side="left"), cb.size - 1)
    diffs = np.abs(a.positions[ia] - b.positions[ib])
    keep = du > 0
    return float(np.sum(du[keep] * diffs[keep] ** p) ** (1.0 / p))


def _as_cloud(x) -> tuple[np.ndarray, np.ndarray]:
    """Coerce a Dataset / WeightedMeasure / array into (points, weights)."""
    if isinstance(x, WeightedMeasure):
        return x.atoms.points, x.weights
    if isinstance(x, Dataset):
        pts = x.points
    else:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
    return pts, np.full(pts.shape[0], 1.0 / pts.shape[0])


def _unit_directions(n_proj: int, d: int, rng: np.random.Generator) -> np.ndarray:
    dirs = rng.standard_normal((n_proj, d))
    norms = np.linalg.norm(dirs, axis=1)
    while (bad := norms == 0).any():  # probability-zero, numerically possible
        dirs[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(dirs, axis=1)
    return dirs / norms[:, None]


def sliced_wp_projections(x, y, p: float, n_proj: int, rng: np.random.Generator) -> np.ndarray:
    """Per-projection wp_1d values (not raised to p); shape (n_proj,)."""
    px, wx = _as_cloud(x)
    py, wy = _as_cloud(y)
    if px.shape[1] != py.shape[1]:
        raise ValueError("inputs must share a dimension")
    dirs = _unit_directions(n_proj, px.shape[1], rng)
    out = np.empty(n_proj)
    for k in range(n_proj):
        ax = DiscreteMeasure1D.from_samples(px @ dirs[k], wx)
        ay = DiscreteMeasure1D.from_samples(py @ dirs[k], wy)
        out[k] = wp_1d(ax, ay, p)
    return out


def sliced_wp(x, y, p: float = 2.0, n_proj: int = 128,
              rng: np.random.Generator | None = None) -> float:
    """Sliced p-Wasserstein: power mean of 1-D distances over random directions.

    ((1/K) sum_k wp_1d(proj_k x, proj_k y, p)^p)^(1/p), directions uniform on
    the unit sphere.  Deterministic given the generator.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    vals = sliced_wp_projections(x, y, p, n_proj, rng)
    return float(np.mean(vals ** p) ** (1.0 / p))


def exact_wp_small(x, y, p: float = 2.0) -> float:
    """Exact W_p between equal-size uniform clouds with n <= 8 points.

    Minimizes ((1/n) sum_i ||x_i - y_{pi(i)}||^p)^(1/p) over all bijections pi
    with an over-subsets dynamic program; a test oracle, not a production path.
    """
    px, _ = _as_cloud(x)
    py, _ = _as_cloud(y)
    if px.shape[0] != py.shape[0]:
        raise ValueError("exact oracle needs equal-size clouds")
    n = px.shape[0]
    if n > 8:
        raise SizeError(f"exact oracle capped at n = 8, got n = {n}")
    if px.shape[1] != py.shape[1]:
        raise ValueError("inputs must share a dimension")
    cost = np.linalg.norm(px[:, None, :] - py[None, :, :], axis=2) ** p
    full = (1 << n) - 1
    best = np.full(full + 1, np.inf)
    best[0] = 0.0
    for mask in range(full):
        i = bin(mask).count("1")  # next x index to assign
        base = best[mask]
        if not np.isfinite(base):
            continue
        for j in range(n):
            bit = 1 << j
            if mask & bit:
                continue
            nxt = mask | bit
            cand = base + cost[i, j]
            if cand < best[nxt]:
                best[nxt] = cand
    return float((best[full] / n) ** (1.0 / p))


@dataclass(frozen=True)
class HistogramGrid:
    """Per-axis bin counts and (lo, hi) ranges for tv_histogram."""

    bins: tuple[int, ...]
    ranges: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.bins) != len(self.ranges):
            raise ValueError("bins and ranges must have equal length")
        for b, (lo, hi) in zip(self.bins, self.ranges):
            if b < 1 or not lo < hi:
                raise ValueError("each axis needs bins >= 1 and lo < hi")

    @property
    def d(self) -> int:
        return len(self.bins)

    def edges(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, b + 1) for b, (lo, hi) in zip(self.bins, self.ranges)]


def tv_histogram(x, y, grid: HistogramGrid) -> float:
    """Histogram estimate of total variation: half the L1 gap of cell masses.

    Only for d <= 3 (cell counts explode beyond).  Points outside the grid
    range are clipped into the boundary cells and a CoverageWarning is emitted.
    """
    px, _ = _as_cloud(x)
    py, _ = _as_cloud(y)
    if px.shape[1] != grid.d or py.shape[1] != grid.d:
        raise ValueError("grid dimension must match the data dimension")
    if grid.d > 3:
        raise SizeError("tv_histogram supports d <= 3")
    lo = np.array([r[0] for r in grid.ranges])
    hi = np.array([r[1] for r in grid.ranges])
    strays = int(((px < lo) | (px > hi)).any(axis=1).sum()
                 + ((py < lo) | (py > hi)).any(axis=1).sum())
    if strays:
        warnings.warn(
            f"{strays} points fell outside the histogram range and were "
            "counted in boundary cells", CoverageWarning)
    edges = grid.edges()
    hx, _ = np.histogramdd(np.clip(px, lo, hi), bins=edges)
    hy, _ = np.histogramdd(np.clip(py, lo, hi), bins=edges)
    return float(0.5 * np.abs(hx / px.shape[0] - hy / py.shape[0]).sum())


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, lo-inclusive hi-exclusive."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float, copy=True).reshape(-1)
        hi = np.array(self.hi, dtype=float, copy=True).reshape(-1)
        if lo.size != hi.size or (lo > hi).any():
            raise ValueError("need lo <= hi componentwise")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return ((pts >= self.lo) & (pts < self.hi)).all(axis=1)


BoxFamily = Sequence[Box]


def box_mass(measure: WeightedMeasure, box: Box) -> float:
    """Total weight of the atoms inside the box."""
    return float(measure.weights[box.contains(measure.atoms.points)].sum())


def set_discrepancy(mu: WeightedMeasure, nu: WeightedMeasure, boxes: BoxFamily) -> np.ndarray:
    """|mu(B) - nu(B)| for each box B in the family."""
    if mu.d != nu.d:
        raise ValueError("measures must share a dimension")
    return np.array([abs(box_mass(mu, b) - box_mass(nu, b)) for b in boxes])
