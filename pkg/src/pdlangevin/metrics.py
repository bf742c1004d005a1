"""Distances and statistics for empirical sample clouds.

Provides exact 2-Wasserstein distances between equally weighted empirical
measures (sorted coupling in 1D, optimal assignment in general), moments,
per-pixel variance maps, and PSNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class EmpiricalMeasure:
    """A uniformly weighted cloud of points, stored as an (n, dim) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must form a nonempty (n, dim) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class WeightedNorm:
    """Squared norm ``a * ||x||^2 + b * ||y||^2`` on vectors split after
    the first ``split`` coordinates (primal block x, dual block y)."""

    a: float
    b: float
    split: int

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("weights must be positive")
        if self.split < 0:
            raise ValueError("split index must be nonnegative")

    def sq_dist_matrix(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """Pairwise squared weighted distances between two point clouds."""
        dx = P[:, None, : self.split] - Q[None, :, : self.split]
        dy = P[:, None, self.split :] - Q[None, :, self.split :]
        return self.a * np.sum(dx**2, axis=-1) + self.b * np.sum(dy**2, axis=-1)


def w2_1d(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Exact 1D 2-Wasserstein distance via the sorted-sample coupling.

    Unequal sample counts are handled by evaluating both empirical quantile
    functions at a common grid of max(n1, n2) quantile levels.
    """
    if mu.dim != 1 or nu.dim != 1:
        raise ValueError("w2_1d requires 1-dimensional measures")
    a = np.sort(mu.points[:, 0])
    b = np.sort(nu.points[:, 0])
    if a.size != b.size:
        n = max(a.size, b.size)
        q = (np.arange(n) + 0.5) / n
        a = np.quantile(a, q)
        b = np.quantile(b, q)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def w2_exact(
    mu: EmpiricalMeasure,
    nu: EmpiricalMeasure,
    norm: WeightedNorm | None = None,
    cap: int = 2000,
) -> float:
    """Exact 2-Wasserstein distance between equal-count empirical measures.

    Solves the optimal assignment problem under the squared (optionally
    weighted) norm cost and returns the root mean matched cost.
    """
    if mu.dim != nu.dim:
        raise ValueError(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    if mu.n != nu.n:
        raise ValueError(f"equal sample counts required, got {mu.n} and {nu.n}")
    if mu.n > cap:
        raise ValueError(
            f"{mu.n} points exceeds the assignment cap {cap}; "
            "subsample the clouds (or average over disjoint batches) first"
        )
    P, Q = mu.points, nu.points
    if norm is None:
        diff = P[:, None, :] - Q[None, :, :]
        cost = np.sum(diff**2, axis=-1)
    else:
        cost = norm.sq_dist_matrix(P, Q)
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].mean()))


def moments(mu: EmpiricalMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased sample covariance of the cloud."""
    if mu.n < 2:
        raise ValueError("need at least 2 points for a covariance estimate")
    mean = mu.points.mean(axis=0)
    cov = np.cov(mu.points, rowvar=False, ddof=1).reshape(mu.dim, mu.dim)
    return mean, cov


def pixelwise_variance(samples) -> np.ndarray:
    """Unbiased per-coordinate variance over a sample cloud.

    Accepts an (n, d) array or any object exposing ``x_samples`` with that
    shape (e.g. an ensemble sample store); returns a length-d vector.
    """
    pts = getattr(samples, "x_samples", samples)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need an (n >= 2, d) sample array")
    return pts.var(axis=0, ddof=1)


def psnr(reference: np.ndarray, estimate: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    reference = np.asarray(reference, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if reference.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {estimate.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((reference - estimate) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse / peak**2)
