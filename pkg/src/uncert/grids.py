"""Probability measures on a uniform 1-D grid and the width calculus on them.

A measure is a nonnegative weight vector over grid points, normalized to
total mass one.  Widths are shortest-interval (confidence) widths and are
always reported as integer multiples of the grid step, so every width
comparison downstream carries a one-to-two-cell tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

# Total mass must sit within MASS_TOL of 1 after construction.  Transforms
# (FFT convolution, pushforward) may drift by up to RENORM_TOL before we
# treat the deviation as a bug rather than roundoff.
MASS_TOL = 1e-9
RENORM_TOL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_j = x_min + j*dx for j = 0..n-1."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        if self.dx <= 0:
            raise ValueError(f"grid step must be positive, got {self.dx}")
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n}")

    @property
    def x_max(self) -> float:
        return self.x_min + (self.n - 1) * self.dx

    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def nearest_index(self, x: float) -> int:
        j = int(round((x - self.x_min) / self.dx))
        return min(max(j, 0), self.n - 1)

    def contains(self, x: float) -> bool:
        return self.x_min - 1e-9 * self.dx <= x <= self.x_max + 1e-9 * self.dx

    @classmethod
    def symmetric(cls, half_length: float, n: int) -> "GridSpec":
        """Grid covering [-L, L) with n points; x = 0 is a grid point for even n."""
        dx = 2.0 * half_length / n
        return cls(-half_length, dx, n)


@dataclass(frozen=True)
class Interval:
    """Closed interval [center - width/2, center + width/2]."""

    center: float
    width: float

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"interval width must be >= 0, got {self.width}")

    @property
    def lo(self) -> float:
        return self.center - 0.5 * self.width

    @property
    def hi(self) -> float:
        return self.center + 0.5 * self.width


class GridMeasure:
    """Normalized nonnegative weights on a :class:`GridSpec`.

    Construction clamps negative roundoff (below 1e-9 in magnitude) to zero
    and renormalizes total mass, provided the deviation from 1 is within
    RENORM_TOL; anything larger raises.
    """

    __slots__ = ("grid", "weights")

    def __init__(self, grid: GridSpec, weights):
        w = np.asarray(weights, dtype=float)
        if w.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} weights, got shape {w.shape}")
        if w.min() < -1e-9:
            raise ValueError(f"negative weight {w.min():.3e} beyond roundoff")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if abs(total - 1.0) > RENORM_TOL:
            raise ValueError(f"total mass {total:.9f} deviates from 1 beyond {RENORM_TOL}")
        w = w / total
        w.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("GridMeasure is immutable")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def mean(self) -> float:
        return float(np.dot(self.grid.points(), self.weights))

    def variance(self) -> float:
        x = self.grid.points()
        m = self.mean()
        return float(np.dot((x - m) ** 2, self.weights))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def point_mass(x: float, grid: GridSpec) -> GridMeasure:
    """Unit mass at the grid point nearest to x."""
    w = np.zeros(grid.n)
    w[grid.nearest_index(x)] = 1.0
    return GridMeasure(grid, w)


def uniform_measure(a: float, b: float, grid: GridSpec) -> GridMeasure:
    """Equal weights on all grid points inside the closed interval [a, b]."""
    if b <= a:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x = grid.points()
    inside = (x >= a - 1e-9 * grid.dx) & (x <= b + 1e-9 * grid.dx)
    if not inside.any():
        raise ValueError(f"interval [{a}, {b}] contains no grid point")
    w = inside.astype(float)
    return GridMeasure(grid, w / w.sum())


def gaussian_measure(mean: float, sigma: float, grid: GridSpec) -> GridMeasure:
    """Normal density sampled at grid points and renormalized."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = grid.points()
    w = np.exp(-0.5 * ((x - mean) / sigma) ** 2)
    s = w.sum()
    if s <= 0:
        raise ValueError("gaussian has no support on the grid")
    return GridMeasure(grid, w / s)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def mass(P: GridMeasure, J: Interval) -> float:
    """Total weight at grid points lying in the closed interval J."""
    x = P.grid.points()
    tol = 1e-9 * P.grid.dx
    inside = (x >= J.lo - tol) & (x <= J.hi + tol)
    return float(P.weights[inside].sum())


def overall_width(P: GridMeasure, eps: float) -> float:
    """Length of the shortest grid window carrying mass >= 1 - eps.

    The window is a run of consecutive grid points; its length is
    (last - first) * dx, so a single point has width 0.  The minimum over
    all start positions is found on the cumulative-sum array.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    target = 1.0 - eps - 1e-12
    c = np.concatenate(([0.0], np.cumsum(P.weights)))
    # for each start i, first end index j with mass(i..j-1 inclusive) >= target
    idx = np.searchsorted(c, c[:-1] + target, side="left")
    ok = idx <= P.grid.n
    starts = np.nonzero(ok)[0]
    widths = (idx[ok] - 1 - starts) * P.grid.dx
    return float(widths.min())


def centered_width(P: GridMeasure, x: float, eps: float) -> float:
    """Smallest w with mass(P, [x - w/2, x + w/2]) >= 1 - eps.

    Returns inf when even the full grid does not reach the target mass.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    target = 1.0 - eps - 1e-12
    d = np.abs(P.grid.points() - x)
    order = np.argsort(d, kind="stable")
    c = np.cumsum(P.weights[order])
    k = int(np.searchsorted(c, target, side="left"))
    if k >= P.grid.n:
        return float("inf")
    return float(2.0 * d[order[k]])


def convolve(P: GridMeasure, Q: GridMeasure) -> GridMeasure:
    """Measure convolution on the Minkowski sum of the supports.

    Both inputs must share the grid step; the output is zero-padded to
    n_P + n_Q - 1 cells so no wraparound can corrupt tail mass.
    """
    if abs(P.grid.dx - Q.grid.dx) > 1e-9 * P.grid.dx:
        raise ValueError(f"grid steps differ: {P.grid.dx} vs {Q.grid.dx}")
    w = fftconvolve(P.weights, Q.weights)
    out = GridSpec(P.grid.x_min + Q.grid.x_min, P.grid.dx, P.grid.n + Q.grid.n - 1)
    return GridMeasure(out, w)


def reflect(P: GridMeasure) -> GridMeasure:
    """Reflection x -> -x; weight at x_j moves to -x_j."""
    out = GridSpec(-P.grid.x_max, P.grid.dx, P.grid.n)
    return GridMeasure(out, P.weights[::-1])
