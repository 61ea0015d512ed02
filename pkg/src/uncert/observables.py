"""Observables as state -> outcome-distribution kernels.

Covers sharp position/momentum, their convolution smearings, the marginals
of covariant phase-space observables (computed through the parity identity
with the generator), warped non-covariant variants, and the full 2-D joint
distribution with its covariance check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grids import GridMeasure, GridSpec, convolve, reflect
from .states import (
    MixedState,
    displace_mixed,
    momentum_distribution,
    momentum_grid,
    parity_mixed,
    position_distribution,
)


class MassDeficitError(ValueError):
    """Outcome window too small: it misses a non-negligible part of the mass."""


# ---------------------------------------------------------------------------
# Warp maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Monotone piecewise-linear bijection given by strictly increasing knots.

    Outside the knot range the map continues with the end-segment slopes.
    """

    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("need matching 1-D knot arrays with >= 2 entries")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("knots must be strictly increasing in both coordinates")
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "ys", tuple(ys))

    def _eval(self, x, xs, ys):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, xs, ys)
        lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        out = np.where(x < xs[0], ys[0] + (x - xs[0]) * lo_slope, out)
        out = np.where(x > xs[-1], ys[-1] + (x - xs[-1]) * hi_slope, out)
        return out

    def __call__(self, x):
        return self._eval(x, np.asarray(self.xs), np.asarray(self.ys))

    def inverse(self, y):
        return self._eval(y, np.asarray(self.ys), np.asarray(self.xs))

    @property
    def displacement_bound(self) -> float:
        xs = np.asarray(self.xs)
        ys = np.asarray(self.ys)
        return float(np.max(np.abs(ys - xs)))

    @property
    def is_affine(self) -> bool:
        xs = np.asarray(self.xs)
        ys = np.asarray(self.ys)
        slopes = np.diff(ys) / np.diff(xs)
        return bool(np.all(np.abs(slopes - slopes[0]) < 1e-12))

    @classmethod
    def identity(cls, lo: float, hi: float) -> "PiecewiseLinearMap":
        return cls((lo, hi), (lo, hi))

    @classmethod
    def shift(cls, lo: float, hi: float, offset: float) -> "PiecewiseLinearMap":
        return cls((lo, hi), (lo + offset, hi + offset))


@dataclass(frozen=True)
class WarpMap:
    """Pair of monotone maps (gamma_q, gamma_p) with bounded displacement."""

    gamma_q: PiecewiseLinearMap
    gamma_p: PiecewiseLinearMap

    @property
    def bound_q(self) -> float:
        return self.gamma_q.displacement_bound

    @property
    def bound_p(self) -> float:
        return self.gamma_p.displacement_bound

    @classmethod
    def identity(cls, lo: float, hi: float) -> "WarpMap":
        ident = PiecewiseLinearMap.identity(lo, hi)
        return cls(ident, ident)


def pushforward(P: GridMeasure, gmap: PiecewiseLinearMap) -> GridMeasure:
    """Image measure of P under gmap, re-binned onto the same grid.

    Each point mass moves to the output cell containing its image, so total
    mass is conserved exactly; images beyond the grid pile up at the edges.
    """
    g = P.grid
    targets = np.rint((gmap(g.points()) - g.x_min) / g.dx).astype(int)
    targets = np.clip(targets, 0, g.n - 1)
    w = np.zeros(g.n)
    np.add.at(w, targets, P.weights)
    return GridMeasure(g, w)


# ---------------------------------------------------------------------------
# Observable kernels
# ---------------------------------------------------------------------------

class ObservableKernel:
    """Base: maps a MixedState to a normalized GridMeasure of outcomes."""

    axis: str          # "q" or "p" -- which sharp observable this approximates
    covariant: bool    # translation covariance along its axis

    def outcome_distribution(self, rho: MixedState) -> GridMeasure:
        raise NotImplementedError

    def smearing_measure(self, rho_grid: GridSpec, hbar: float):
        """Confidence measure of the kernel, or None for sharp kernels."""
        return None


@dataclass(frozen=True)
class SharpPosition(ObservableKernel):
    axis: str = field(default="q", init=False)
    covariant: bool = field(default=True, init=False)

    def outcome_distribution(self, rho):
        return position_distribution(rho)


@dataclass(frozen=True)
class SharpMomentum(ObservableKernel):
    axis: str = field(default="p", init=False)
    covariant: bool = field(default=True, init=False)

    def outcome_distribution(self, rho):
        return momentum_distribution(rho)


@dataclass(frozen=True)
class SmearedPosition(ObservableKernel):
    """Position convolved with the confidence measure mu."""

    mu: GridMeasure
    axis: str = field(default="q", init=False)
    covariant: bool = field(default=True, init=False)

    def outcome_distribution(self, rho):
        return convolve(position_distribution(rho), reflect(self.mu))

    def smearing_measure(self, rho_grid=None, hbar=None):
        return self.mu


@dataclass(frozen=True)
class SmearedMomentum(ObservableKernel):
    """Momentum convolved with the confidence measure nu."""

    nu: GridMeasure
    axis: str = field(default="p", init=False)
    covariant: bool = field(default=True, init=False)

    def outcome_distribution(self, rho):
        return convolve(momentum_distribution(rho), reflect(self.nu))

    def smearing_measure(self, rho_grid=None, hbar=None):
        return self.nu


def marginal_measures(gen: MixedState):
    """Smearing measures (mu_m, nu_m) of the observable generated by gen.

    Both come from the parity-transformed generator: mu_m is its position
    distribution, nu_m its momentum distribution.
    """
    flipped = parity_mixed(gen)
    return position_distribution(flipped), momentum_distribution(flipped)


class PhaseMarginal(ObservableKernel):
    """Marginal of the covariant observable generated by gen, along one axis.

    Computed through the convolution identity with the parity marginal
    measure; the 2-D joint-distribution route is kept as a cross-check in
    :func:`joint_distribution`.
    """

    def __init__(self, gen: MixedState, axis: str):
        if axis not in ("q", "p"):
            raise ValueError(f"axis must be 'q' or 'p', got {axis!r}")
        self.gen = gen
        self.axis = axis
        self.covariant = True
        mu_m, nu_m = marginal_measures(gen)
        self._measure = mu_m if axis == "q" else nu_m

    def outcome_distribution(self, rho):
        sharp = position_distribution(rho) if self.axis == "q" else momentum_distribution(rho)
        return convolve(sharp, reflect(self._measure))

    def smearing_measure(self, rho_grid=None, hbar=None):
        return self._measure


class WarpedMarginal(ObservableKernel):
    """Phase-space marginal pushed through a warp map (possibly non-covariant)."""

    def __init__(self, gen: MixedState, axis: str, warp: WarpMap):
        self.base = PhaseMarginal(gen, axis)
        self.gen = gen
        self.axis = axis
        self.warp = warp
        gmap = warp.gamma_q if axis == "q" else warp.gamma_p
        self.gmap = gmap
        self.covariant = gmap.is_affine

    def outcome_distribution(self, rho):
        return pushforward(self.base.outcome_distribution(rho), self.gmap)

    def smearing_measure(self, rho_grid=None, hbar=None):
        return self.base.smearing_measure()


def outcome_distribution(kernel: ObservableKernel, rho: MixedState) -> GridMeasure:
    return kernel.outcome_distribution(rho)


def warp(gen: MixedState, w: WarpMap, axis: str) -> WarpedMarginal:
    """Kernel for the warped observable G^m composed with the inverse warp."""
    return WarpedMarginal(gen, axis, w)


# ---------------------------------------------------------------------------
# 2-D joint distribution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSpaceObservable:
    """Covariant observable: generator state plus 2-D outcome grid.

    The q outcome grid must be a subset of the state grid translates
    (q values are multiples of dx) and the p outcome grid a subset of the
    Fourier-conjugate grid, so displacement covariance is grid-exact.
    """

    gen: MixedState
    q_grid: GridSpec
    p_grid: GridSpec


@dataclass(frozen=True)
class JointDistribution:
    q_grid: GridSpec
    p_grid: GridSpec
    density: np.ndarray  # shape (n_q, n_p), probability per unit area
    hbar: float

    @property
    def cell_area(self) -> float:
        return self.q_grid.dx * self.p_grid.dx

    @property
    def total_mass(self) -> float:
        return float(self.density.sum() * self.cell_area)

    def marginal_q(self) -> GridMeasure:
        return GridMeasure(self.q_grid, self.density.sum(axis=1) * self.cell_area)

    def marginal_p(self) -> GridMeasure:
        return GridMeasure(self.p_grid, self.density.sum(axis=0) * self.cell_area)


def aligned_window(grid: GridSpec, half_width: float, stride: int = 1) -> GridSpec:
    """Symmetric sub-grid of `grid` within +-half_width, every `stride`-th point."""
    center = grid.nearest_index(0.0)
    k = int(half_width / (grid.dx * stride))
    lo = center - k * stride
    hi = center + k * stride
    if lo < 0 or hi >= grid.n:
        raise ValueError(f"window half-width {half_width} exceeds the grid")
    return GridSpec(grid.points()[lo], grid.dx * stride, 2 * k + 1)


def _component_overlap_sq(psi_amps, phi_amps, grid: GridSpec, q_shifts, hbar):
    """|<psi| W(q, p) |phi>|^2 on the full conjugate p grid, one row per q."""
    n = grid.n
    idx = (np.arange(n)[None, :] - q_shifts[:, None]) % n
    s = np.conj(psi_amps)[None, :] * phi_amps[idx]
    amp = np.fft.fftshift(np.fft.ifft(s, axis=1), axes=1) * n * grid.dx
    return np.abs(amp) ** 2


def joint_distribution(G: PhaseSpaceObservable, rho: MixedState,
                       warp_map: WarpMap | None = None) -> JointDistribution:
    """Outcome density of G in state rho over the observable's 2-D window.

    Cell-by-cell midpoint evaluation of the displaced-generator overlap
    (1/2*pi*hbar) tr[rho W(q,p) m W(q,p)*].  Raises MassDeficitError when
    the window misses more than 1e-3 of the mass.
    """
    grid = rho.grid
    hbar = rho.hbar
    if G.gen.grid != grid or G.gen.hbar != hbar:
        raise ValueError("generator and state must share grid and hbar")
    pg = momentum_grid(grid, hbar)

    q_pts = G.q_grid.points()
    q_shift_f = q_pts / grid.dx
    q_shifts = np.rint(q_shift_f).astype(int)
    if np.max(np.abs(q_shift_f - q_shifts)) > 1e-6:
        raise ValueError("q outcome points must be multiples of the state grid step")
    p_pts = G.p_grid.points()
    col_f = (p_pts - pg.x_min) / pg.dx
    cols = np.rint(col_f).astype(int)
    if np.max(np.abs(col_f - cols)) > 1e-6:
        raise ValueError("p outcome points must lie on the conjugate grid")
    if cols.min() < 0 or cols.max() >= pg.n:
        raise ValueError("p outcome window exceeds the conjugate grid")

    dens = np.zeros((G.q_grid.n, G.p_grid.n))
    for wa, psi in rho.components:
        for vb, phi in G.gen.components:
            full = _component_overlap_sq(psi.amps, phi.amps, grid, q_shifts, hbar)
            dens += (wa * vb) * full[:, cols]
    dens /= 2.0 * math.pi * hbar

    jd = JointDistribution(G.q_grid, G.p_grid, dens, hbar)
    if warp_map is not None:
        jd = warp_joint(jd, warp_map)
    if jd.total_mass < 1.0 - 1e-3:
        raise MassDeficitError(
            f"outcome window q in [{G.q_grid.x_min:.3g}, {G.q_grid.x_max:.3g}], "
            f"p in [{G.p_grid.x_min:.3g}, {G.p_grid.x_max:.3g}] captures only "
            f"{jd.total_mass:.6f} of the mass")
    return jd


def warp_joint(jd: JointDistribution, warp_map: WarpMap) -> JointDistribution:
    """Pushforward of a joint distribution through (gamma_q, gamma_p)."""
    masses = jd.density * jd.cell_area
    qg, pg = jd.q_grid, jd.p_grid
    qi = np.clip(np.rint((warp_map.gamma_q(qg.points()) - qg.x_min) / qg.dx).astype(int),
                 0, qg.n - 1)
    pi = np.clip(np.rint((warp_map.gamma_p(pg.points()) - pg.x_min) / pg.dx).astype(int),
                 0, pg.n - 1)
    out = np.zeros_like(masses)
    np.add.at(out, qi, masses)          # warp rows
    out2 = np.zeros_like(out)
    np.add.at(out2.T, pi, out.T)        # warp columns
    return JointDistribution(qg, pg, out2 / jd.cell_area, jd.hbar)


def covariance_residual(G: PhaseSpaceObservable, rho: MixedState, q: float, p: float,
                        warp_map: WarpMap | None = None) -> float:
    """Max-abs density mismatch between displacing the state and shifting outcomes."""
    kq_f = q / G.q_grid.dx
    kp_f = p / G.p_grid.dx
    kq, kp = int(round(kq_f)), int(round(kp_f))
    if abs(kq_f - kq) > 1e-6 or abs(kp_f - kp) > 1e-6:
        raise ValueError("displacement must be a multiple of the outcome grid steps")
    base = joint_distribution(G, rho, warp_map)
    moved = joint_distribution(G, displace_mixed(rho, q, p), warp_map)
    shifted = np.roll(base.density, (kq, kp), axis=(0, 1))
    return float(np.max(np.abs(moved.density - shifted)))
