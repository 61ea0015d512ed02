"""Pure and mixed states on the position grid, with FFT momentum duality.

The momentum grid is the discrete Fourier conjugate of the position grid,
dp = 2*pi*hbar / (n*dx), centered at zero.  Position shifts are restricted
to grid multiples (circular), momentum shifts are exact phase ramps, so
displacement covariance holds to roundoff on grid-aligned shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import GridMeasure, GridSpec

NORM_TOL = 1e-6


def momentum_grid(grid: GridSpec, hbar: float) -> GridSpec:
    """Fourier-conjugate grid; satisfies dp * dx * n = 2*pi*hbar by construction."""
    if grid.n % 2 != 0:
        raise ValueError("momentum duality requires an even number of grid points")
    dp = 2.0 * math.pi * hbar / (grid.n * grid.dx)
    return GridSpec(-(grid.n // 2) * dp, dp, grid.n)


class WaveFunction:
    """Complex amplitudes psi(x_j) with L2 normalization sum |psi|^2 dx = 1."""

    __slots__ = ("grid", "amps", "hbar")

    def __init__(self, grid: GridSpec, amps, hbar: float = 1.0):
        if hbar <= 0:
            raise ValueError(f"hbar must be positive, got {hbar}")
        a = np.asarray(amps, dtype=complex)
        if a.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} amplitudes, got shape {a.shape}")
        nrm = float(np.sum(np.abs(a) ** 2) * grid.dx)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {nrm:.9f} deviates from 1 beyond {NORM_TOL}")
        a = a / math.sqrt(nrm)
        a.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "amps", a)
        object.__setattr__(self, "hbar", float(hbar))

    def __setattr__(self, name, value):
        raise AttributeError("WaveFunction is immutable")


class MixedState:
    """Convex mixture of pure components, all sharing grid and hbar."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = [(float(w), psi) for w, psi in components]
        if not comps:
            raise ValueError("mixed state needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("component weights must be nonnegative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"component weights sum to {total:.9f}, expected 1")
        g0, h0 = comps[0][1].grid, comps[0][1].hbar
        for _, psi in comps:
            if psi.grid != g0 or psi.hbar != h0:
                raise ValueError("all components must share grid and hbar")
        object.__setattr__(self, "components", tuple((w / total, psi) for w, psi in comps))

    def __setattr__(self, name, value):
        raise AttributeError("MixedState is immutable")

    @classmethod
    def pure(cls, psi: WaveFunction) -> "MixedState":
        return cls([(1.0, psi)])

    @property
    def grid(self) -> GridSpec:
        return self.components[0][1].grid

    @property
    def hbar(self) -> float:
        return self.components[0][1].hbar


# ---------------------------------------------------------------------------
# State constructors
# ---------------------------------------------------------------------------

def gaussian_state(x0: float, p0: float, sigma: float, grid: GridSpec,
                   hbar: float = 1.0) -> WaveFunction:
    """Minimal-uncertainty Gaussian centered at (x0, p0), position spread sigma."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if grid.x_min > x0 - 8 * sigma or grid.x_max < x0 + 8 * sigma:
        raise ValueError(
            f"grid [{grid.x_min}, {grid.x_max}] does not cover "
            f"[{x0 - 8 * sigma}, {x0 + 8 * sigma}] (8 sigma around x0)")
    x = grid.points()
    a = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x / hbar)
    a /= math.sqrt(float(np.sum(np.abs(a) ** 2) * grid.dx))
    return WaveFunction(grid, a, hbar)


def box_state(center: float, width: float, grid: GridSpec,
              hbar: float = 1.0) -> WaveFunction:
    """Constant amplitude on the closed interval [center - width/2, center + width/2]."""
    if width < 2 * grid.dx:
        raise ValueError(f"box width {width} below the 2*dx minimum {2 * grid.dx}")
    x = grid.points()
    tol = 1e-9 * grid.dx
    inside = (x >= center - 0.5 * width - tol) & (x <= center + 0.5 * width + tol)
    if not inside.any():
        raise ValueError("box has no support on the grid")
    a = inside.astype(complex)
    a /= math.sqrt(float(np.sum(np.abs(a) ** 2) * grid.dx))
    return WaveFunction(grid, a, hbar)


def point_state(x: float, grid: GridSpec, hbar: float = 1.0) -> WaveFunction:
    """All mass on the single grid point nearest x (sharpest state the grid holds)."""
    a = np.zeros(grid.n, dtype=complex)
    a[grid.nearest_index(x)] = 1.0 / math.sqrt(grid.dx)
    return WaveFunction(grid, a, hbar)


def momentum_box_state(center: float, width: float, grid: GridSpec,
                       hbar: float = 1.0) -> WaveFunction:
    """State whose momentum distribution is a flat box; exact on the conjugate grid."""
    pg = momentum_grid(grid, hbar)
    if width < 2 * pg.dx:
        raise ValueError(f"momentum box width {width} below the 2*dp minimum {2 * pg.dx}")
    p = pg.points()
    tol = 1e-9 * pg.dx
    inside = (p >= center - 0.5 * width - tol) & (p <= center + 0.5 * width + tol)
    if not inside.any():
        raise ValueError("momentum box has no support on the conjugate grid")
    phi = inside.astype(complex)
    phi /= math.sqrt(float(np.sum(np.abs(phi) ** 2) * pg.dx))
    return _from_momentum_amps(phi, grid, hbar)


def momentum_point_state(p0: float, grid: GridSpec, hbar: float = 1.0) -> WaveFunction:
    """Plane wave: all momentum mass on the conjugate grid point nearest p0."""
    pg = momentum_grid(grid, hbar)
    phi = np.zeros(grid.n, dtype=complex)
    phi[pg.nearest_index(p0)] = 1.0 / math.sqrt(pg.dx)
    return _from_momentum_amps(phi, grid, hbar)


def superpose(c1: complex, psi1: WaveFunction, c2: complex,
              psi2: WaveFunction) -> WaveFunction:
    """Normalized coherent superposition c1*psi1 + c2*psi2."""
    if psi1.grid != psi2.grid or psi1.hbar != psi2.hbar:
        raise ValueError("superposed states must share grid and hbar")
    a = c1 * psi1.amps + c2 * psi2.amps
    nrm = float(np.sum(np.abs(a) ** 2) * psi1.grid.dx)
    if nrm <= 0:
        raise ValueError("superposition vanishes")
    return WaveFunction(psi1.grid, a / math.sqrt(nrm), psi1.hbar)


# ---------------------------------------------------------------------------
# Fourier duality
# ---------------------------------------------------------------------------

def _to_momentum_amps(psi: WaveFunction) -> np.ndarray:
    """Momentum amplitudes phi(p_k) on the centered conjugate grid."""
    grid, hbar = psi.grid, psi.hbar
    pg = momentum_grid(grid, hbar)
    F = np.fft.fftshift(np.fft.fft(psi.amps))
    phase = np.exp(-1j * pg.points() * grid.x_min / hbar)
    return F * phase * grid.dx / math.sqrt(2.0 * math.pi * hbar)


def _from_momentum_amps(phi: np.ndarray, grid: GridSpec, hbar: float) -> WaveFunction:
    """Inverse of :func:`_to_momentum_amps`."""
    pg = momentum_grid(grid, hbar)
    phase = np.exp(1j * pg.points() * grid.x_min / hbar)
    F = phi * phase * math.sqrt(2.0 * math.pi * hbar) / grid.dx
    a = np.fft.ifft(np.fft.ifftshift(F))
    return WaveFunction(grid, a, hbar)


def position_distribution(rho: MixedState) -> GridMeasure:
    """rho^Q: mixture-weighted |psi|^2 dx per grid cell."""
    w = np.zeros(rho.grid.n)
    for wk, psi in rho.components:
        w += wk * np.abs(psi.amps) ** 2
    return GridMeasure(rho.grid, w * rho.grid.dx)


def momentum_distribution(rho: MixedState) -> GridMeasure:
    """rho^P on the conjugate grid; Parseval keeps total mass at 1."""
    pg = momentum_grid(rho.grid, rho.hbar)
    w = np.zeros(pg.n)
    for wk, psi in rho.components:
        w += wk * np.abs(_to_momentum_amps(psi)) ** 2
    return GridMeasure(pg, w * pg.dx)


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------

def weyl_displace(psi: WaveFunction, q: float, p: float) -> WaveFunction:
    """Displace by (q, p): position shift by q (a grid multiple), momentum boost p.

    The position shift is circular; grids are sized so wrapped tail
    amplitudes are negligible.  Norm is preserved exactly.
    """
    grid, hbar = psi.grid, psi.hbar
    kf = q / grid.dx
    k = int(round(kf))
    if abs(kf - k) > 1e-9:
        raise ValueError(f"position shift {q} is not a multiple of dx = {grid.dx}")
    a = np.roll(psi.amps, k)
    a = a * np.exp(1j * p * grid.points() / hbar)
    return WaveFunction(grid, a, hbar)


def parity(psi: WaveFunction) -> WaveFunction:
    """Reflection (amps at x move to -x); requires a grid symmetric about 0."""
    grid = psi.grid
    if abs(grid.x_min + grid.x_max) > grid.dx * (1 + 1e-9):
        raise ValueError(
            f"grid [{grid.x_min}, {grid.x_max}] is not symmetric about 0")
    mf = -2.0 * grid.x_min / grid.dx
    m = int(round(mf))
    if abs(mf - m) > 1e-6:
        raise ValueError("reflected grid points do not land on the grid")
    idx = (m - np.arange(grid.n)) % grid.n
    return WaveFunction(grid, psi.amps[idx], psi.hbar)


def displace_mixed(rho: MixedState, q: float, p: float) -> MixedState:
    """Component-wise Weyl displacement of a mixture."""
    return MixedState([(w, weyl_displace(psi, q, p)) for w, psi in rho.components])


def parity_mixed(rho: MixedState) -> MixedState:
    return MixedState([(w, parity(psi)) for w, psi in rho.components])
