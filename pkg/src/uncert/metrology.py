"""Uncertainty functionals: calibration error, error bar width, resolution
width, Werner-style distances, the lower-bound formulas, and the joint
verification / optimization drivers.

Calibration follows the bench procedure: feed the kernel states localized
within a shrinking interval ladder, record the smallest output window that
keeps confidence 1 - eps for every probe, and report the value at the
smallest rung.  The sup over localized states is estimated from sharply
localized probes (point and box states, optionally truncated Gaussians),
which are the extreme cases for interval masses of shift-covariant kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grids import GridMeasure, GridSpec, centered_width, overall_width
from .observables import ObservableKernel
from .states import (
    MixedState,
    box_state,
    gaussian_state,
    momentum_box_state,
    momentum_grid,
    momentum_point_state,
    point_state,
)


class LadderInconsistencyError(ValueError):
    """Calibration errors failed to decrease with the localization width."""


class RelationViolationError(AssertionError):
    """A proven inequality failed beyond the grid tolerance."""


# ---------------------------------------------------------------------------
# Configuration / report types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfidencePair:
    eps1: float
    eps2: float

    def __post_init__(self):
        for e in (self.eps1, self.eps2):
            if not 0.0 < e < 1.0:
                raise ValueError(f"confidence levels must lie in (0, 1), got {e}")

    @property
    def valid_bound(self) -> bool:
        return self.eps1 + self.eps2 < 1.0


@dataclass(frozen=True)
class CalibrationConfig:
    """Probe schedule for calibration: delta ladder, centers, probe shape.

    delta_ladder is strictly decreasing; probe widths are interpreted in
    the outcome units of the kernel axis (position or momentum).
    """

    delta_ladder: tuple
    probe_centers: tuple
    grid: GridSpec
    hbar: float = 1.0
    probe_kind: str = "box"   # "box" | "truncated_gaussian"
    confidence: float = 0.05

    def __post_init__(self):
        ladder = tuple(float(d) for d in self.delta_ladder)
        if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("delta ladder must be a nonempty decreasing sequence")
        if any(d <= 0 for d in ladder):
            raise ValueError("delta ladder entries must be positive")
        if self.probe_kind not in ("box", "truncated_gaussian"):
            raise ValueError(f"unknown probe kind {self.probe_kind!r}")
        object.__setattr__(self, "delta_ladder", ladder)
        object.__setattr__(self, "probe_centers", tuple(float(c) for c in self.probe_centers))

    def for_axis(self, axis: str) -> "CalibrationConfig":
        """Rescale the ladder (given in grid-step units of the q axis) to an axis."""
        if axis == "q":
            return self
        dp = momentum_grid(self.grid, self.hbar).dx
        scale = dp / self.grid.dx
        return CalibrationConfig(
            tuple(d * scale for d in self.delta_ladder),
            tuple(c * scale for c in self.probe_centers),
            self.grid, self.hbar, self.probe_kind, self.confidence)


@dataclass(frozen=True)
class ErrorBarResult:
    value: float
    ladder: tuple          # (delta, width) pairs, delta decreasing
    spread: float          # max - min over the finite ladder values


@dataclass(frozen=True)
class AxisWidths:
    overall: float
    resolution: float
    error_bar: float
    error_bar_spread: float
    werner: float


@dataclass(frozen=True)
class WidthReport:
    scenario_id: str
    eps: ConfidencePair
    axis_q: AxisWidths
    axis_p: AxisWidths
    product_error_bar: float
    product_resolution: float
    bound_simple: float
    bound_uffink: float
    margin_simple: float
    margin_uffink: float
    passed: bool
    note: str = ""


# ---------------------------------------------------------------------------
# Lower bounds
# ---------------------------------------------------------------------------

def bound_simple(eps: ConfidencePair, hbar: float) -> float:
    """2*pi*hbar*(1 - eps1 - eps2)^2; zero once eps1 + eps2 >= 1."""
    if not eps.valid_bound:
        return 0.0
    return 2.0 * math.pi * hbar * (1.0 - eps.eps1 - eps.eps2) ** 2


def bound_uffink(eps: ConfidencePair, hbar: float) -> float:
    """Sharper bound 2*pi*hbar*(sqrt((1-e1)(1-e2)) - sqrt(e1 e2))^2."""
    if not eps.valid_bound:
        return 0.0
    root = math.sqrt((1.0 - eps.eps1) * (1.0 - eps.eps2)) - math.sqrt(eps.eps1 * eps.eps2)
    return 2.0 * math.pi * hbar * root**2


# ---------------------------------------------------------------------------
# Probe families
# ---------------------------------------------------------------------------

def localized_probes(axis: str, center: float, delta: float, grid: GridSpec,
                     hbar: float, kind: str = "box") -> list:
    """States with the axis distribution supported inside [center +- delta/2].

    Point states at the interval edges and a few interior translates
    approach the sup over localized states; the full-width box (or a
    truncated Gaussian) is kept as a spread-out representative.
    """
    if axis == "q":
        axis_grid = grid
        point = lambda c: point_state(c, grid, hbar)
        box = lambda c, w: box_state(c, w, grid, hbar)
    else:
        axis_grid = momentum_grid(grid, hbar)
        point = lambda c: momentum_point_state(c, grid, hbar)
        box = lambda c, w: momentum_box_state(c, w, grid, hbar)
    step = axis_grid.dx
    if delta < 2 * step:
        raise ValueError(f"delta {delta} below the 2-cell minimum {2 * step}")
    # edge probes: outermost axis-grid points still inside the closed interval
    pts = axis_grid.points()
    tol = 1e-9 * step
    inside = pts[(pts >= center - delta / 2 - tol) & (pts <= center + delta / 2 + tol)]
    if inside.size == 0:
        raise ValueError("localization interval contains no grid point")
    lo, hi = float(inside[0]), float(inside[-1])
    centers = sorted({lo, hi, float(inside[inside.size // 2]),
                      float(inside[inside.size // 4])})
    probes = [MixedState.pure(point(c)) for c in centers]
    if kind == "box" and hi - lo >= 2 * step:
        probes.append(MixedState.pure(box((lo + hi) / 2, hi - lo)))
    elif kind == "truncated_gaussian":
        probes.append(_truncated_gaussian_probe(axis, center, delta, grid, hbar))
    return probes


def _truncated_gaussian_probe(axis, center, delta, grid, hbar) -> MixedState:
    if axis != "q":
        raise ValueError("truncated Gaussian probes are position-axis only")
    x = grid.points()
    sigma = delta / 6.0
    a = np.exp(-((x - center) ** 2) / (4.0 * sigma**2)).astype(complex)
    a[np.abs(x - center) > delta / 2.0 + 1e-9 * grid.dx] = 0.0
    a /= math.sqrt(float(np.sum(np.abs(a) ** 2) * grid.dx))
    from .states import WaveFunction
    return MixedState.pure(WaveFunction(grid, a, hbar))


def resolution_probes(kernel: ObservableKernel, grid: GridSpec, hbar: float,
                      centers=(0.0,)) -> list:
    """Sharply localized probes used to approach the resolution infimum."""
    probes = []
    for c in centers:
        if kernel.axis == "q":
            probes.append(MixedState.pure(point_state(c, grid, hbar)))
            probes.append(MixedState.pure(box_state(c, 2 * grid.dx, grid, hbar)))
        else:
            probes.append(MixedState.pure(momentum_point_state(c, grid, hbar)))
    return probes


# ---------------------------------------------------------------------------
# Width functionals
# ---------------------------------------------------------------------------

def resolution_width(kernel: ObservableKernel, eps: float, probe_search,
                     centers=None) -> float:
    """Smallest window some probe state concentrates the outcome into.

    For translation-covariant kernels all window centers are equivalent and
    the optimum over the family is returned; otherwise the worst case over
    the supplied window centers is taken.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    probes = list(probe_search)
    if not probes:
        raise ValueError("probe family is empty")
    if kernel.covariant or centers is None:
        return min(overall_width(kernel.outcome_distribution(rho), eps) for rho in probes)
    worst = 0.0
    for x in centers:
        best = min(centered_width(kernel.outcome_distribution(rho), x, eps)
                   for rho in probes)
        worst = max(worst, best)
    return worst


def calibration_error(kernel: ObservableKernel, eps: float, delta: float,
                      cfg: CalibrationConfig) -> float:
    """Smallest output window covering, with confidence 1 - eps, every probe
    localized within delta of its nominal value.

    Returns inf when no window inside the scenario grid reaches the
    confidence target (infinite error at desk scale).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    centers = (0.0,) if kernel.covariant else cfg.probe_centers
    worst = 0.0
    for x in centers:
        for rho in localized_probes(kernel.axis, x, delta, cfg.grid, cfg.hbar,
                                    cfg.probe_kind):
            w = centered_width(kernel.outcome_distribution(rho), x, eps)
            worst = max(worst, w)
    return worst


def error_bar_width(kernel: ObservableKernel, eps: float,
                    cfg: CalibrationConfig) -> ErrorBarResult:
    """Calibration error along the shrinking delta ladder.

    The error must not increase as delta decreases (monotonicity of the
    calibration functional); the value at the smallest rung is reported,
    with the ladder spread as the numerical uncertainty.
    """
    ladder = []
    step = cfg.grid.dx if kernel.axis == "q" else momentum_grid(cfg.grid, cfg.hbar).dx
    for delta in cfg.delta_ladder:
        ladder.append((delta, calibration_error(kernel, eps, delta, cfg)))
    vals = [w for _, w in ladder]
    for coarse, fine in zip(vals, vals[1:]):
        if fine > coarse + 2 * step + 1e-9:
            raise LadderInconsistencyError(
                f"calibration error grew from {coarse} to {fine} as delta shrank")
    finite = [v for v in vals if math.isfinite(v)]
    spread = (max(finite) - min(finite)) if finite else float("inf")
    return ErrorBarResult(vals[-1], tuple(ladder), spread)


# ---------------------------------------------------------------------------
# Werner-style distances
# ---------------------------------------------------------------------------

def werner_distance_covariant(mu: GridMeasure) -> float:
    """Closed-form distance of a shift-covariant smearing from the sharp
    observable: the first absolute moment of the smearing measure."""
    return float(np.dot(np.abs(mu.grid.points()), mu.weights))


def _check_lipschitz(h, grid: GridSpec):
    vals = np.asarray(h(grid.points()), dtype=float)
    if np.max(np.abs(np.diff(vals))) > grid.dx * (1.0 + 1e-9):
        raise ValueError("hat function is not 1-Lipschitz on the grid")
    return vals


def werner_distance_lower_bound(k1: ObservableKernel, k2: ObservableKernel,
                                states, hats) -> float:
    """Certified lower bound on the observable distance from finite families
    of states and 1-Lipschitz hat functions."""
    best = 0.0
    for rho in states:
        d1 = k1.outcome_distribution(rho)
        d2 = k2.outcome_distribution(rho)
        for h in hats:
            v1 = _check_lipschitz(h, d1.grid)
            v2 = _check_lipschitz(h, d2.grid)
            gap = abs(float(np.dot(v1, d1.weights)) - float(np.dot(v2, d2.weights)))
            best = max(best, gap)
    return best


def clipped_identity(radius: float):
    """Hat h(x) = clip(x, -radius, radius); 1-Lipschitz and bounded."""
    return lambda x: np.clip(x, -radius, radius)


def tent(center: float, height: float):
    """Hat rising to `height` at `center` with unit slopes."""
    return lambda x: np.clip(height - np.abs(np.asarray(x) - center), 0.0, None)


@dataclass(frozen=True)
class DistanceErrorReport:
    error_bar: float
    distance: float
    rhs: float
    tolerance: float
    passed: bool


def check_distance_error_inequality(kernel: ObservableKernel, eps: float,
                                    cfg: CalibrationConfig) -> DistanceErrorReport:
    """Verify error_bar_width <= (2/eps) * distance + grid tolerance for a
    covariant kernel with closed-form distance."""
    mu = kernel.smearing_measure(cfg.grid, cfg.hbar)
    if mu is None or not kernel.covariant:
        raise ValueError("closed-form distance needs a covariant smeared kernel")
    dist = werner_distance_covariant(mu)
    eb = error_bar_width(kernel, eps, cfg).value
    step = cfg.grid.dx if kernel.axis == "q" else momentum_grid(cfg.grid, cfg.hbar).dx
    tol = 2.0 * step
    rhs = (2.0 / eps) * dist + tol
    report = DistanceErrorReport(eb, dist, rhs, tol, eb <= rhs)
    if not report.passed:
        raise RelationViolationError(
            f"error bar {eb} exceeds (2/eps)*distance + tol = {rhs}")
    return report


# ---------------------------------------------------------------------------
# Joint verification driver
# ---------------------------------------------------------------------------

def verify_joint_ur(gen: MixedState, eps: ConfidencePair, cfg: CalibrationConfig,
                    scenario_id: str = "scenario", kernels=None) -> WidthReport:
    """Width report for the joint observable generated by gen (or for an
    explicitly supplied kernel pair, e.g. warped marginals).

    Checks that both the error-bar product and the resolution product clear
    the simple lower bound, up to the per-axis one-cell width slack.
    """
    from .observables import PhaseMarginal

    grid, hbar = gen.grid, gen.hbar
    dp = momentum_grid(grid, hbar).dx
    if kernels is None:
        kq = PhaseMarginal(gen, "q")
        kp = PhaseMarginal(gen, "p")
    else:
        kq, kp = kernels

    def axis_widths(kernel, e, centers):
        probes = resolution_probes(kernel, grid, hbar, centers)
        res = resolution_width(kernel, e, probes,
                               centers=None if kernel.covariant else centers)
        eb = error_bar_width(kernel, e, cfg.for_axis(kernel.axis))
        mu = kernel.smearing_measure(grid, hbar)
        ow = overall_width(mu, e) if mu is not None else 0.0
        wd = werner_distance_covariant(mu) if mu is not None else 0.0
        return AxisWidths(ow, res, eb.value, eb.spread, wd)

    centers_q = cfg.probe_centers or (0.0,)
    centers_p = cfg.for_axis("p").probe_centers or (0.0,)
    aq = axis_widths(kq, eps.eps1, centers_q)
    ap = axis_widths(kp, eps.eps2, centers_p)

    prod_eb = aq.error_bar * ap.error_bar
    prod_res = aq.resolution * ap.resolution
    bs = bound_simple(eps, hbar)
    bu = bound_uffink(eps, hbar)
    # one grid cell per interval endpoint, per axis, propagated to the product
    slack = 2.0 * (grid.dx * ap.error_bar + dp * aq.error_bar) + \
        2.0 * (grid.dx * ap.resolution + dp * aq.resolution)
    note = ""
    if not eps.valid_bound:
        note = "no positive bound"
    passed = (prod_eb >= bs - slack) and (prod_res >= bs - slack)
    return WidthReport(scenario_id, eps, aq, ap, prod_eb, prod_res, bs, bu,
                       prod_eb - bs, prod_eb - bu, passed, note)


# ---------------------------------------------------------------------------
# Width-product minimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateFamily:
    """Finite-box parameterized state family for the tightness probe."""

    names: tuple
    bounds: tuple            # ((lo, hi), ...) matching names
    build: callable = field(compare=False)

    def clip(self, params):
        return tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(params, self.bounds))


@dataclass(frozen=True)
class MinimizeResult:
    params: tuple
    product: float
    ratio_simple: float
    ratio_uffink: float


_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _golden_section(f, a, b, iters=40):
    c = b - (b - a) / _GOLDEN
    d = a + (b - a) / _GOLDEN
    for _ in range(iters):
        if f(c) < f(d):
            b = d
        else:
            a = c
        c = b - (b - a) / _GOLDEN
        d = a + (b - a) / _GOLDEN
    return 0.5 * (a + b)


def minimize_width_product(family: StateFamily, eps: ConfidencePair,
                           hbar: float = 1.0, sweeps: int = 3) -> MinimizeResult:
    """Derivative-free coordinate descent (golden section, with restarts)
    of the overall-width product over the family's parameter box."""
    from .states import momentum_distribution, position_distribution

    def objective(params):
        try:
            rho = family.build(family.clip(params))
            wq = overall_width(position_distribution(rho), eps.eps1)
            wp = overall_width(momentum_distribution(rho), eps.eps2)
            prod = wq * wp
        except ValueError:
            return float("inf")
        return prod if math.isfinite(prod) else float("inf")

    starts = [tuple(0.5 * (lo + hi) for lo, hi in family.bounds),
              tuple(0.25 * hi + 0.75 * lo for lo, hi in family.bounds),
              tuple(0.75 * hi + 0.25 * lo for lo, hi in family.bounds)]
    best_params, best_val = None, float("inf")
    for start in starts:
        params = list(start)
        for _ in range(sweeps):
            for i, (lo, hi) in enumerate(family.bounds):
                def f1(v, i=i):
                    trial = list(params)
                    trial[i] = v
                    return objective(tuple(trial))
                params[i] = _golden_section(f1, lo, hi)
        val = objective(tuple(params))
        if val < best_val:
            best_params, best_val = tuple(params), val
    bs = bound_simple(eps, hbar)
    bu = bound_uffink(eps, hbar)
    return MinimizeResult(best_params, best_val,
                          best_val / bs if bs > 0 else float("inf"),
                          best_val / bu if bu > 0 else float("inf"))
