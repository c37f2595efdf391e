"""Statistical and numerical verification tools.

Histograms with curve distances (L1 between densities, Kolmogorov-Smirnov
between CDFs), principal-value residuals of the saddle-point equation, and
the Coulomb-gas energy functional evaluated on explicit density curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytics import DensityCurve, constrained_density, lagrange_multipliers
from .params import BarrierSpec
from .quadrature import edge_quad, pair_log_energy

__all__ = ["Histogram", "CurveDistance", "histogram", "compare_density",
           "pv_saddle_residual", "energy_functional", "bump_perturbed"]


@dataclass(frozen=True)
class Histogram:
    """Binned samples; counts exclude out-of-range values, which are tallied
    in n_below / n_above."""

    edges: np.ndarray
    counts: np.ndarray
    total: int
    n_below: int = 0
    n_above: int = 0

    def __post_init__(self):
        if len(self.edges) != len(self.counts) + 1:
            raise ValueError("need len(edges) == len(counts) + 1")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def density(self) -> np.ndarray:
        """Per-bin density normalized over the in-range counts (integrates to 1)."""
        n_in = self.counts.sum()
        if n_in == 0:
            return np.zeros_like(self.widths)
        return self.counts / (n_in * self.widths)

    def ecdf_at_edges(self) -> np.ndarray:
        n_in = self.counts.sum()
        return np.concatenate([[0.0], np.cumsum(self.counts) / n_in])


@dataclass(frozen=True)
class CurveDistance:
    l1: float
    ks: float
    disjoint: bool = False


def histogram(samples: Sequence[float], n_bins: int, range_: tuple[float, float]) -> Histogram:
    if len(samples) == 0:
        raise ValueError("cannot histogram an empty sample list")
    if n_bins < 1:
        raise ValueError("need at least one bin")
    lo, hi = range_
    if not hi > lo:
        raise ValueError("histogram range must be a nonempty interval")
    x = np.asarray(samples, dtype=float)
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    return Histogram(edges=edges, counts=counts, total=len(x),
                     n_below=int(np.sum(x < lo)), n_above=int(np.sum(x > hi)))


def compare_density(h: Histogram, curve: DensityCurve) -> CurveDistance:
    """L1 distance between the binned density and the curve (bin-midpoint
    evaluation) plus the KS distance between the binned ECDF and the curve CDF
    at the bin edges.  Disjoint supports give the maximal L1 of 2, flagged."""
    a, b = curve.support
    if h.edges[-1] <= a or h.edges[0] >= b:
        return CurveDistance(l1=2.0, ks=1.0, disjoint=True)
    dens = h.density()
    l1 = float(np.sum(np.abs(dens - curve(h.midpoints)) * h.widths))
    ks = float(np.max(np.abs(h.ecdf_at_edges() - curve.cdf(h.edges))))
    return CurveDistance(l1=l1, ks=ks)


def pv_saddle_residual(zeta: float, x: float, excision: float = 1e-4,
                       edge_margin: float = 1e-3) -> float:
    """Residual of the saddle-point balance at an interior point x of the
    floor-constrained density: PV int rho(x')/(x - x') dx' minus the trace
    multiplier mu1(zeta).

    The principal value uses a symmetric excision window of half-width
    ``excision`` around x with the leading correction -2 h rho'(x); the two
    remaining pieces are integrated with the edge-aware substitution.
    """
    a, b = zeta, 4.0 - 3.0 * zeta
    if not (a + edge_margin < x < b - edge_margin):
        raise ValueError(f"x={x} closer than {edge_margin} to the support edge")
    barrier = BarrierSpec.min_wall(zeta)
    rho = lambda t: constrained_density(t, barrier)
    h = excision
    left = edge_quad(lambda t: rho(t) / (x - t), a, x - h)
    right = edge_quad(lambda t: rho(t) / (x - t), x + h, b)
    d = 1e-6
    rho_prime = (rho(x + d) - rho(x - d)) / (2.0 * d)
    pv = left + right - 2.0 * h * rho_prime
    _, mu1 = lagrange_multipliers(zeta)
    return pv - mu1


def energy_functional(curve: DensityCurve, zeta: float) -> float:
    """Coulomb-gas energy of a feasible density curve with a floor at zeta:

        E[rho] = (1/2) int x rho(x) dx - (1/2) iint rho rho' ln|x - x'| dx dx'

    The linear confinement term equals 1/2 on every unit-trace curve, so
    feasible perturbations probe only the pair interaction; on the
    floor-constrained equilibrium curve the value is 3/4 - ln(1-zeta)/2.
    Raises on curves violating mass/trace/positivity/support feasibility.
    """
    if curve.evaluator is None:
        raise ValueError("energy functional needs a curve with an exact evaluator")
    a, b = curve.support
    problems = []
    if a < zeta - 1e-9:
        problems.append(f"support starts at {a} left of the floor {zeta}")
    mass = curve.moment(0)
    if abs(mass - 1.0) > 1e-6:
        problems.append(f"mass {mass:.9f} != 1")
    first = curve.moment(1)
    if abs(first - 1.0) > 1e-6:
        problems.append(f"first moment {first:.9f} != 1")
    if np.any(curve.values < 0):
        problems.append("negative density values")
    if problems:
        raise ValueError("infeasible curve: " + "; ".join(problems))
    pair = pair_log_energy(curve.evaluator, a, b)
    return 0.5 * first - 0.5 * pair


def bump_perturbed(curve: DensityCurve, amplitude: float, center: float,
                   width: float) -> DensityCurve:
    """Feasible perturbation of an analytic curve: adds the second derivative
    of a C^2 compact bump, which carries zero mass and zero first moment, so
    normalization and trace are preserved exactly.

    The bump profile is w(u) = (1 - u^2)^4 on u in [-1, 1]; its second
    derivative is scaled so the perturbation's max amplitude is ``amplitude``.
    The bump support [center - width, center + width] must sit strictly inside
    the curve support, and the perturbed density must stay nonnegative.
    """
    if curve.evaluator is None:
        raise ValueError("need an analytic curve to perturb")
    a, b = curve.support
    if not (a < center - width and center + width < b):
        raise ValueError("bump support must lie strictly inside the curve support")

    def d2_profile(x):
        u = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(u) < 1.0
        out = np.zeros_like(u)
        ui = u[inside]
        # d^2/du^2 (1-u^2)^4 = 8 (1-u^2)^2 (7 u^2 - 1)
        out[inside] = 8.0 * (1.0 - ui ** 2) ** 2 * (7.0 * ui ** 2 - 1.0)
        return out / width ** 2

    peak = np.max(np.abs(d2_profile(np.linspace(center - width, center + width, 2001))))
    scale = amplitude / peak
    base = curve.evaluator

    def perturbed(x):
        return base(x) + scale * d2_profile(x)

    values = perturbed(curve.grid)
    if np.any(values < 0):
        raise ValueError("perturbation drives the density negative; shrink the amplitude")
    return DensityCurve(curve.support, curve.grid, values, evaluator=perturbed,
                        label=curve.label + "+bump")
