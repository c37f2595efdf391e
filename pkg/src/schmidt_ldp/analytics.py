"""Closed-form spectral quantities of wall-constrained random-state ensembles.

Everything here is analytic: equilibrium eigenvalue densities under a hard
floor/ceiling on the rescaled spectrum x = n*lambda, the large-deviation rate
functions Phi with P(wall holds) ~ exp(-beta n^2 Phi), Lagrange multipliers
and saddle energies of the underlying Coulomb-gas functional, conditional
average von Neumann entropies, rescaled purities, and the shifted-semicircle
model for the spectrum of the partial transpose (radius, density, mean log
negativity, NPT/PPT transition points).

Entropies and log negativities are in nats.  Densities are normalized to unit
mass and unit first moment on the rescaled axis; the unit first moment is the
trace constraint of the underlying spectra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .params import (ZETA_SPLIT, BarrierSpec, EnsembleParams, Regime, WallSide,
                     regime_of)
from .quadrature import cdf_at, edge_quad

__all__ = [
    "DensityCurve", "mp_support", "mp_density", "density_support",
    "constrained_density", "density_curve", "rate_function",
    "tail_log_probability", "lagrange_multipliers", "saddle_energy",
    "avg_entropy", "page_entropy", "avg_purity_unconstrained",
    "rescaled_purity", "model_radius", "semicircle_density",
    "semicircle_curve", "semicircle_cdf", "model_log_negativity",
    "matching_zeta", "transition_points",
]


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def mp_support(params: EnsembleParams) -> tuple[float, float]:
    """Support of the Marcenko-Pastur law on the rescaled axis x = n*lambda."""
    q = params.q
    return (1.0 + 1.0 / q - 2.0 / math.sqrt(q), 1.0 + 1.0 / q + 2.0 / math.sqrt(q))


def mp_density(x, params: EnsembleParams):
    """Marcenko-Pastur density in the rescaled variable x = n*lambda.

    Normalized to integrate to 1 in x; returns 0 outside the support.  For
    q = m/n = 1 the support is (0, 4] with an inverse-sqrt divergence at the
    origin.
    """
    q = params.q
    lo, hi = mp_support(params)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > lo) & (x < hi)
    xi = x[inside]
    out[inside] = q / (2.0 * np.pi) * np.sqrt((hi - xi) * (xi - lo)) / xi
    return out if out.ndim else float(out)


def _floor_density(x, zeta):
    # support [zeta, 4 - 3*zeta]; diverges at the floor, vanishes at the far edge
    a, b = zeta, 4.0 - 3.0 * zeta
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) / (xi - a)) / (2.0 * np.pi * (1.0 - zeta))
    return out


def _ceiling_band_density(x, zeta):
    # tight ceiling, 1 <= zeta <= 4/3: support [4 - 3*zeta, zeta] detached from 0
    a, b = 4.0 - 3.0 * zeta, zeta
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)
    xi = x[inside]
    out[inside] = np.sqrt((xi - a) / (b - xi)) / (2.0 * np.pi * (zeta - 1.0))
    return out


def _ceiling_full_density(x, zeta):
    # loose ceiling, 4/3 <= zeta <= 4: support [0, zeta], divergent at both ends
    # except at zeta = 4/3 where the density vanishes at the origin
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < zeta)
    xi = x[inside]
    num = 2.0 * zeta ** 2 + 4.0 * (zeta - 2.0) * (zeta - 2.0 * xi)
    out[inside] = num / (2.0 * np.pi * zeta ** 2 * np.sqrt(xi * (zeta - xi)))
    return out


def density_support(barrier: BarrierSpec) -> tuple[float, float]:
    """Support of the constrained equilibrium density on the rescaled axis."""
    regime = regime_of(barrier)
    z = barrier.zeta
    if regime is Regime.UNCONSTRAINED:
        return (0.0, 4.0)
    if regime is Regime.MIN_WALL:
        return (z, 4.0 - 3.0 * z)
    if regime is Regime.MAX_WALL_BAND:
        return (4.0 - 3.0 * z, z)
    return (0.0, z)


def constrained_density(x, barrier: BarrierSpec):
    """Equilibrium density of the wall-constrained Coulomb gas at rescaled x.

    Dispatches on the regime of the barrier; returns 0 outside the support.
    At the degenerate position zeta = 1 the spectrum collapses to a point
    mass at x = 1 and the value is +inf there.
    """
    regime = regime_of(barrier)
    z = barrier.zeta
    if barrier.is_degenerate:
        x = np.asarray(x, dtype=float)
        out = np.where(x == 1.0, np.inf, 0.0)
        return out if out.ndim else float(out)
    if regime is Regime.UNCONSTRAINED:
        return mp_density(x, EnsembleParams(2, 2))
    if regime is Regime.MIN_WALL:
        out = _floor_density(x, z)
    elif regime is Regime.MAX_WALL_BAND:
        out = _ceiling_band_density(x, z)
    else:
        out = _ceiling_full_density(x, z)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DensityCurve:
    """A density on a closed interval: grid samples plus (optionally) the
    exact evaluator used by quadrature-grade consumers.

    ``grid`` is strictly increasing inside the support and ``values`` are the
    nonnegative ordinates.  Analytic curves carry ``evaluator``; empirical
    ones may not, in which case moment/CDF queries interpolate the grid.
    """

    support: tuple[float, float]
    grid: np.ndarray
    values: np.ndarray
    evaluator: Optional[Callable] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        a, b = self.support
        if not b > a:
            raise ValueError("support must be a nonempty interval")
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values must have equal length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("density ordinates must be nonnegative")

    def __call__(self, x):
        if self.evaluator is not None:
            return self.evaluator(x)
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values,
                         left=0.0, right=0.0)

    def moment(self, k: int = 0) -> float:
        """k-th moment by edge-aware quadrature (exact evaluator preferred)."""
        a, b = self.support
        if k == 0:
            return edge_quad(self.__call__, a, b)
        return edge_quad(lambda x: self(x) * x ** k, a, b)

    def cdf(self, points) -> np.ndarray:
        a, b = self.support
        return cdf_at(self.__call__, a, b, np.asarray(points, dtype=float))

    def validate(self, tol: float = 1e-6) -> None:
        mass = self.moment(0)
        if abs(mass - 1.0) > tol:
            raise ValueError(f"density mass {mass} deviates from 1 beyond {tol}")


def density_curve(barrier: BarrierSpec, n_points: int = 512) -> DensityCurve:
    """Sampled analytic curve for the given barrier (grid at cell midpoints,
    so divergent endpoints stay finite)."""
    if barrier.is_degenerate:
        raise ValueError("zeta = 1 collapses the spectrum to a point mass; no curve")
    a, b = density_support(barrier)
    h = (b - a) / n_points
    grid = a + h * (np.arange(n_points) + 0.5)
    f = lambda x: constrained_density(x, barrier)
    return DensityCurve((a, b), grid, f(grid), evaluator=f,
                        label=f"{barrier.side.value}:{barrier.zeta:g}")


# ---------------------------------------------------------------------------
# rate functions and the saddle data
# ---------------------------------------------------------------------------

def rate_function(barrier: BarrierSpec) -> float:
    """Large-deviation exponent Phi(zeta): P(wall holds) ~ exp(-beta n^2 Phi).

    Diverges (returns +inf) as zeta -> 1 from either side; vanishes at the
    free endpoints zeta = 0 and zeta = 4.  Continuous across zeta = 4/3.
    """
    regime = regime_of(barrier)
    z = barrier.zeta
    if regime is Regime.UNCONSTRAINED:
        return 0.0
    if barrier.is_degenerate:
        return math.inf
    if regime is Regime.MIN_WALL:
        return -0.5 * math.log(1.0 - z)
    if regime is Regime.MAX_WALL_BAND:
        return -0.5 * math.log(z - 1.0)
    return 0.75 - 4.0 * (z - 1.0) / z ** 2 - 0.5 * math.log(z / 4.0)


def tail_log_probability(params: EnsembleParams, barrier: BarrierSpec) -> float:
    """log P(wall holds) in the large-n approximation, -beta n^2 Phi(zeta)."""
    if barrier.side is WallSide.NONE:
        raise ValueError("tail probability needs an active wall")
    return -params.beta * params.n ** 2 * rate_function(barrier)


def lagrange_multipliers(zeta: float) -> tuple[float, float]:
    """Multipliers (mu0, mu1) enforcing unit mass and unit trace in the
    floor-constrained Coulomb-gas saddle, 0 <= zeta < 1.

    mu1 is the constant value of the principal-value integral
    PV int rho(x')/(x - x') dx' on the support.
    """
    if not 0.0 <= zeta < 1.0:
        raise ValueError(f"floor position must lie in [0, 1), got {zeta}")
    mu1 = 1.0 / (2.0 * (1.0 - zeta))
    mu0 = math.log(1.0 - zeta) + (3.0 * zeta - 2.0) / (2.0 * (1.0 - zeta))
    return mu0, mu1


def saddle_energy(zeta: float) -> float:
    """Equilibrium Coulomb-gas energy with a floor at zeta: 3/4 - ln(1-zeta)/2.

    Includes the linear confinement term (1/2) int x rho dx, which equals 1/2
    on every unit-trace curve, so differences of this energy are the rate
    function: saddle_energy(z) - saddle_energy(0) == rate_function(floor at z).
    """
    if not 0.0 <= zeta < 1.0:
        raise ValueError(f"floor position must lie in [0, 1), got {zeta}")
    return 0.75 - 0.5 * math.log(1.0 - zeta)


# ---------------------------------------------------------------------------
# entropies and purities
# ---------------------------------------------------------------------------

def _entropy_from_density(density: Callable, a: float, b: float, n: int) -> float:
    # <S> = ln n - int x ln x rho(x) dx on the rescaled axis
    val = edge_quad(lambda x: x * np.log(x) * density(x), a, b)
    return math.log(n) - val


def avg_entropy(barrier: BarrierSpec, n: int) -> float:
    """Mean von Neumann entropy (nats) of spectra conditioned on the wall.

    Loose-ceiling regime has the closed form ln(4n/zeta) + zeta/4 - 3/2; the
    floor and tight-ceiling regimes are integrated numerically against the
    equilibrium density.  Unconstrained value is ln(n) - 1/2; the degenerate
    wall zeta = 1 pins the maximally mixed state, ln(n).
    """
    if n < 2:
        raise ValueError("entropy of a conditioned spectrum needs n >= 2")
    regime = regime_of(barrier)
    z = barrier.zeta
    if regime is Regime.UNCONSTRAINED:
        return math.log(n) - 0.5
    if barrier.is_degenerate:
        return math.log(n)
    if regime is Regime.MAX_WALL_FULL:
        return math.log(4.0 * n / z) + z / 4.0 - 1.5
    a, b = density_support(barrier)
    return _entropy_from_density(lambda x: constrained_density(x, barrier), a, b, n)


def page_entropy(params: EnsembleParams) -> float:
    """Exact unconditioned mean entropy: sum_{m+1..nm} 1/k - (n-1)/(2m)."""
    n, m = params.n, params.m
    harmonic = sum(1.0 / k for k in range(m + 1, n * m + 1))
    return harmonic - (n - 1) / (2.0 * m)


def avg_purity_unconstrained(params: EnsembleParams) -> float:
    """Mean purity <tr rho^2> = (n + m)/(nm + 1) of the free ensemble."""
    return (params.n + params.m) / (params.n * params.m + 1.0)


def rescaled_purity(barrier: BarrierSpec) -> float:
    """Rescaled purity P with <tr rho^2> = P/n, i.e. the second moment of the
    constrained equilibrium density."""
    regime = regime_of(barrier)
    z = barrier.zeta
    if regime is Regime.UNCONSTRAINED:
        return 2.0
    if regime in (Regime.MIN_WALL, Regime.MAX_WALL_BAND):
        return 2.0 - 2.0 * z + z ** 2
    return -z * (z - 8.0) / 8.0


# ---------------------------------------------------------------------------
# shifted-semicircle model for the partial-transpose spectrum
# ---------------------------------------------------------------------------

def model_radius(barrier: BarrierSpec) -> float:
    """Rescaled semicircle radius 2*sqrt(P - 1) of the shifted-GUE model for
    the partial-transpose spectrum; equals 2(1-zeta), 2(zeta-1) or
    2*sqrt((-zeta^2 + 8 zeta - 8)/8) per regime, and 2 when unconstrained."""
    p = rescaled_purity(barrier)
    if p < 1.0 - 1e-12:
        raise ValueError(f"purity {p} below the maximally mixed floor")
    return 2.0 * math.sqrt(max(p - 1.0, 0.0))


def semicircle_density(x, radius: float):
    """Semicircle of the given radius centred at 1 (the rescaled unit trace)."""
    if radius <= 0:
        raise ValueError("semicircle radius must be positive")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    u = x - 1.0
    inside = np.abs(u) < radius
    out[inside] = 2.0 / (np.pi * radius ** 2) * np.sqrt(radius ** 2 - u[inside] ** 2)
    return out if out.ndim else float(out)


def semicircle_cdf(x, radius: float):
    u = np.clip((np.asarray(x, dtype=float) - 1.0) / radius, -1.0, 1.0)
    out = 0.5 + (u * np.sqrt(1.0 - u ** 2) + np.arcsin(u)) / np.pi
    return out if out.ndim else float(out)


def semicircle_curve(radius: float, n_points: int = 512) -> DensityCurve:
    a, b = 1.0 - radius, 1.0 + radius
    h = (b - a) / n_points
    grid = a + h * (np.arange(n_points) + 0.5)
    f = lambda x: semicircle_density(x, radius)
    return DensityCurve((a, b), grid, f(grid), evaluator=f, label=f"semicircle:{radius:g}")


def model_log_negativity(radius: float) -> float:
    """Mean log negativity (nats) predicted by the shifted-semicircle model.

    Zero for radius <= 1 (the spectrum stays nonnegative); above that,
    ln[(2/pi) asin(1/R) + 2 (1 + 2 R^2) sqrt(1 - 1/R^2) / (3 pi R)].
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if radius <= 1.0:
        return 0.0
    r = radius
    trace_norm = (2.0 / math.pi * math.asin(1.0 / r)
                  + 2.0 / (3.0 * math.pi * r) * math.sqrt(1.0 - 1.0 / r ** 2)
                  * (1.0 + 2.0 * r ** 2))
    return math.log(trace_norm)


def matching_zeta(zeta1: float) -> float:
    """Ceiling position producing the same purity (hence the same model
    negativity) as a floor at zeta1 < 1/2: the root of
    P3(zeta2) = P1(zeta1) lying in (4 - sqrt(6), 4]."""
    if not 0.0 <= zeta1 < 0.5:
        raise ValueError(f"floor position must lie in [0, 1/2), got {zeta1}")
    return 4.0 - 2.0 * math.sqrt(2.0 * (2.0 * zeta1 - zeta1 ** 2))


def transition_points() -> tuple[float, float]:
    """Wall positions where the model radius crosses 1 (NPT/PPT transition):
    zeta = 1/2 on the floor side, 4 - sqrt(6) on the ceiling side."""
    return 0.5, 4.0 - math.sqrt(6.0)
