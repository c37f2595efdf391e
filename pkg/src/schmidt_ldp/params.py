"""Parameter containers for the constrained Schmidt-spectrum ensembles.

Conventions used throughout the package:

- ``n`` and ``m`` are the Hilbert-space dimensions of the two subsystems of
  a random bipartite pure state (``m >= n``); the reduced density matrix has
  ``n`` eigenvalues on the unit simplex.
- ``beta`` is the Dyson index of the eigenvalue measure (1 real, 2 complex,
  4 symplectic; any positive real is accepted by the analytics and the MCMC).
- Rescaled eigenvalues are ``x = n * lambda``; on that scale the
  unconstrained spectrum fills ``(0, 4]`` when ``n == m``.
- A "wall" at position ``zeta`` constrains the rescaled spectrum: a floor
  (``min`` side) forces every ``x >= zeta`` with ``0 <= zeta <= 1``, a
  ceiling (``max`` side) forces every ``x <= zeta`` with ``1 <= zeta <= 4``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

ZETA_SPLIT = 4.0 / 3.0  # ceiling position where the equilibrium support reaches the origin


@dataclass(frozen=True)
class EnsembleParams:
    """Dimensions and Dyson index of the bipartite ensemble.

    ``n = 1`` is allowed (the spectrum is then the single point 1); the
    wall-constrained machinery additionally requires ``n >= 2``.
    """

    n: int
    m: int
    beta: float = 2.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"subsystem dimension n must be >= 1, got {self.n}")
        if self.m < self.n:
            raise ValueError(f"need m >= n, got n={self.n}, m={self.m}")
        if not self.beta > 0:
            raise ValueError(f"Dyson index beta must be positive, got {self.beta}")

    @property
    def q(self) -> float:
        """Aspect ratio m/n (>= 1)."""
        return self.m / self.n


class WallSide(enum.Enum):
    NONE = "none"
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class BarrierSpec:
    """Hard wall on the rescaled spectrum: a floor (min side) or ceiling (max side).

    ``zeta`` is in rescaled units ``x = n*lambda`` and is ignored when
    ``side`` is NONE.
    """

    side: WallSide = WallSide.NONE
    zeta: float = 0.0

    def __post_init__(self):
        if self.side is WallSide.MIN and not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"floor position must lie in [0, 1], got {self.zeta}")
        if self.side is WallSide.MAX and not 1.0 <= self.zeta <= 4.0:
            raise ValueError(f"ceiling position must lie in [1, 4], got {self.zeta}")

    @classmethod
    def min_wall(cls, zeta: float) -> "BarrierSpec":
        return cls(WallSide.MIN, float(zeta))

    @classmethod
    def max_wall(cls, zeta: float) -> "BarrierSpec":
        return cls(WallSide.MAX, float(zeta))

    @classmethod
    def none(cls) -> "BarrierSpec":
        return cls(WallSide.NONE, 0.0)

    @property
    def is_degenerate(self) -> bool:
        """True when the wall pins the whole spectrum at 1/n (zeta == 1)."""
        return self.side is not WallSide.NONE and self.zeta == 1.0


class Regime(enum.Enum):
    """Shape of the constrained equilibrium density.

    MIN_WALL      floor at zeta in [0, 1]: support [zeta, 4 - 3*zeta]
    MAX_WALL_BAND ceiling at zeta in [1, 4/3]: support detaches from the
                  origin, [4 - 3*zeta, zeta]
    MAX_WALL_FULL ceiling at zeta in [4/3, 4]: support fills [0, zeta]
    """

    UNCONSTRAINED = "unconstrained"
    MIN_WALL = "min_wall"
    MAX_WALL_BAND = "max_wall_band"
    MAX_WALL_FULL = "max_wall_full"


def regime_of(barrier: BarrierSpec) -> Regime:
    """Classify a barrier; a ceiling at exactly 4/3 counts as MAX_WALL_FULL
    (the two ceiling densities coincide there)."""
    if barrier.side is WallSide.NONE:
        return Regime.UNCONSTRAINED
    if barrier.side is WallSide.MIN:
        return Regime.MIN_WALL
    return Regime.MAX_WALL_BAND if barrier.zeta < ZETA_SPLIT else Regime.MAX_WALL_FULL


@dataclass(frozen=True)
class Bipartition:
    """Split of an n-dimensional system into two factors, n = n1 * n2."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("bipartition factors must be positive")

    @property
    def dim(self) -> int:
        return self.n1 * self.n2
