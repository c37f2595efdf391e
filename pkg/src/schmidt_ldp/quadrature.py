"""Quadrature helpers for densities with inverse-square-root endpoints.

Every routine maps the integration variable through x = a + (b-a)*sin^2(theta),
which removes integrable endpoint divergences: dx = (b-a) sin(2*theta) dtheta
supplies a factor sqrt((x-a)(b-x)) that cancels them.  Integrands are then
smooth in theta and either adaptive quadrature or Gauss-Legendre converges at
full accuracy.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre


@lru_cache(maxsize=32)
def _gauss_rule(n: int):
    nodes, weights = roots_legendre(n)
    return nodes, weights


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested accuracy."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (error estimate {residual:.3e})")
        self.residual = residual


def edge_quad(f: Callable, a: float, b: float, *, epsabs: float = 1e-12,
              epsrel: float = 1e-12, limit: int = 400) -> float:
    """Integral of f over [a, b] where f may diverge like 1/sqrt at either end."""
    if b <= a:
        return 0.0
    span = b - a

    def g(theta):
        x = a + span * np.sin(theta) ** 2
        return f(x) * span * np.sin(2.0 * theta)

    value, err = integrate.quad(g, 0.0, np.pi / 2, epsabs=epsabs, epsrel=epsrel,
                                limit=limit)
    if err > max(1e-8, 1e-6 * abs(value)):
        raise QuadratureError("edge quadrature did not converge", err)
    return value


def gauss_edge_nodes(a: float, b: float, n: int = 512):
    """Mapped Gauss-Legendre rule: nodes x in (a, b) and weights absorbing the
    sin^2 substitution, for fixed-order integration of edge-singular densities.

    For an integrand f(x) = rho(x) * smooth(x) with sqrt-edge behaviour,
    sum(w * f(x)) converges spectrally in n.
    """
    t, wt = _gauss_rule(n)
    theta = 0.25 * np.pi * (t + 1.0)
    x = a + (b - a) * np.sin(theta) ** 2
    w = 0.25 * np.pi * wt * (b - a) * np.sin(2.0 * theta)
    return x, w


_GL16 = _gauss_rule(16)


def cdf_at(density: Callable, a: float, b: float, points: np.ndarray) -> np.ndarray:
    """Cumulative integral F(p) = int_a^p density(x) dx at the given points.

    Works in the angle variable psi with x = a + (b-a)(1 - cos psi)/2, where
    the transformed integrand is bounded and smooth; each segment between
    consecutive query points gets a fixed 16-point Gauss rule, evaluated in
    one vectorized pass.  The density callable must accept arrays.
    """
    points = np.asarray(points, dtype=float)
    span = b - a
    if span <= 0:
        return np.where(points >= b, 1.0, 0.0)
    clipped = np.clip(points, a, b)
    psi_pts = np.arccos(np.clip(1.0 - 2.0 * (clipped - a) / span, -1.0, 1.0))
    order = np.argsort(psi_pts)
    psi_sorted = psi_pts[order]
    edges = np.concatenate([[0.0], psi_sorted])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes, weights = _GL16
    psi = mid[:, None] + half[:, None] * nodes[None, :]
    x = a + span * (1.0 - np.cos(psi)) / 2.0
    g = density(x.ravel()).reshape(psi.shape) * span * np.sin(psi) / 2.0
    segments = (g @ weights) * half
    out = np.empty_like(psi_pts)
    out[order] = np.cumsum(segments)
    return out


def log_kernel_coefficients(density: Callable, a: float, b: float, *,
                            k_max: int = 1024, n_nodes: int = 4096):
    """Moments of a density against the cosine basis of its support.

    With x = a + (b-a)(1 - cos psi)/2 the logarithmic pair kernel expands as

        ln|x - x'| = ln((b-a)/4) - sum_{k>=1} (2/k) cos(k psi) cos(k psi'),

    so the double integral iint rho rho' ln|x-x'| equals
    ln((b-a)/4) * c0^2 - 2 * sum_k c_k^2 / k with c_k = int rho(x) cos(k psi(x)) dx.
    Returns (c0, c, m1) where c0 is the mass, c the k = 1..k_max coefficients
    and m1 the first moment; all computed with a fixed Gauss rule in psi.
    """
    t, wt = _gauss_rule(n_nodes)
    psi = 0.5 * np.pi * (t + 1.0)
    w = 0.5 * np.pi * wt
    span = b - a
    x = a + span * (1.0 - np.cos(psi)) / 2.0
    g = density(x) * span * np.sin(psi) / 2.0
    wg = w * g
    c0 = float(np.sum(wg))
    m1 = float(np.sum(wg * x))
    ks = np.arange(1, k_max + 1)
    c = np.cos(np.outer(ks, psi)) @ wg
    return c0, c, m1


def pair_log_energy(density: Callable, a: float, b: float, *, k_max: int = 1024,
                    n_nodes: int = 4096, tail_tol: float = 1e-9) -> float:
    """iint rho(x) rho(x') ln|x - x'| dx dx' via the cosine expansion above."""
    c0, c, _ = log_kernel_coefficients(density, a, b, k_max=k_max, n_nodes=n_nodes)
    ks = np.arange(1, k_max + 1)
    tail = np.max(np.abs(c[-8:])) if k_max >= 8 else np.abs(c[-1])
    if tail ** 2 / k_max > tail_tol:
        raise QuadratureError("log-kernel cosine series truncated too early", tail)
    return float(np.log((b - a) / 4.0) * c0 * c0 - 2.0 * np.sum(c * c / ks))
