"""Deterministic composite Gauss-Legendre quadrature on [0,1] with the
radial weight r^(d-1).

Panels are sized against the fastest oscillation the grid must resolve:
width <= pi/(4 * max_mode_zero) gives at least eight panels per period of
cos(max_mode_zero * r).  Node weights carry the r^(d-1) factor; the plain
Lebesgue weights are kept alongside so callers can integrate against other
radial powers (the normalizer integral uses r dr for every dimension).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .specfun import DomainError

MAX_NODES = 100_000_000


class ResolutionError(ValueError):
    """Grid cannot resolve the requested oscillation frequency."""


@dataclass(frozen=True)
class QuadratureGrid:
    d: int
    nodes: np.ndarray
    weights: np.ndarray        # Gauss-Legendre weights times r^(d-1)
    raw_weights: np.ndarray    # plain Gauss-Legendre weights (dr)
    points_per_panel: int
    max_resolved_frequency: float

    def __post_init__(self):
        for a in (self.nodes, self.weights, self.raw_weights):
            a.setflags(write=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def require_frequency(self, freq, what="integrand"):
        if freq > self.max_resolved_frequency:
            raise ResolutionError(
                f"grid resolves frequencies up to {self.max_resolved_frequency:.6g} "
                f"but {what} oscillates at {freq:.6g}; rebuild the grid with "
                f"max_mode_zero >= {freq:.6g}"
            )


def build_grid(d, max_mode_zero, points_per_panel=10):
    """Composite Gauss-Legendre grid on [0,1] resolving cos(max_mode_zero*r)."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d}")
    if max_mode_zero < np.pi:
        raise DomainError(f"max_mode_zero must be >= pi, got {max_mode_zero}")
    if points_per_panel < 8:
        raise DomainError(f"points_per_panel must be >= 8, got {points_per_panel}")
    n_panels = int(np.ceil(4.0 * max_mode_zero / np.pi))
    if n_panels * points_per_panel > MAX_NODES:
        raise DomainError(
            f"grid would need {n_panels * points_per_panel} nodes (> {MAX_NODES})"
        )
    x, w = leggauss(points_per_panel)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    a = edges[:-1, None]
    b = edges[1:, None]
    nodes = (0.5 * (b - a) * x[None, :] + 0.5 * (b + a)).ravel()
    raw = (0.5 * (b - a) * w[None, :]).ravel()
    return QuadratureGrid(
        d=int(d),
        nodes=nodes,
        weights=raw * nodes ** (d - 1),
        raw_weights=raw,
        points_per_panel=int(points_per_panel),
        max_resolved_frequency=float(max_mode_zero),
    )


def lp_norm(grid, f, p):
    """(sum_i w_i f_i^p)^(1/p) for nonnegative samples f at the grid nodes."""
    if p < 1.0:
        raise DomainError(f"lp_norm requires p >= 1, got {p}")
    f = np.asarray(f, dtype=float)
    if f.shape != grid.nodes.shape:
        raise DomainError(
            f"sample vector has shape {f.shape}, grid has {grid.nodes.shape}"
        )
    if not np.all(np.isfinite(f)):
        raise DomainError("lp_norm requires finite samples")
    if np.any(f < 0.0):
        raise DomainError("lp_norm requires nonnegative samples; pass abs(f)")
    return float(np.sum(grid.weights * f**p) ** (1.0 / p))
