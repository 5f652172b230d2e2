"""Local density estimation from agent positions.

A flat (top-hat) kernel of half-width d is used everywhere: the estimate at
an agent is a scaled count of agents within distance d, self included.  The
normalization constants are pinned so the total kernel mass is one, because
every control law compares these estimates against normalized targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import _as_points, build_neighbor_index


@dataclass
class DensityEstimate:
    """Per-agent density values plus the kernel parameters that made them."""

    values: np.ndarray
    kernel_width: float
    normalization: float


@dataclass
class BoundaryDensity:
    """Per-boundary-agent chain density q_i with exact unit mass.

    q_i = 1 / (N_b * d_i) with d_i the half-sum of the two adjacent chain
    segment lengths, so that sum_i q_i d_i == 1 by construction.
    """

    values: np.ndarray
    gamma_spacing: float


def estimate_density_1d(positions, d: float) -> DensityEstimate:
    """Flat-kernel density on a line: c1 * (count within d), c1 = 1/(2 N d)."""
    if d <= 0:
        raise ValueError("kernel width d must be positive")
    x = np.asarray(positions, dtype=float)
    n = x.size
    counts = (np.searchsorted(x, x + d, side="right")
              - np.searchsorted(x, x - d, side="left"))
    c1 = 1.0 / (2.0 * n * d)
    return DensityEstimate(values=counts * c1, kernel_width=float(d), normalization=c1)


def estimate_density_2d(positions, d: float) -> DensityEstimate:
    """Flat-kernel density in the plane: c2 * (count within d), c2 = 1/(N pi d^2)."""
    if d <= 0:
        raise ValueError("kernel width d must be positive")
    pts = _as_points(positions)
    n = pts.shape[0]
    index = build_neighbor_index(pts, d)
    counts = index.degrees + 1  # kernel includes the agent itself
    c2 = 1.0 / (n * np.pi * d * d)
    return DensityEstimate(values=counts * c2, kernel_width=float(d), normalization=c2)


def density_at_points(positions, d: float, query_points) -> np.ndarray:
    """Kernel-sum field evaluated at arbitrary points (grid diagnostics only)."""
    pts = _as_points(positions)
    q = _as_points(query_points)
    index = build_neighbor_index(pts, d)
    qi, _ = index.query_points(q)
    counts = np.bincount(qi, minlength=q.shape[0])
    if pts.shape[1] == 1:
        c = 1.0 / (2.0 * pts.shape[0] * d)
    else:
        c = 1.0 / (pts.shape[0] * np.pi * d * d)
    return counts * c


def estimate_boundary_density(chain_positions) -> BoundaryDensity:
    """Inverse local-spacing density of agents along a closed chain.

    Computable from immediate chain neighbors only; the normalization
    identity sum q_i d_i = 1 holds exactly.
    """
    pts = np.asarray(chain_positions, dtype=float)
    nb = pts.shape[0]
    if nb < 3:
        raise ValueError("need at least 3 boundary agents")
    seg = np.linalg.norm(pts - np.roll(pts, 1, axis=0), axis=1)  # seg[i] = |r_i - r_{i-1}|
    if np.any(seg == 0):
        raise ValueError("zero-length chain segment")
    d_i = 0.5 * (seg + np.roll(seg, -1))
    return BoundaryDensity(values=1.0 / (nb * d_i), gamma_spacing=1.0 / nb)
