"""Weighted digraphs, their Laplacians, and scenario presets.

Edge-direction convention: ``weights[i, j]`` is the weight with which node
j influences node i (an edge j -> i).  Graph file formats often assume the
transpose, so this is worth double checking when importing data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DimensionError
from .matcore import Spectrum


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class WeightedDigraph:
    """Nonnegative interaction weights; weights[i, j] couples j -> i."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise DimensionError(f"weights must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.min(w) < 0:
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class LaplacianData:
    """Laplacian L = D - A with in-degrees d_i and Delta = max(d_i - a_ii)."""

    laplacian: np.ndarray
    degrees: np.ndarray
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "laplacian", _frozen(self.laplacian))
        object.__setattr__(self, "degrees", _frozen(self.degrees))

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    @property
    def degree_matrix(self) -> np.ndarray:
        return np.diag(self.degrees)

    @property
    def adjacency(self) -> np.ndarray:
        return self.degree_matrix - self.laplacian


def laplacian(g: WeightedDigraph) -> LaplacianData:
    """L = D - A, the in-degree vector, and the Gershgorin radius Delta."""
    w = g.weights
    degrees = w.sum(axis=1)
    lap = np.diag(degrees) - w
    delta = float(np.max(degrees - np.diag(w))) if g.n else 0.0
    return LaplacianData(laplacian=lap, degrees=degrees, delta=delta)


def gershgorin_check(ld: LaplacianData, spec: Spectrum, tol: float = 1e-9) -> bool:
    """True iff every eigenvalue lies in the disc |z - Delta| <= Delta + tol
    and every nonzero eigenvalue has real part > -tol."""
    delta = ld.delta
    scale = max(1.0, float(np.max(np.sum(np.abs(ld.laplacian), axis=1))))
    zero_tol = matcore.ZERO_EIGENVALUE_RTOL * scale
    for z in spec.eigenvalues:
        if abs(z - delta) > delta + tol:
            return False
        if abs(z) >= zero_tol and z.real <= -tol:
            return False
    return True


def preset_chain(n: int, gain: float) -> WeightedDigraph:
    """Directed chain: node i follows node i-1 (single-file ordering)."""
    _check_preset_args(n, gain)
    w = np.zeros((n, n))
    for i in range(1, n):
        w[i, i - 1] = gain
    return WeightedDigraph(w)


def preset_ring(n: int, gain: float) -> WeightedDigraph:
    """Directed ring: node i follows node i+1 (mod n)."""
    _check_preset_args(n, gain)
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i + 1) % n] = gain
    return WeightedDigraph(w)


def preset_star(n: int, gain: float) -> WeightedDigraph:
    """Star: every node i >= 2 follows node 1."""
    _check_preset_args(n, gain)
    w = np.zeros((n, n))
    w[1:, 0] = gain
    return WeightedDigraph(w)


def preset_complete(n: int, gain: float) -> WeightedDigraph:
    """All-to-all coupling with a common gain, no self-loops."""
    _check_preset_args(n, gain)
    w = np.full((n, n), gain)
    np.fill_diagonal(w, 0.0)
    return WeightedDigraph(w)


def _check_preset_args(n: int, gain: float) -> None:
    if n < 2:
        raise ValueError(f"presets need at least 2 nodes, got {n}")
    if not (gain > 0):
        raise ValueError(f"gain must be positive, got {gain}")


def linearize(base_weights, slope: float) -> WeightedDigraph:
    """Scale raw coupling weights by the response slope at the operating
    point, turning a nonlinear pairwise coupling into its linear gain."""
    if not (slope > 0):
        raise ValueError(f"slope must be positive, got {slope}")
    w = np.asarray(base_weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("base weights must be nonnegative")
    return WeightedDigraph(w * slope)
