"""The probabilistic side: stochastic matrices built from a Laplacian,
stationary distributions, chain iteration, and the checks tying the
matrix semigroup e^{-Lt} to its stationary row vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import AmbiguityError, DimensionError, NumericalError
from .netgraph import LaplacianData

STATIONARY_METHODS = ("adjugate", "null-vector", "power-iteration")

_NEG_CLAMP = 1e-12
_POWER_TOL = 1e-12
_POWER_MAX_ITER = 10 ** 6


def _clean_distribution(pi: np.ndarray, what: str) -> np.ndarray:
    """Clamp roundoff negatives (>= -1e-12) to zero and renormalize."""
    pi = np.asarray(pi, dtype=np.float64).copy()
    if np.min(pi) < -_NEG_CLAMP:
        raise NumericalError(
            f"{what} has a negative component {np.min(pi):.3e} beyond roundoff")
    pi[pi < 0] = 0.0
    pi = pi + 0.0  # collapse negative zeros
    total = pi.sum()
    if not total > 0:
        raise NumericalError(f"{what} sums to {total}; cannot normalize")
    return pi / total


@dataclass(frozen=True)
class StationaryDistribution:
    """Row vector pi with pi @ L = 0 and unit sum; `source` records the
    method that produced it (adjugate | null-vector | power-iteration)."""

    pi: np.ndarray
    source: str

    def __post_init__(self):
        pi = _clean_distribution(self.pi, "stationary distribution")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True)
class ChainState:
    """A probability row vector at a discrete time index."""

    pi: np.ndarray
    t: int = 0

    def __post_init__(self):
        pi = _clean_distribution(self.pi, "chain state")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)


def p_epsilon(ld: LaplacianData, eps: float) -> np.ndarray:
    """I - eps*L, stochastic exactly when 0 < eps <= 1/Delta."""
    if not (eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    if eps * ld.delta > 1.0 + 1e-12:
        raise ValueError(
            f"eps = {eps} exceeds the stochasticity bound 1/Delta = "
            f"{1.0 / ld.delta}")
    return np.eye(ld.n) - eps * ld.laplacian


def is_stochastic(m, tol: float = 1e-9) -> bool:
    """Nonnegative entries (within tol) and unit row sums (within tol)."""
    a = matcore.as_square(m)
    if np.iscomplexobj(a):
        return False
    if float(np.min(a)) < -tol:
        return False
    sums = a.sum(axis=1)
    return bool(np.all(np.abs(sums - 1.0) <= tol))


def h1_check(ld: LaplacianData) -> bool:
    """True iff zero is a simple eigenvalue of the Laplacian."""
    return matcore.eigenvalues(ld.laplacian).zero_multiplicity == 1


def stationary(ld: LaplacianData, method: str = "null-vector") -> StationaryDistribution:
    """The unique probability row vector pi with pi @ L = 0.

    Three interchangeable routes: a row of the adjugate (all rows agree for
    rank n-1 Laplacians), the left null vector from elimination, or power
    iteration on I - eps*L with eps = 0.5/Delta.
    """
    if method not in STATIONARY_METHODS:
        raise ValueError(f"unknown method {method!r}; pick one of {STATIONARY_METHODS}")
    if not h1_check(ld):
        raise AmbiguityError(
            "zero is not a simple Laplacian eigenvalue; "
            "the stationary distribution is not unique")
    lap = ld.laplacian
    if method == "adjugate":
        adj = matcore.adjugate(lap)
        row = adj[0]
        total = row.sum()
        if abs(total) <= 1e-300:
            raise NumericalError("adjugate row sums to zero; cannot normalize")
        return StationaryDistribution(pi=row / total, source=method)
    if method == "null-vector":
        v = matcore.left_null_vector(lap)
        total = v.sum()
        if abs(total) <= 1e-300:
            raise NumericalError("null vector sums to zero; cannot normalize")
        return StationaryDistribution(pi=v / total, source=method)
    eps = 0.5 / max(ld.delta, 1e-12)
    transition = p_epsilon(ld, eps)
    pi = np.full(ld.n, 1.0 / ld.n)
    for _ in range(_POWER_MAX_ITER):
        nxt = pi @ transition
        if float(np.sum(np.abs(nxt - pi))) < _POWER_TOL:
            pi = nxt
            break
        pi = nxt
    else:
        raise NumericalError(
            f"power iteration did not converge in {_POWER_MAX_ITER} steps")
    return StationaryDistribution(pi=pi, source=method)


def chain_step(state: ChainState, transition: np.ndarray) -> ChainState:
    """One step pi <- pi P of the dual chain."""
    p = matcore.as_square(transition)
    if p.shape[0] != state.pi.shape[0]:
        raise DimensionError(
            f"transition is {p.shape[0]}x{p.shape[0]} but the state has "
            f"{state.pi.shape[0]} components")
    return ChainState(pi=state.pi @ p, t=state.t + 1)


def discrete_consensus(ld: LaplacianData, x0, steps: int) -> np.ndarray:
    """Trajectory of x(t+1) = (I - L) x(t); shape (steps + 1, n).

    Converges to a consensus state when zero is a simple eigenvalue and
    Delta < 1; the iteration itself runs for any Laplacian.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (ld.n,):
        raise DimensionError(f"x0 must have shape ({ld.n},), got {x0.shape}")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    p = np.eye(ld.n) - ld.laplacian
    out = np.empty((steps + 1, ld.n))
    out[0] = x0
    for t in range(steps):
        out[t + 1] = p @ out[t]
    return out


@dataclass(frozen=True)
class DualityReport:
    """Checks of the semigroup e^{-Lt} at the sampled times.

    stochastic[i]: entries nonnegative, unit row sums at t_samples[i].
    pi_invariant[i]: pi @ e^{-Lt} returns pi (requires a unique pi).
    gap_values[i]: max-norm distance from the rank-one limit ones*pi.
    """

    t_samples: tuple[float, ...]
    h1: bool
    stochastic: tuple[bool, ...]
    pi_invariant: tuple[bool, ...]
    gap_values: tuple[float, ...]
    gap_nonincreasing: bool

    @property
    def passed(self) -> bool:
        ok = all(self.stochastic)
        if self.h1:
            ok = ok and all(self.pi_invariant) and self.gap_nonincreasing
        return ok


def duality_check(ld: LaplacianData, t_samples) -> DualityReport:
    """Verify the Markov-facing properties of the consensus semigroup."""
    times = tuple(float(t) for t in sorted(t_samples))
    if any(t < 0 for t in times):
        raise ValueError("time samples must be nonnegative")
    h1 = h1_check(ld)
    pi = stationary(ld).pi if h1 else None
    stochastic = []
    invariant = []
    gaps = []
    for t in times:
        semigroup = matcore.mat_exp(-ld.laplacian, t)
        stochastic.append(is_stochastic(semigroup, tol=1e-9))
        if pi is not None:
            invariant.append(bool(np.max(np.abs(pi @ semigroup - pi)) <= 1e-9))
            gaps.append(float(np.max(np.abs(semigroup - np.outer(np.ones(ld.n), pi)))))
        else:
            invariant.append(False)
            gaps.append(float("nan"))
    nonincreasing = h1 and all(
        gaps[i + 1] <= gaps[i] + 1e-9 for i in range(len(gaps) - 1))
    return DualityReport(
        t_samples=times, h1=h1, stochastic=tuple(stochastic),
        pi_invariant=tuple(invariant), gap_values=tuple(gaps),
        gap_nonincreasing=bool(nonincreasing))
