"""Delay distributions on [-tau, 0]: atoms plus piecewise-constant density.

A kernel is a unit-mass nondecreasing weight over the recent past.  It
supports the exponential transform F(s) = integral of e^{s theta}, the mean
delay, and discretization onto a uniform history grid for the integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class DelayKernel:
    """Unit-mass delay distribution supported on [-tau, 0].

    atoms: tuple of (location, mass) with location in [-tau, 0], mass > 0.
    density: piecewise-constant nonnegative values on a uniform partition
    of [-tau, 0]; may be empty.  Total mass must equal 1 within 1e-12.
    """

    tau: float
    atoms: tuple[tuple[float, float], ...] = ()
    density: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        tau = float(self.tau)
        if not np.isfinite(tau) or tau < 0:
            raise ValueError(f"tau must be finite and nonnegative, got {self.tau}")
        atoms = tuple((float(loc), float(mass)) for loc, mass in self.atoms)
        for loc, mass in atoms:
            if not (mass > 0):
                raise ValueError(f"atom masses must be positive, got {mass}")
            if loc < -tau - 1e-12 or loc > 1e-12:
                raise ValueError(
                    f"atom at {loc} outside the support [{-tau}, 0]")
        dens = np.asarray(self.density, dtype=np.float64)
        if dens.size and tau == 0:
            raise ValueError("a density needs tau > 0")
        if np.any(dens < 0) or not np.all(np.isfinite(dens)):
            raise ValueError("density values must be finite and nonnegative")
        total = sum(m for _, m in atoms) + (dens.sum() * tau / dens.size if dens.size else 0.0)
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"total mass must be 1, got {total!r}")
        dens = dens.copy()
        dens.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density", dens)

    @property
    def density_edges(self) -> np.ndarray:
        """Cell boundaries of the density partition, ascending over [-tau, 0]."""
        if not self.density.size:
            return np.zeros(0)
        return np.linspace(-self.tau, 0.0, self.density.size + 1)


def kernel_discrete(tau: float) -> DelayKernel:
    """All the weight at lag tau (a single sharp delay)."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return DelayKernel(tau=tau, atoms=((-float(tau), 1.0),))


def kernel_uniform(tau: float) -> DelayKernel:
    """Weight spread evenly over the last tau time units."""
    if not (tau > 0):
        raise ValueError("uniform kernel needs tau > 0; use kernel_discrete for tau = 0")
    return DelayKernel(tau=tau, density=np.array([1.0 / tau]))


def kernel_mixture(atoms, density=(), tau: float | None = None,
                   renormalize: bool = False) -> DelayKernel:
    """General kernel from explicit atoms and a piecewise-constant density.

    If the total mass is not 1 the kernel is rejected, unless `renormalize`
    is set, in which case all masses are scaled by the total.
    """
    if tau is None:
        raise ValueError("kernel_mixture requires an explicit tau")
    tau = float(tau)
    atoms = [(float(loc), float(mass)) for loc, mass in atoms]
    dens = np.asarray(density, dtype=np.float64)
    for _, mass in atoms:
        if mass < 0:
            raise ValueError(f"atom masses must be nonnegative, got {mass}")
    if np.any(dens < 0):
        raise ValueError("density values must be nonnegative")
    total = sum(m for _, m in atoms) + (dens.sum() * tau / dens.size if dens.size else 0.0)
    if not total > 1e-300:
        # subnormal totals cannot be renormalized without losing all digits
        raise ValueError(f"total mass must be positive, got {total!r}")
    if renormalize:
        atoms = [(loc, mass / total) for loc, mass in atoms]
        dens = dens / total
    atoms = [(loc, mass) for loc, mass in atoms if mass > 0]
    return DelayKernel(tau=tau, atoms=tuple(atoms), density=dens)


def mean_delay(k: DelayKernel) -> float:
    """First moment of the kernel: minus the mass-weighted mean lag."""
    total = -sum(loc * mass for loc, mass in k.atoms)
    if k.density.size:
        edges = k.density_edges
        a, b = edges[:-1], edges[1:]
        total += float(np.sum(k.density * (a * a - b * b)) / 2.0)
    return total


def transform_F(k: DelayKernel, s: complex) -> complex:
    """F(s) = sum of e^{s theta} against the kernel; F(0) = 1 exactly."""
    s = complex(s)
    value = sum(mass * np.exp(s * loc) for loc, mass in k.atoms)
    if k.density.size:
        edges = k.density_edges
        for rho, a, b in zip(k.density, edges[:-1], edges[1:]):
            value += rho * _int_exp(a, b, s)
    return complex(value)


def transform_F_deriv(k: DelayKernel, s: complex) -> complex:
    """dF/ds = integral of theta e^{s theta}; equals -mean_delay at s = 0."""
    s = complex(s)
    value = sum(mass * loc * np.exp(s * loc) for loc, mass in k.atoms)
    if k.density.size:
        edges = k.density_edges
        for rho, a, b in zip(k.density, edges[:-1], edges[1:]):
            value += rho * _int_theta_exp(a, b, s)
    return complex(value)


def _int_exp(a: float, b: float, s: complex) -> complex:
    """integral of e^{s t} over [a, b], stable near s = 0."""
    z = s * (b - a)
    if abs(z) < 1e-3:
        # phi1(z) = (e^z - 1)/z via its series; truncation < 1e-17 here
        phi1 = 1.0 + z * (1.0 / 2.0 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
        return np.exp(s * a) * (b - a) * phi1
    return (np.exp(s * b) - np.exp(s * a)) / s


def _int_theta_exp(a: float, b: float, s: complex) -> complex:
    """integral of t e^{s t} over [a, b], stable near s = 0."""
    if abs(s) * max(abs(a), abs(b), 1.0) < 0.5:
        total = 0.0 + 0.0j
        term_a = a * a
        term_b = b * b
        power = 1.0 + 0.0j
        k = 0
        while True:
            contrib = power * (term_b - term_a) / (math.factorial(k) * (k + 2))
            total += contrib
            if abs(contrib) < 1e-18 * (1.0 + abs(total)):
                break
            k += 1
            if k > 40:
                break
            power *= s
            term_a *= a
            term_b *= b
        return total
    prim_b = np.exp(s * b) * (b / s - 1.0 / (s * s))
    prim_a = np.exp(s * a) * (a / s - 1.0 / (s * s))
    return prim_b - prim_a


# ---------------------------------------------------------------------------
# Discretization onto the history grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridProfile:
    """Kernel snapped onto the uniform history grid with spacing h.

    node_mass[m] is the atom mass attached to the node at lag m*h
    (off-grid atoms are split linearly between the two bracketing nodes);
    cell_density[m] is the average density over the cell spanning lags
    [m*h, (m+1)*h].  Masses are renormalized to total exactly 1.
    """

    h: float
    steps: int
    node_mass: np.ndarray
    cell_density: np.ndarray

    def __post_init__(self):
        for name in ("node_mass", "cell_density"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def grid_steps(k: DelayKernel, h: float) -> int:
    """Number of grid intervals covering [-tau, 0]; h must divide tau."""
    if not (h > 0):
        raise ValueError(f"grid step must be positive, got {h}")
    steps = int(round(k.tau / h))
    if abs(steps * h - k.tau) > 1e-9 * max(1.0, k.tau):
        raise ValueError(
            f"step {h} does not divide the delay span {k.tau}")
    if steps == 0 and k.density.size:
        raise ValueError(f"step {h} exceeds the delay span {k.tau}")
    return steps


def grid_profile(k: DelayKernel, h: float) -> GridProfile:
    steps = grid_steps(k, h)
    node_mass = np.zeros(steps + 1)
    for loc, mass in k.atoms:
        pos = min(max(-loc / h, 0.0), float(steps))
        lower = int(np.floor(pos))
        frac = pos - lower
        if frac < 1e-9 or lower >= steps:
            node_mass[min(lower, steps)] += mass
        else:
            node_mass[lower] += mass * (1.0 - frac)
            node_mass[lower + 1] += mass * frac
    cell_density = np.zeros(steps)
    if k.density.size:
        edges = k.density_edges
        cum = np.concatenate(([0.0], np.cumsum(k.density) * (k.tau / k.density.size)))
        grid = np.linspace(-k.tau, 0.0, steps + 1)
        cdf = np.interp(grid, edges, cum)
        cell_mass_ascending = np.diff(cdf)
        # ascending grid cell j covers lags [(steps-1-j)h, (steps-j)h]
        cell_density = cell_mass_ascending[::-1] / h
    total = node_mass.sum() + cell_density.sum() * h
    node_mass /= total
    cell_density /= total
    return GridProfile(h=h, steps=steps, node_mass=node_mass,
                       cell_density=cell_density)


def quadrature_weights(k: DelayKernel, h: float) -> np.ndarray:
    """Weights u_m over lags m*h with sum(u) = 1, approximating the kernel.

    Applying u to sampled history values reproduces the kernel-weighted
    history to second order: atoms are split linearly between bracketing
    nodes and density cells contribute trapezoid weights.
    """
    profile = grid_profile(k, h)
    u = profile.node_mass.copy()
    if profile.steps:
        half = 0.5 * h * profile.cell_density
        u[:-1] += half
        u[1:] += half
    return u / u.sum()
