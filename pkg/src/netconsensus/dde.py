"""Delayed consensus integrators and their bookkeeping.

Two linear models over a weighted digraph, both driven by a unit-mass
delay kernel eta on [-tau, 0]:

  transmission-delayed neighbors:  x' = -D x(t) + A * int x(t+theta) d eta
  delayed coupling term:           x' = -L * int x(t+theta) d eta

Integration is classical 4-stage Runge-Kutta with the method of steps on a
uniform grid that the delay span divides exactly.  Delayed stage values come
from cubic Hermite interpolation of the committed history, so every step is
explicit.  The kernel integral is discretized once into per-node weights;
an atom at lag zero acts on the current stage value.

The conserved first integral of the transmission-delayed model,

  q = <pi, x(t)> + <pi D, int of x over the recent past weighted by the
      kernel's cumulative mass>,

is evaluated with derivative-corrected trapezoid quadrature (two-point
Hermite cells), which keeps the measured drift of q at the integrator's own
fourth order rather than polluting it with second-order quadrature noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel as kern_mod
from . import markov
from . import matcore
from .errors import DimensionError, NumericalError
from .kernel import DelayKernel
from .netgraph import LaplacianData

BLOWUP_FACTOR = 1e6
DETECT_TOL = 1e-8


@dataclass(frozen=True)
class HistoryTrajectory:
    """Sampled solution on the uniform grid t = -tau + m*h.

    `samples[m]` is the state at grid index m; `derivs[m]` holds the
    right-hand derivative there (the sampled history slope for t < 0, the
    model right-hand side for t >= 0).  `end_slope` is the left derivative
    of the initial function at t = 0, which differs from derivs[zero_index]
    because solutions generically leave the initial function with a corner.
    """

    h: float
    t_start: float
    samples: np.ndarray
    derivs: np.ndarray
    end_slope: np.ndarray
    zero_index: int
    diverged: bool = False
    blowup_time: float | None = None

    def __post_init__(self):
        for name in ("samples", "derivs", "end_slope"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def t_end(self) -> float:
        return self.t_start + (self.samples.shape[0] - 1) * self.h

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.h * np.arange(self.samples.shape[0])

    def index_of(self, t: float) -> int:
        """Grid index of time t; t must sit on the grid within rounding."""
        pos = (t - self.t_start) / self.h
        idx = int(round(pos))
        if idx < 0 or idx >= self.samples.shape[0] or abs(pos - idx) > 1e-6:
            raise ValueError(
                f"time {t} is outside the stored grid "
                f"[{self.t_start}, {self.t_end}] with step {self.h}")
        return idx

    def value_at(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation of the stored solution."""
        pos = (t - self.t_start) / self.h
        if pos < -1e-9 or pos > self.samples.shape[0] - 1 + 1e-9:
            raise ValueError(f"time {t} is outside the stored trajectory")
        j = min(int(np.floor(pos)), self.samples.shape[0] - 2)
        j = max(j, 0)
        c = pos - j
        x0, x1 = self.samples[j], self.samples[j + 1]
        f0 = self.derivs[j]
        f1 = self.end_slope if j + 1 == self.zero_index else self.derivs[j + 1]
        h00 = 1 + c * c * (2 * c - 3)
        h10 = c * (1 + c * (c - 2))
        h01 = c * c * (3 - 2 * c)
        h11 = c * c * (c - 1)
        return h00 * x0 + h10 * self.h * f0 + h01 * x1 + h11 * self.h * f1


# ---------------------------------------------------------------------------
# History functions
# ---------------------------------------------------------------------------

def constant_history(values):
    vals = np.asarray(values, dtype=np.float64)
    return lambda t: vals


def affine_history(intercept, slope):
    b = np.asarray(intercept, dtype=np.float64)
    a = np.asarray(slope, dtype=np.float64)
    return lambda t: b + a * t


def polynomial_history(coefficients):
    """Per-node polynomial histories; coefficients[i] = [c0, c1, ...]."""
    rows = [np.asarray(c, dtype=np.float64) for c in coefficients]
    def evaluate(t):
        return np.array([float(np.polyval(c[::-1], t)) for c in rows])
    return evaluate


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def simulate_propagation(ld: LaplacianData, kern: DelayKernel, phi,
                         t_end: float, h: float) -> HistoryTrajectory:
    """Integrate x' = -D x(t) + A * (kernel-weighted past of x).

    Self-weights must be zero: a self-connection cannot see its own state
    with a transmission lag.
    """
    adj = ld.adjacency
    scale = max(float(np.max(np.abs(adj))), 1.0)
    if float(np.max(np.abs(np.diag(adj)))) > 1e-12 * scale:
        raise ValueError(
            "transmission-delay model requires zero diagonal weights")
    return _integrate(adj, ld.degrees, ld.n, kern, phi, t_end, h)


def simulate_processing(ld: LaplacianData, kern: DelayKernel, phi,
                        t_end: float, h: float) -> HistoryTrajectory:
    """Integrate x' = -L * (kernel-weighted past of x)."""
    return _integrate(-ld.laplacian, np.zeros(ld.n), ld.n, kern, phi,
                      t_end, h)


def _sample_history(phi, n: int, tau: float, h: float, steps: int):
    """Sample phi and its slope on the grid covering [-tau, 0]."""
    xs = np.empty((steps + 1, n))
    for m in range(steps + 1):
        v = np.asarray(phi(-tau + m * h), dtype=np.float64)
        if v.shape != (n,):
            raise DimensionError(
                f"history function must return shape ({n},), got {v.shape}")
        xs[m] = v
    fs = np.zeros((steps + 1, n))
    if steps == 0:
        return xs, fs, np.zeros(n)
    d = min(1e-6 * max(1.0, tau), tau / 4.0)
    for m in range(steps + 1):
        t = -tau + m * h
        if t - d >= -tau and t + d <= 0.0:
            fs[m] = (np.asarray(phi(t + d)) - np.asarray(phi(t - d))) / (2 * d)
        elif t - d < -tau:
            fs[m] = (-3 * np.asarray(phi(t)) + 4 * np.asarray(phi(t + d))
                     - np.asarray(phi(t + 2 * d))) / (2 * d)
        else:
            fs[m] = (3 * np.asarray(phi(t)) - 4 * np.asarray(phi(t - d))
                     + np.asarray(phi(t - 2 * d))) / (2 * d)
    end_slope = fs[steps].copy()
    return xs, fs, end_slope


def _integrate(coupling: np.ndarray, local: np.ndarray, n: int,
               kern: DelayKernel, phi, t_end: float,
               h: float) -> HistoryTrajectory:
    """Method-of-steps RK4 for x' = coupling @ (delayed integral) - local * x.

    The kernel integral is discretized to fourth order: node values carry
    trapezoid/atom weights u_m and, when the kernel has a density, node
    derivatives carry the h^2/12 endpoint corrections of each grid cell
    (split per side, because the solution's slope jumps at t = 0).  The
    correction weight at lag zero multiplies the stage's own derivative,
    which makes each stage a constant linear system, factored once.
    """
    if not (h > 0):
        raise ValueError(f"step must be positive, got {h}")
    if not (t_end > 0):
        raise ValueError(f"horizon must be positive, got {t_end}")
    profile = kern_mod.grid_profile(kern, h)
    steps_back = profile.steps
    tau = steps_back * h
    n_steps = int(np.ceil(t_end / h - 1e-9))

    weights = profile.node_mass.copy()
    if steps_back:
        half_cell = 0.5 * h * profile.cell_density
        weights[:-1] += half_cell
        weights[1:] += half_cell
    weights /= weights.sum()
    # Derivative weights: +/- rho h^2/12 at the old/new end of each cell.
    v_old = np.zeros(steps_back + 1)
    v_new = np.zeros(steps_back + 1)
    if steps_back:
        corr = (h * h / 12.0) * profile.cell_density
        v_old[1:] = corr
        v_new[:-1] = -corr
    v_sum = v_old + v_new
    has_density = bool(np.any(profile.cell_density))

    xs, fs, end_slope = _sample_history(phi, n, tau, h, steps_back)
    total = steps_back + n_steps + 1
    x = np.empty((total, n))
    f = np.empty((total, n))
    x[:steps_back + 1] = xs
    f[:steps_back + 1] = fs
    zero_index = steps_back

    u0 = weights[0]
    tail = weights[1:]
    tail_rev = tail[::-1].copy()
    v_tail = v_sum[1:]
    v_tail_rev = v_tail[::-1].copy()
    nz = np.nonzero(tail)[0] + 1  # lags with nonzero weight, in units of h
    sparse = (not has_density) and nz.size <= 16

    # Stage system (I - v_new[0] * coupling) k = coupling @ base - local * y.
    v0 = v_new[0]
    stage_lu = None
    if v0 != 0.0:
        stage_lu = matcore._lu_factor(np.eye(n) - v0 * coupling)

    def stage_rhs(y, base):
        b = coupling @ base - local * y
        if stage_lu is None:
            return b
        return matcore._lu_solve(stage_lu[0], stage_lu[1], b)

    def rest_at_grid(i):
        """Committed part of the integral at the grid time t_i: node values
        u_m x(t_i - mh) plus derivative corrections, for lags m >= 1."""
        if steps_back == 0:
            return np.zeros(n)
        if sparse:
            out = np.zeros(n)
            for m in nz:
                out += tail[m - 1] * x[i - m]
            return out
        out = tail_rev @ x[i - steps_back:i] + v_tail_rev @ f[i - steps_back:i]
        m0 = i - zero_index
        if 1 <= m0 <= steps_back:
            out += v_new[m0] * (end_slope - f[zero_index])
        return out

    def rest_at_half(i):
        """Committed part of the integral at t_i + h/2, using cubic Hermite
        midpoint values and slopes of the stored history."""
        if steps_back == 0:
            return np.zeros(n)
        if sparse:
            out = np.zeros(n)
            for m in nz:
                j = i - m
                fr = end_slope if j + 1 == zero_index else f[j + 1]
                mid = 0.5 * (x[j] + x[j + 1]) + (h / 8.0) * (f[j] - fr)
                out += tail[m - 1] * mid
            return out
        j0 = i - steps_back
        f_right = f[j0 + 1:i + 1]
        if j0 + 1 <= zero_index <= i:
            f_right = f_right.copy()
            f_right[zero_index - (j0 + 1)] = end_slope
        x_left = x[j0:i]
        x_right = x[j0 + 1:i + 1]
        f_left = f[j0:i]
        mids = 0.5 * (x_left + x_right) + (h / 8.0) * (f_left - f_right)
        out = tail_rev @ mids
        if has_density:
            slopes = (1.5 / h) * (x_right - x_left) - 0.25 * (f_left + f_right)
            out += v_tail_rev @ slopes
            out += _kink_cell_correction(i)
        return out

    def _kink_cell_correction(i):
        """At half-step times one kernel cell straddles t = 0, where the
        solution leaves the initial function with a corner sitting at the
        cell center.  Replace that cell's rule by the two half-cell rules
        split at the corner (using the one-sided slopes on each side)."""
        m0 = i - zero_index
        if m0 < 1 or m0 > steps_back - 1:
            return 0.0
        rho = profile.cell_density[m0]
        if rho == 0.0:
            return 0.0
        z = zero_index
        x_mid_l = 0.5 * (x[z - 1] + x[z]) + (h / 8.0) * (f[z - 1] - end_slope)
        d_mid_l = (1.5 / h) * (x[z] - x[z - 1]) - 0.25 * (f[z - 1] + end_slope)
        x_mid_r = 0.5 * (x[z] + x[z + 1]) + (h / 8.0) * (f[z] - f[z + 1])
        d_mid_r = (1.5 / h) * (x[z + 1] - x[z]) - 0.25 * (f[z] + f[z + 1])
        unsplit = (0.5 * h * (x_mid_l + x_mid_r)
                   + (h * h / 12.0) * (d_mid_l - d_mid_r))
        split = (0.25 * h * (x_mid_l + x[z]) + (h * h / 48.0) * (d_mid_l - end_slope)
                 + 0.25 * h * (x[z] + x_mid_r) + (h * h / 48.0) * (f[z] - d_mid_r))
        return rho * (split - unsplit)

    base0 = u0 * x[zero_index] + rest_at_grid(zero_index) + v0 * end_slope
    f[zero_index] = coupling @ base0 - local * x[zero_index]
    initial_norm = max(float(np.max(np.abs(xs))), 1e-30)
    diverged = False
    blowup_time = None

    last = zero_index
    for i in range(zero_index, zero_index + n_steps):
        y0 = x[i]
        k1 = f[i]
        rest_half = rest_at_half(i)
        y = y0 + (0.5 * h) * k1
        k2 = stage_rhs(y, u0 * y + rest_half)
        y = y0 + (0.5 * h) * k2
        k3 = stage_rhs(y, u0 * y + rest_half)
        rest_full = rest_at_grid(i + 1)
        y = y0 + h * k3
        k4 = stage_rhs(y, u0 * y + rest_full)
        x[i + 1] = y0 + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(x[i + 1])):
            t_fail = (i + 1 - zero_index) * h
            raise NumericalError(
                f"integration produced non-finite values at t = {t_fail:.6g}")
        f[i + 1] = stage_rhs(x[i + 1], u0 * x[i + 1] + rest_full)
        last = i + 1
        if float(np.max(np.abs(x[i + 1]))) > BLOWUP_FACTOR * initial_norm:
            diverged = True
            blowup_time = (i + 1 - zero_index) * h
            break

    return HistoryTrajectory(
        h=h, t_start=-tau, samples=x[:last + 1], derivs=f[:last + 1],
        end_slope=end_slope, zero_index=zero_index,
        diverged=diverged, blowup_time=blowup_time)


# ---------------------------------------------------------------------------
# Conserved quantities and consensus-value predictions
# ---------------------------------------------------------------------------

def _weighted_past_integral(x, f, end_slope, zero_index, idx, profile):
    """int over [-tau, 0] of x(t + sigma) * H(sigma) d sigma at t = t_idx,
    where H is the kernel's cumulative mass from the far end.

    Per grid cell H is affine, so the two-point Hermite rule (trapezoid plus
    an h^2/12 endpoint-slope correction) integrates the product to fourth
    order.  At the grid node t = 0 the left and right slopes differ; the
    stored end_slope supplies the left one.
    """
    m_cells = profile.steps
    if m_cells == 0:
        return np.zeros(x.shape[1])
    h = profile.h
    rho = profile.cell_density            # cell m spans lags [m h, (m+1) h]
    mass_above = np.cumsum(profile.node_mass[::-1])[::-1]
    dens_above = np.concatenate((np.cumsum((rho * h)[::-1])[::-1], [0.0]))
    h_left = mass_above[1:] + dens_above[1:]    # H at the older cell edge
    h_right = h_left + rho * h                  # H at the newer cell edge

    cells = np.arange(m_cells)
    idx_l = idx - cells - 1
    idx_r = idx_l + 1
    xl, xr = x[idx_l], x[idx_r]
    fl = f[idx_l]
    fr = f[idx_r].copy()
    at_zero = np.nonzero(idx_r == zero_index)[0]
    if at_zero.size:
        fr[at_zero[0]] = end_slope
    hl = h_left[:, None]
    hr = h_right[:, None]
    rr = rho[:, None]
    trap = 0.5 * h * (xl * hl + xr * hr)
    corr = (h * h / 12.0) * ((fl * hl + xl * rr) - (fr * hr + xr * rr))
    return np.sum(trap + corr, axis=0)


def conserved_q(traj: HistoryTrajectory, ld: LaplacianData,
                kern: DelayKernel, t: float) -> float:
    """First integral of the transmission-delayed model at time t >= 0."""
    if t < -1e-12:
        raise ValueError(f"t must be nonnegative, got {t}")
    idx = traj.index_of(t)
    pi = markov.stationary(ld).pi
    profile = kern_mod.grid_profile(kern, traj.h)
    past = _weighted_past_integral(
        traj.samples, traj.derivs, traj.end_slope, traj.zero_index,
        idx, profile)
    return float(pi @ (traj.samples[idx] + ld.degrees * past))


def conserved_processing(traj: HistoryTrajectory, ld: LaplacianData,
                         t: float) -> float:
    """Stationary-weighted state <pi, x(t)>, conserved by the delayed-coupling
    model."""
    idx = traj.index_of(t)
    pi = markov.stationary(ld).pi
    return float(pi @ traj.samples[idx])


def predict_propagation(ld: LaplacianData, kern: DelayKernel, phi,
                        h: float | None = None) -> float:
    """Closed-form limit value for the transmission-delayed model.

    The conserved quantity evaluated on the initial function, divided by
    1 + tau_bar * <pi, d>.  History integrals use the same corrected
    trapezoid rule as conserved_q, on a fine grid by default.
    """
    pi = markov.stationary(ld).pi
    tau = kern.tau
    tbar = kern_mod.mean_delay(kern)
    if h is None:
        h = tau / 1024.0 if tau > 0 else 1.0
    if tau == 0:
        x0 = np.asarray(phi(0.0), dtype=np.float64)
        return float(pi @ x0)
    profile = kern_mod.grid_profile(kern, h)
    xs, fs, end_slope = _sample_history(phi, ld.n, tau, h, profile.steps)
    past = _weighted_past_integral(xs, fs, end_slope, profile.steps,
                                   profile.steps, profile)
    numerator = float(pi @ (xs[profile.steps] + ld.degrees * past))
    return numerator / (1.0 + tbar * float(pi @ ld.degrees))


def predict_processing(ld: LaplacianData, phi) -> float:
    """Limit value for the delayed-coupling model: <pi, x(0)>; only the
    terminal value of the initial function matters."""
    pi = markov.stationary(ld).pi
    x0 = np.asarray(phi(0.0), dtype=np.float64)
    if x0.shape != (ld.n,):
        raise DimensionError(
            f"history function must return shape ({ld.n},), got {x0.shape}")
    return float(pi @ x0)


# ---------------------------------------------------------------------------
# Consensus detection and reporting
# ---------------------------------------------------------------------------

def detect_consensus(traj: HistoryTrajectory, tol: float = DETECT_TOL,
                     window: float | None = None) -> float | None:
    """Mean of the final state if the tail of the run has settled.

    Over the last `window` time units (default max(tau, 1)), both the
    node spread max_ij |x_i - x_j| and the per-step change must stay below
    tol and tol*h respectively; otherwise returns None.
    """
    if traj.diverged:
        return None
    if window is None:
        window = max(-traj.t_start, 1.0)
    w_steps = int(round(window / traj.h))
    total = traj.samples.shape[0]
    if w_steps + 1 > total:
        raise ValueError(
            f"trajectory spans {(total - 1) * traj.h:.6g} time units, "
            f"shorter than the detection window {window}")
    tail = traj.samples[total - w_steps - 1:]
    spread = float(np.max(tail.max(axis=1) - tail.min(axis=1)))
    step_change = float(np.max(np.abs(np.diff(tail, axis=0)))) if w_steps else 0.0
    if spread < tol and step_change < tol * traj.h:
        return float(np.mean(traj.samples[-1]))
    return None


@dataclass(frozen=True)
class ConsensusReport:
    """Outcome of a delayed-consensus run against its predicted limit."""

    converged: bool
    detected_value: float | None
    predicted_value: float
    spread_history: np.ndarray
    q_drift: float

    def __post_init__(self):
        arr = np.asarray(self.spread_history, dtype=np.float64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "spread_history", arr)


def consensus_report(traj: HistoryTrajectory, ld: LaplacianData,
                     kern: DelayKernel, model: str,
                     tol: float = DETECT_TOL, window: float | None = None,
                     q_samples: int = 129) -> ConsensusReport:
    """Assemble detection, prediction, and conservation diagnostics."""
    if model == "propagation":
        tbar = kern_mod.mean_delay(kern)
        pi = markov.stationary(ld).pi
        q0 = conserved_q(traj, ld, kern, 0.0)
        predicted = q0 / (1.0 + tbar * float(pi @ ld.degrees))
        q_fn = lambda t: conserved_q(traj, ld, kern, t)
    elif model == "processing":
        predicted = float(markov.stationary(ld).pi @ traj.samples[traj.zero_index])
        q_fn = lambda t: conserved_processing(traj, ld, t)
    else:
        raise ValueError(f"unknown model {model!r}")

    n_post = traj.samples.shape[0] - 1 - traj.zero_index
    count = min(q_samples, n_post + 1)
    indices = np.unique(np.linspace(0, n_post, count).round().astype(int))
    q_values = [q_fn(i * traj.h) for i in indices]
    q_drift = float(np.max(np.abs(np.array(q_values) - q_values[0])))

    spreads = traj.samples.max(axis=1) - traj.samples.min(axis=1)
    detected = detect_consensus(traj, tol=tol, window=window) \
        if not traj.diverged else None
    return ConsensusReport(
        converged=detected is not None,
        detected_value=detected,
        predicted_value=predicted,
        spread_history=spreads,
        q_drift=q_drift)


def trajectory_to_csv(traj: HistoryTrajectory, path) -> None:
    """Write the sampled run as CSV: header t,x1,...,xn, one row per grid
    point, 17 significant digits."""
    n = traj.n
    times = traj.times
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(times, traj.samples):
            fields = [f"{t:.17g}"] + [f"{v:.17g}" for v in row]
            handle.write(",".join(fields) + "\n")
