"""Sweep the delay through the critical value for the two-node pair.

For the symmetric unit-weight pair the delayed-coupling model flips from
convergent to oscillatory at tau = pi/4.  This script simulates a range of
delays, estimates the tail growth rate of the node spread, and prints it
next to the rightmost characteristic root, so the simulated and analytic
pictures can be compared line by line.

Usage: python scripts/hayes_sweep.py [--points 9] [--horizon 80]
"""

import argparse
import math
import sys

import numpy as np

from netconsensus import dde, kernel, netgraph, spectral


def tail_rate(traj, settle=5.0):
    """Least-squares slope of log(spread) after the initial transient,
    restricted to samples above the roundoff floor."""
    spread = traj.samples.max(axis=1) - traj.samples.min(axis=1)
    t = traj.times
    mask = (t > settle) & (spread > 1e-13)
    if mask.sum() < 10:
        return float("nan")
    coeffs = np.polyfit(t[mask], np.log(spread[mask]), 1)
    return float(coeffs[0])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=9)
    parser.add_argument("--horizon", type=float, default=80.0)
    args = parser.parse_args(argv)

    ld = netgraph.laplacian(netgraph.WeightedDigraph([[0, 1], [1, 0]]))
    critical = spectral.hayes_threshold(2.0)
    print(f"critical delay pi/4 = {critical:.6f}")
    print(f"{'tau':>8} {'tau/crit':>9} {'sim rate':>10} {'root Re':>10} "
          f"{'verdict':>13}")
    for tau in np.linspace(0.6 * critical, 1.4 * critical, args.points):
        tau = round(float(tau), 6)
        h = tau / 64.0
        traj = dde.simulate_processing(
            ld, kernel.kernel_discrete(tau),
            dde.constant_history([0.0, 1.0]), args.horizon, h)
        rate = tail_rate(traj)
        roots = spectral.scalar_roots(2.0, kernel.kernel_discrete(tau))
        rightmost = roots[0].real if roots else math.nan
        verdict = spectral.processing_verdict(ld, tau).verdict
        print(f"{tau:8.4f} {tau / critical:9.3f} {rate:10.4f} "
              f"{rightmost:10.4f} {verdict:>13}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
