"""Walk through the consensus/Markov correspondence on a random digraph.

Shows, for one randomly weighted strongly connected digraph: the row-
stochasticity of e^{-Lt}, its convergence to the rank-one matrix ones*pi,
the agreement of the three stationary-vector routes, and the consensus
value as the pi-weighted mean of the initial state.

Usage: python scripts/duality_demo.py [--n 5] [--seed 3]
"""

import argparse
import sys

import numpy as np

from netconsensus import markov, matcore, netgraph


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=5)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    w = rng.uniform(0.1, 0.8, size=(args.n, args.n))
    np.fill_diagonal(w, 0.0)
    ld = netgraph.laplacian(netgraph.WeightedDigraph(w))
    print(f"random digraph on {args.n} nodes, Delta = {ld.delta:.4f}")

    for method in markov.STATIONARY_METHODS:
        pi = markov.stationary(ld, method).pi
        print(f"pi via {method:15}: " + " ".join(f"{v:.10f}" for v in pi))

    pi = markov.stationary(ld).pi
    print(f"\n{'t':>6} {'stochastic':>11} {'max row-sum dev':>16} "
          f"{'gap to ones*pi':>15}")
    for t in (0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        semigroup = matcore.mat_exp(-ld.laplacian, t)
        dev = float(np.max(np.abs(semigroup.sum(axis=1) - 1.0)))
        gap = float(np.max(np.abs(semigroup - np.outer(np.ones(ld.n), pi))))
        print(f"{t:6.1f} {str(markov.is_stochastic(semigroup)):>11} "
              f"{dev:16.2e} {gap:15.2e}")

    x0 = rng.uniform(-1, 1, args.n)
    final = matcore.mat_exp(-ld.laplacian, 60.0) @ x0
    print(f"\ninitial state        : " + " ".join(f"{v:+.4f}" for v in x0))
    print(f"state at t = 60      : " + " ".join(f"{v:+.4f}" for v in final))
    print(f"pi-weighted initial  : {float(pi @ x0):+.10f}")
    print(f"common limit value   : {float(np.mean(final)):+.10f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
