"""Command-line front end: scenario files in, trajectories and reports out.

Subcommands
-----------
stationary   print the stationary row vector by all three methods
simulate     integrate the scenario's model, write trajectory.csv + report
stability    emit the spectral verdict as JSON
verify       run the cross-cutting invariant battery (or scenario checks)

Exit codes: 0 success/convergence, 1 malformed scenario, 2 nonunique
stationary direction, 3 detected divergence or non-convergence,
4 numerical blowup, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dde, kernel, markov, netgraph, spectral
from .errors import AmbiguityError, NumericalError

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_AMBIGUOUS = 2
EXIT_DIVERGED = 3
EXIT_NUMERICAL = 4
EXIT_VERIFY_FAILED = 5

MODELS = ("propagation", "processing", "discrete-time", "markov")


class ScenarioError(ValueError):
    """The scenario file is malformed or internally inconsistent."""


@dataclass
class Scenario:
    graph: netgraph.WeightedDigraph
    model: str
    kern: kernel.DelayKernel | None
    history: object            # callable t -> state vector
    horizon: float
    step: float
    consensus_tol: float = 1e-8
    window: float | None = None
    epsilon: float | None = None
    history_spec: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_graph_file(path) -> netgraph.WeightedDigraph:
    """Text format: optional '#' comments, a node-count header line, then
    one 'i j weight' triple per line (1-based; weight couples j -> i)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise ScenarioError(f"graph file {path} is empty")
    try:
        n = int(rows[0])
    except ValueError as exc:
        raise ScenarioError(
            f"graph file {path}: header must be the node count, got {rows[0]!r}"
        ) from exc
    if n < 1:
        raise ScenarioError(f"graph file {path}: node count must be >= 1")
    weights = np.zeros((n, n))
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ScenarioError(
                f"graph file {path}: expected 'i j weight', got {line!r}")
        i, j = int(parts[0]), int(parts[1])
        w = float(parts[2])
        if not (1 <= i <= n and 1 <= j <= n):
            raise ScenarioError(
                f"graph file {path}: node ids must lie in 1..{n}, got {line!r}")
        if w < 0:
            raise ScenarioError(f"graph file {path}: negative weight in {line!r}")
        weights[i - 1, j - 1] = w
    return netgraph.WeightedDigraph(weights)


_PRESETS = {
    "chain": netgraph.preset_chain,
    "ring": netgraph.preset_ring,
    "star": netgraph.preset_star,
    "complete": netgraph.preset_complete,
}


def _parse_graph(spec, base_dir: Path) -> netgraph.WeightedDigraph:
    if not isinstance(spec, dict):
        raise ScenarioError("'graph' must be an object")
    if "file" in spec:
        return parse_graph_file(base_dir / spec["file"])
    if "preset" in spec:
        name = spec["preset"]
        if name not in _PRESETS:
            raise ScenarioError(
                f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
        graph = _PRESETS[name](int(spec["n"]), float(spec.get("gain", 1.0)))
        if "slope" in spec:
            graph = netgraph.linearize(graph.weights, float(spec["slope"]))
        return graph
    if "n" in spec and "edges" in spec:
        n = int(spec["n"])
        if n < 1:
            raise ScenarioError("'n' must be >= 1")
        weights = np.zeros((n, n))
        for triple in spec["edges"]:
            if len(triple) != 3:
                raise ScenarioError(f"edge {triple!r} must be [i, j, weight]")
            i, j, w = int(triple[0]), int(triple[1]), float(triple[2])
            if not (1 <= i <= n and 1 <= j <= n):
                raise ScenarioError(
                    f"edge {triple!r} references nodes outside 1..{n}")
            if w < 0:
                raise ScenarioError(f"edge {triple!r} has a negative weight")
            weights[i - 1, j - 1] = w
        return netgraph.WeightedDigraph(weights)
    raise ScenarioError("'graph' needs 'file', 'preset', or 'n' + 'edges'")


def _parse_kernel(spec) -> kernel.DelayKernel:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError("'kernel' must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "discrete":
        return kernel.kernel_discrete(float(spec["tau"]))
    if kind == "uniform":
        return kernel.kernel_uniform(float(spec["tau"]))
    if kind == "mixture":
        return kernel.kernel_mixture(
            atoms=[(float(a[0]), float(a[1])) for a in spec.get("atoms", [])],
            density=spec.get("density", ()),
            tau=float(spec["tau"]),
            renormalize=bool(spec.get("renormalize", False)))
    raise ScenarioError(f"unknown kernel kind {kind!r}")


def _parse_history(spec, n: int):
    if not isinstance(spec, dict) or "form" not in spec:
        raise ScenarioError("'history' must be an object with a 'form'")
    form = spec["form"]
    if form == "constant":
        values = np.asarray(spec["values"], dtype=np.float64)
        if values.shape != (n,):
            raise ScenarioError(f"'values' must list {n} numbers")
        return dde.constant_history(values)
    if form == "affine":
        intercept = np.asarray(spec["intercept"], dtype=np.float64)
        slope = np.asarray(spec["slope"], dtype=np.float64)
        if intercept.shape != (n,) or slope.shape != (n,):
            raise ScenarioError(f"'intercept' and 'slope' must list {n} numbers")
        return dde.affine_history(intercept, slope)
    if form == "polynomial":
        coeffs = spec["coefficients"]
        if len(coeffs) != n:
            raise ScenarioError(f"'coefficients' must have {n} rows")
        return dde.polynomial_history(coeffs)
    raise ScenarioError(f"unknown history form {form!r}")


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        graph = _parse_graph(raw["graph"], path.parent)
        model = raw.get("model", "propagation")
        if model not in MODELS:
            raise ScenarioError(f"unknown model {model!r}; choose from {MODELS}")
        kern = _parse_kernel(raw["kernel"]) if "kernel" in raw else None
        if model in ("propagation", "processing") and kern is None:
            raise ScenarioError(f"model {model!r} requires a 'kernel'")
        history = _parse_history(raw["history"], graph.n) if "history" in raw \
            else dde.constant_history(np.zeros(graph.n))
        horizon = float(raw.get("horizon", 10.0))
        step = float(raw.get("step", 0.01))
        tolerances = raw.get("tolerances", {})
        scenario = Scenario(
            graph=graph, model=model, kern=kern, history=history,
            horizon=horizon, step=step,
            consensus_tol=float(tolerances.get("consensus", 1e-8)),
            window=(float(tolerances["window"]) if "window" in tolerances
                    else None),
            epsilon=(float(raw["epsilon"]) if "epsilon" in raw else None),
            history_spec=raw.get("history", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario {path}: {exc}") from exc
    if scenario.model == "propagation":
        if float(np.max(np.abs(np.diag(graph.weights)))) > 0:
            raise ScenarioError(
                "propagation model requires zero diagonal weights")
    return scenario


# ---------------------------------------------------------------------------
# Formatting helpers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _complex_pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _write_json(obj, out_dir: Path | None, name: str) -> None:
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(
            json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_stationary(scenario: Scenario, out_dir: Path | None) -> int:
    ld = netgraph.laplacian(scenario.graph)
    if not markov.h1_check(ld):
        print("stationary direction is not unique: zero is not a simple "
              "Laplacian eigenvalue", file=sys.stderr)
        return EXIT_AMBIGUOUS
    results = {}
    for method in markov.STATIONARY_METHODS:
        results[method] = markov.stationary(ld, method).pi
    print("h1: simple zero eigenvalue confirmed")
    for method, pi in results.items():
        print(f"pi[{method}]: " + " ".join(_fmt(v) for v in pi))
    methods = list(results)
    discrepancies = {}
    for i in range(len(methods)):
        for j in range(i + 1, len(methods)):
            gap = float(np.max(np.abs(results[methods[i]] - results[methods[j]])))
            discrepancies[f"{methods[i]}|{methods[j]}"] = gap
            print(f"max discrepancy {methods[i]} vs {methods[j]}: {_fmt(gap)}")
    _write_json({
        "h1": True,
        "pi": {m: [float(v) for v in pi] for m, pi in results.items()},
        "discrepancies": discrepancies,
    }, out_dir, "stationary.json")
    return EXIT_OK


def _simulate_trajectory(scenario: Scenario, ld):
    if scenario.model == "propagation":
        return dde.simulate_propagation(
            ld, scenario.kern, scenario.history, scenario.horizon, scenario.step)
    return dde.simulate_processing(
        ld, scenario.kern, scenario.history, scenario.horizon, scenario.step)


def cmd_simulate(scenario: Scenario, out_dir: Path | None) -> int:
    ld = netgraph.laplacian(scenario.graph)
    out_dir = out_dir or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if scenario.model in ("discrete-time", "markov"):
        return _simulate_discrete(scenario, ld, out_dir)
    traj = _simulate_trajectory(scenario, ld)
    dde.trajectory_to_csv(traj, out_dir / "trajectory.csv")
    report = dde.consensus_report(
        traj, ld, scenario.kern, scenario.model,
        tol=scenario.consensus_tol, window=scenario.window)
    rel_drift = report.q_drift / max(abs(report.predicted_value), 1e-30)
    print(f"model: {scenario.model}")
    print(f"predicted consensus value: {_fmt(report.predicted_value)}")
    if report.converged:
        print(f"detected consensus value:  {_fmt(report.detected_value)}")
        print(f"|detected - predicted| = "
              f"{_fmt(abs(report.detected_value - report.predicted_value))}")
    else:
        print("detected consensus value:  none (run did not settle)")
    print(f"conserved quantity drift: {_fmt(report.q_drift)} "
          f"(relative {_fmt(rel_drift)})")
    if traj.diverged:
        print(f"state norm exceeded the blow-up guard at t = "
              f"{_fmt(traj.blowup_time)}")
    _write_json({
        "model": scenario.model,
        "converged": report.converged,
        "detected_value": report.detected_value,
        "predicted_value": report.predicted_value,
        "q_drift": report.q_drift,
        "q_drift_relative": rel_drift,
        "diverged": traj.diverged,
        "blowup_time": traj.blowup_time,
    }, out_dir, "report.json")
    return EXIT_OK if report.converged else EXIT_DIVERGED


def _simulate_discrete(scenario: Scenario, ld, out_dir: Path) -> int:
    steps = int(round(scenario.horizon))
    if scenario.model == "discrete-time":
        x0 = np.asarray(scenario.history(0.0), dtype=np.float64)
        traj = markov.discrete_consensus(ld, x0, steps)
        _write_table(out_dir / "trajectory.csv", traj)
        if ld.delta >= 1.0:
            print(f"warning: Delta = {_fmt(ld.delta)} >= 1; the step matrix "
                  "I - L is not a contraction and may not converge")
        spread = float(np.max(traj[-1]) - np.min(traj[-1]))
        converged = spread < scenario.consensus_tol
        value = float(np.mean(traj[-1]))
        if markov.h1_check(ld):
            predicted = float(markov.stationary(ld).pi @ x0)
            print(f"predicted consensus value: {_fmt(predicted)}")
        if converged:
            print(f"detected consensus value:  {_fmt(value)}")
        else:
            print(f"final spread {_fmt(spread)} above tolerance; not settled")
        return EXIT_OK if converged else EXIT_DIVERGED
    # markov: iterate the dual chain pi(t+1) = pi(t) P_eps
    pi0 = np.asarray(scenario.history(0.0), dtype=np.float64)
    if np.any(pi0 < 0) or pi0.sum() <= 0:
        raise ScenarioError("markov model needs a nonnegative initial "
                            "distribution with positive mass")
    state = markov.ChainState(pi=pi0 / pi0.sum(), t=0)
    eps = scenario.epsilon if scenario.epsilon is not None \
        else 0.5 / max(ld.delta, 1e-12)
    transition = markov.p_epsilon(ld, eps)
    rows = [state.pi]
    for _ in range(steps):
        state = markov.chain_step(state, transition)
        rows.append(state.pi)
    _write_table(out_dir / "trajectory.csv", np.asarray(rows))
    target = markov.stationary(ld).pi
    gap = float(np.max(np.abs(state.pi - target)))
    print(f"distance to stationary distribution after {steps} steps: {_fmt(gap)}")
    print("stationary: " + " ".join(_fmt(v) for v in target))
    return EXIT_OK if gap < scenario.consensus_tol else EXIT_DIVERGED


def _write_table(path: Path, rows: np.ndarray) -> None:
    n = rows.shape[1]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in enumerate(rows):
            handle.write(",".join([f"{t:.17g}"] + [f"{v:.17g}" for v in row]) + "\n")


def cmd_stability(scenario: Scenario, out_dir: Path | None) -> int:
    ld = netgraph.laplacian(scenario.graph)
    if scenario.model == "processing":
        if scenario.kern is None or len(scenario.kern.atoms) != 1 \
                or scenario.kern.density.size:
            raise ScenarioError(
                "stability for the processing model needs a discrete kernel")
        report = spectral.processing_verdict(ld, scenario.kern.tau)
    elif scenario.model == "propagation":
        report = spectral.propagation_verdict(ld, scenario.kern)
    else:
        raise ScenarioError(
            f"stability analysis applies to the delayed models, "
            f"not {scenario.model!r}")
    payload = {
        "model": report.model,
        "eigenvalues": _complex_pairs(report.laplacian_eigenvalues),
        "h1": report.h1,
        "chi_prime_zero": report.chi_prime_zero,
        "rightmost_nonzero_real_part":
            None if math.isinf(report.rightmost_nonzero_real_part)
            else report.rightmost_nonzero_real_part,
        "threshold": report.threshold,
        "sufficient_delay_bound": report.sufficient_delay_bound,
        "verdict": report.verdict,
        "notes": report.notes,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    _write_json(payload, out_dir, "stability.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification battery
# ---------------------------------------------------------------------------

def _random_h1_graph(rng, n: int, scale: float = 0.6) -> netgraph.WeightedDigraph:
    """Random strongly connected digraph (a directed ring plus random
    extra edges), so zero is always a simple Laplacian eigenvalue."""
    w = rng.uniform(0.1, scale, size=(n, n)) * (rng.random((n, n)) < 0.6)
    for i in range(n):
        w[i, (i + 1) % n] = max(w[i, (i + 1) % n], 0.3)
    np.fill_diagonal(w, 0.0)
    return netgraph.WeightedDigraph(w)


def _battery(seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []

    for trial in range(10):
        n = int(rng.integers(2, 7))
        ld = netgraph.laplacian(_random_h1_graph(rng, n))
        report = markov.duality_check(ld, [0.1, 1.0, 10.0])
        if not report.passed:
            failures.append(f"duality check failed on trial {trial} (n={n})")
        pis = [markov.stationary(ld, m).pi for m in markov.STATIONARY_METHODS]
        spread = max(float(np.max(np.abs(a - b)))
                     for a in pis for b in pis)
        if spread > 1e-8:
            failures.append(
                f"stationary methods disagree by {spread:.2e} on trial {trial}")

    for trial in range(4):
        n = int(rng.integers(2, 6))
        ld = netgraph.laplacian(_random_h1_graph(rng, n))
        tau = 0.4
        kern = kernel.kernel_discrete(tau) if trial % 2 == 0 \
            else kernel.kernel_uniform(tau)
        phi = dde.affine_history(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
        traj = dde.simulate_propagation(ld, kern, phi, 30.0, 0.01)
        report = dde.consensus_report(traj, ld, kern, "propagation", tol=1e-6)
        rel = report.q_drift / max(abs(report.predicted_value), 1e-30)
        if rel > 1e-6:
            failures.append(
                f"conserved-quantity drift {rel:.2e} on delayed trial {trial}")
        if not report.converged:
            failures.append(f"delayed run {trial} did not settle")
        elif abs(report.detected_value - report.predicted_value) > 1e-4:
            failures.append(
                f"detected vs predicted value differ by "
                f"{abs(report.detected_value - report.predicted_value):.2e} "
                f"on delayed trial {trial}")
    return failures


def cmd_verify(scenario: Scenario | None, out_dir: Path | None,
               seed: int) -> int:
    failures: list[str] = []
    if scenario is None:
        print(f"running built-in verification battery (seed {seed})")
        failures = _battery(seed)
    else:
        ld = netgraph.laplacian(scenario.graph)
        report = markov.duality_check(ld, [0.1, 1.0, 10.0])
        print(f"semigroup checks (stochasticity, stationarity, contraction): "
              f"{'pass' if report.passed else 'FAIL'}")
        if not report.passed:
            failures.append("semigroup duality check failed")
        if scenario.model == "discrete-time" and ld.delta >= 1.0:
            print(f"warning: Delta = {_fmt(ld.delta)} >= 1; discrete-time "
                  "iteration is outside its contraction regime")
        if scenario.model in ("propagation", "processing"):
            traj = _simulate_trajectory(scenario, ld)
            rep = dde.consensus_report(
                traj, ld, scenario.kern, scenario.model,
                tol=scenario.consensus_tol, window=scenario.window)
            rel = rep.q_drift / max(abs(rep.predicted_value), 1e-30)
            print(f"conserved-quantity drift: {_fmt(rep.q_drift)} "
                  f"(relative {_fmt(rel)})")
            if rel > 1e-5:
                failures.append(f"conserved quantity drifted by {rel:.2e}")
            if rep.converged and abs(
                    rep.detected_value - rep.predicted_value) > 1e-4:
                failures.append(
                    "detected consensus value disagrees with prediction")
    if failures:
        for item in failures:
            print(f"FAIL: {item}")
        return EXIT_VERIFY_FAILED
    print("all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netconsensus",
        description="Consensus dynamics, Markov duals, and delay stability")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("stationary", "simulate", "stability", "verify"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--scenario", type=Path,
                         required=name != "verify",
                         help="path to the scenario JSON file")
        cmd.add_argument("--out", type=Path, default=None,
                         help="directory for CSV/JSON outputs")
        cmd.add_argument("--seed", type=int, default=0,
                         help="seed for randomized verification")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario) if args.scenario else None
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "stationary":
            return cmd_stationary(scenario, args.out)
        if args.command == "simulate":
            return cmd_simulate(scenario, args.out)
        if args.command == "stability":
            return cmd_stability(scenario, args.out)
        return cmd_verify(scenario, args.out, args.seed)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AmbiguityError as exc:
        print(f"not unique: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
