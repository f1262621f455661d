"""Batch command-line frontend.

Exit codes: 0 success, 1 circuit parse/read error, 2 invalid flags,
3 engine failure, 4 ``verify`` comparison failed.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
import time

from . import dense
from .dense import distribution, simulate_dense, total_variation
from .hybrid import run_hybrid
from .pathsim import (
    CorruptedTrajectoryError,
    EngineMetrics,
    InitialCondition,
    final_amplitude,
    run_trajectory,
    sample_parallel,
    shot_rng,
)
from .qcio import CircuitParseError, RunResult, format_result, load_circuit
from .qcore import BasisState, Circuit, circuit_stats

EXIT_PARSE = 1
EXIT_USAGE = 2
EXIT_ENGINE = 3
EXIT_VERIFY_FAILED = 4

VERIFY_MAX_WIDTH = 20
EXHAUSTIVE_WIDTH = 8
AMP_TOL = 1e-9


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("circuit", help="circuit file")
    common.add_argument("--input", help="input bitstring, most-significant qubit first")
    common.add_argument("--output", choices=("text", "json"), default="text")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--shots", type=_positive, default=1)
    sampling.add_argument("--seed", type=_seed, help="default: fresh OS entropy, echoed in output")
    sampling.add_argument("--mem-budget", type=_positive, help="hybrid engine budget in stored amplitudes")
    sampling.add_argument("--jobs", type=_positive, default=1)

    run = sub.add_parser("run", parents=[common, sampling], help="sample final states")
    run.add_argument("--engine", choices=("path", "dense", "hybrid"), default="path")
    run.add_argument("--trace", action="store_true", help="stream trajectory steps to stderr")

    amps = sub.add_parser("amps", parents=[common], help="print final amplitudes")
    amps.add_argument("targets", nargs="+", help="target bitstrings")
    amps.add_argument("--engine", choices=("path", "dense"), default="path")

    sub.add_parser("stats", parents=[common], help="print circuit complexity parameters")

    verify = sub.add_parser("verify", parents=[common, sampling], help="compare engines to the dense oracle")
    verify.add_argument("--engine", choices=("path", "hybrid"), default="path")
    verify.add_argument("--tv-threshold", type=float, default=0.05)
    verify.set_defaults(shots=10_000)
    return parser


def _resolve_input(doc, args) -> BasisState:
    width = doc.circuit.width
    if args.input is not None:
        try:
            state = BasisState.from_bitstring(args.input)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if state.width != width:
            raise UsageError(f"--input has {state.width} bits, circuit has {width} qubits")
        return state
    if doc.input is not None:
        return doc.input
    raise UsageError("no input state: add an 'input' directive or pass --input")


def _sample(args, circuit: Circuit, state: BasisState, engine: str, seed: int):
    """Histogram keyed by bitstring plus engine metrics for one sampling run."""
    metrics: dict = {}
    if engine == "dense":
        hist = dense.sample_distribution(distribution(simulate_dense(circuit, state)), args.shots, seed)
    elif engine == "hybrid":
        if args.mem_budget is None:
            raise UsageError("--engine hybrid requires --mem-budget")
        report = run_hybrid(circuit, state, args.mem_budget, args.shots, seed, args.jobs)
        hist = report.histogram
        metrics = _metric_dict(report.metrics)
        metrics.update(switch_pc=report.switch_pc, snapshot_size=report.snapshot_size)
    else:
        hist, m = sample_parallel(circuit, InitialCondition.single(state), args.shots, seed, args.jobs)
        metrics = _metric_dict(m)
    return {s.to_bitstring(): c for s, c in hist.items()}, metrics


def _metric_dict(m: EngineMetrics) -> dict:
    return {
        "calc_amp_calls": m.calc_amp_calls,
        "max_depth": m.max_depth,
        "peak_frames": m.peak_frames,
        "largest_alloc": m.largest_alloc,
    }


def _traced_path_run(args, circuit: Circuit, state: BasisState, seed: int):
    init = InitialCondition.single(state)
    metrics = EngineMetrics()
    hist: dict[str, int] = {}
    width = circuit.width
    for shot in range(args.shots):
        res = run_trajectory(circuit, init, shot_rng(seed, shot), trace=True, metrics=metrics)
        for rec in res.trace:
            print(
                f"shot={shot} pc={rec.pc} state={rec.state:0{width}b} "
                f"amp2={abs(rec.amplitude) ** 2:.12g} prob={rec.probability:.12g}",
                file=sys.stderr,
            )
        key = res.final.to_bitstring()
        hist[key] = hist.get(key, 0) + 1
    return hist, _metric_dict(metrics)


def cmd_run(args, doc) -> int:
    state = _resolve_input(doc, args)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    if args.trace and args.engine != "path":
        raise UsageError("--trace is only available with --engine path")
    t0 = time.perf_counter()
    if args.trace:
        hist, metrics = _traced_path_run(args, doc.circuit, state, seed)
    else:
        hist, metrics = _sample(args, doc.circuit, state, args.engine, seed)
    elapsed = (time.perf_counter() - t0) * 1000
    result = RunResult(args.engine, args.shots, seed, hist, metrics, round(elapsed, 3))
    print(format_result(result, args.output))
    return 0


def _amp_line(target: str, z: complex) -> str:
    return f"{target} {z.real:+.11e}{z.imag:+.11e}j magnitude={abs(z):.12f}"


def cmd_amps(args, doc) -> int:
    state = _resolve_input(doc, args)
    circuit = doc.circuit
    targets = []
    for text in args.targets:
        try:
            target = BasisState.from_bitstring(text)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if target.width != circuit.width:
            raise UsageError(f"target {text} has {target.width} bits, circuit has {circuit.width} qubits")
        targets.append(target)
    if args.engine == "dense":
        sv = simulate_dense(circuit, state)
        values = [sv.amplitude(t) for t in targets]
    else:
        init = InitialCondition.single(state)
        values = [final_amplitude(circuit, init, t) for t in targets]
    if args.output == "json":
        print(json.dumps({
            "engine": args.engine,
            "amplitudes": {t.to_bitstring(): [z.real, z.imag] for t, z in zip(targets, values)},
        }))
    else:
        for t, z in zip(targets, values):
            print(_amp_line(t.to_bitstring(), z))
    return 0


def cmd_stats(args, doc) -> int:
    st = circuit_stats(doc.circuit)
    if args.output == "json":
        print(json.dumps({"s": st.s, "t": st.t, "k": st.k, "b_max": st.b_max, "bound": st.leaf_bound}))
    else:
        print(f"s={st.s} t={st.t} k={st.k} b_max={st.b_max} bound={st.leaf_bound}")
    return 0


def cmd_verify(args, doc) -> int:
    circuit = doc.circuit
    if circuit.width > VERIFY_MAX_WIDTH:
        raise UsageError(f"verify needs width <= {VERIFY_MAX_WIDTH} for the dense oracle, got {circuit.width}")
    state = _resolve_input(doc, args)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    sv = simulate_dense(circuit, state)
    init = InitialCondition.single(state)
    if circuit.width <= EXHAUSTIVE_WIDTH:
        checked = range(1 << circuit.width)
    else:
        checked = sorted(sv.amps)
    deviation = max(
        abs(final_amplitude(circuit, init, BasisState(circuit.width, b)) - sv.amplitude(b)) for b in checked
    )
    hist, metrics = _sample(args, circuit, state, args.engine, seed)
    dist = {s.to_bitstring(): p for s, p in distribution(sv).items()}
    tv = total_variation(hist, dist)
    ok = deviation <= AMP_TOL and tv <= args.tv_threshold
    report = {
        "status": "PASS" if ok else "FAIL",
        "engine": args.engine,
        "shots": args.shots,
        "seed": seed,
        "states_checked": len(checked),
        "max_amplitude_deviation": deviation,
        "total_variation": tv,
        "tv_threshold": args.tv_threshold,
        "metrics": metrics,
    }
    if args.output == "json":
        print(json.dumps(report))
    else:
        print(f"{report['status']} engine={args.engine} shots={args.shots} seed={seed}")
        print(f"max_amplitude_deviation={deviation:.3e} over {len(checked)} states (tolerance {AMP_TOL:.0e})")
        print(f"total_variation={tv:.6f} (threshold {args.tv_threshold})")
    return 0 if ok else EXIT_VERIFY_FAILED


COMMANDS = {"run": cmd_run, "amps": cmd_amps, "stats": cmd_stats, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = load_circuit(args.circuit)
    except CircuitParseError as exc:
        print(f"{args.circuit}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{args.circuit}: cannot read circuit: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args, doc)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptedTrajectoryError as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
