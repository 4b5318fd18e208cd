"""Command-line front end: ``spinadder <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import fields

from . import experiments as ex
from ._backend import NAME as BACKEND
from .engine import DEFAULT_CENSUS_THRESHOLD, DEFAULT_PRUNE_EPS, flip_probability
from .gate_compiler import DEFAULT_RABI, compile_adder, write_schedule
from .phase_correction import correction_phases, correction_records
from .spin_model import ChainSpec

CONFIG_KEYS = ("j_ac", "j_bc", "j_ab", "omega1_hz", "delta_omega_hz")
EXIT_OK, EXIT_INVALID, EXIT_TRIPWIRE = 0, 1, 2
# default Rabi intervals when --omega-min/--omega-max are omitted
OMEGA_RANGE = {"sweep": (0.0995, 0.1006), "find-rabi": (0.095, 0.105)}

_SHIFT = re.compile(r"^\s*(\w+)\s*<<\s*(\w+)\s*$")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_int(text: str) -> int:
    """Decimal, ``0b``/``0x``/``0o`` literals, or ``x<<y``."""
    m = _SHIFT.match(text)
    if m:
        return parse_int(m.group(1)) << parse_int(m.group(2))
    try:
        value = int(text.replace("_", ""), 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer literal: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def parse_term(text: str) -> tuple[int, complex]:
    """``value[:re[,im]]`` into ``(value, amplitude)``."""
    value, _, amp = text.partition(":")
    if not amp:
        return parse_int(value), 1 + 0j
    re_, _, im = amp.partition(",")
    try:
        return parse_int(value), complex(float(re_), float(im) if im else 0.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad amplitude in {text!r}") from None


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: expected one of {CONFIG_KEYS} as key=value")
            try:
                out[key] = float(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: {value.strip()!r} is not a number") from None
    return out


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spinadder", description="Pulse-level simulation of a spin-chain adder.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--length", type=int, default=100, help="register width L")
    common.add_argument("--a", type=parse_int, default=None,
                        help="classical addend (default 1<<(L-1))")
    common.add_argument("--rabi", type=_positive, default=DEFAULT_RABI)
    common.add_argument("--config", help="key=value file with chain constants")
    for key in CONFIG_KEYS:
        common.add_argument("--" + key.replace("_", "-"), type=float, dest=key, default=None)
    common.add_argument("--out", help="output path")

    sim = _Parser(add_help=False)
    sim.add_argument("--b", type=parse_term, action="append", default=None,
                     help="register term value[:re[,im]], repeatable (default 1)")
    sim.add_argument("--prune-eps", type=_nonneg, default=None)
    sim.add_argument("--census-threshold", type=_nonneg, default=DEFAULT_CENSUS_THRESHOLD)
    sim.add_argument("--ideal", action="store_true", help="suppress non-resonant dynamics")
    sim.add_argument("--phase-correct", action="store_true")
    sim.add_argument("--frame", choices=ex.FRAMES, default="interaction")

    sweep = _Parser(add_help=False)
    sweep.add_argument("--omega-min", type=_positive, default=None)
    sweep.add_argument("--omega-max", type=_positive, default=None)
    sweep.add_argument("--steps", type=int, default=81)
    sweep.add_argument("--workers", type=int, default=1)

    c = sub.add_parser("compile", parents=[common], help="write the pulse schedule")
    c.add_argument("--phase-correct", action="store_true", help="annotate electron corrections")
    r = sub.add_parser("run", parents=[common, sim], help="simulate one addition")
    r.add_argument("--dump-state", help="CSV of the final superposition")
    sub.add_parser("sweep", parents=[common, sim, sweep], help="p0 and N over a Rabi grid")
    sub.add_parser("spectrum", parents=[common, sim], help="error-state probabilities CSV")
    sub.add_parser("find-rabi", parents=[common, sweep], help="tune Rabi to 2*pi*k zeros")
    sub.add_parser("verify", parents=[common, sim], help="compare sparse and dense engines")
    return p


def resolve(args) -> tuple[ChainSpec, dict]:
    chain = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        if getattr(args, key) is not None:
            chain[key] = getattr(args, key)
    spec = ChainSpec(L=args.length, **chain)
    if args.a is None:
        args.a = 1 << (args.length - 1)
    if args.a >> args.length:
        raise UsageError(f"a={args.a} does not fit in {args.length} bits")
    if getattr(args, "b", "absent") is None:
        args.b = [(1, 1 + 0j)]
    for b, _ in getattr(args, "b", None) or ():
        if b >> args.length:
            raise UsageError(f"b={b} does not fit in {args.length} bits")
    if getattr(args, "prune_eps", "absent") is None:
        args.prune_eps = (ex.SWEEP_PRUNE_EPS if args.command == "sweep"
                          else 0.0 if args.command == "verify" else DEFAULT_PRUNE_EPS)
    if args.command in OMEGA_RANGE:
        lo, hi = OMEGA_RANGE[args.command]
        args.omega_min = lo if args.omega_min is None else args.omega_min
        args.omega_max = hi if args.omega_max is None else args.omega_max
    config = {f.name: getattr(spec, f.name) for f in fields(spec)}
    for key, value in sorted(vars(args).items()):
        if key in config or key in ("length", "config"):
            continue
        if key == "a":
            value = hex(value)
        elif key == "b" and value is not None:
            value = [[hex(v), [amp.real, amp.imag]] for v, amp in value]
        config[key] = value
    config["backend"] = BACKEND
    return spec, config


def _emit(obj, out=None):
    (out or sys.stdout).write(json.dumps(obj, sort_keys=True) + "\n")


def _cmd_compile(args, spec):
    sched = compile_adder(args.a, spec, args.rabi)
    corrections = None
    if args.phase_correct:
        corrections = [correction_records(correction_phases(p, spec), spec) for p in sched]
    if args.out:
        write_schedule(args.out, sched, spec, corrections)
    _emit({"pulse_count": len(sched), "bound_27L": 27 * spec.L,
           "segments": len(sched.segments)})
    return EXIT_OK


def _run(args, spec, keep_state=False):
    return ex.run_addition(spec, args.a, args.b, args.rabi, args.prune_eps,
                           args.census_threshold, args.phase_correct, args.ideal, args.frame,
                           keep_state=keep_state)


def _cmd_run(args, spec):
    report = _run(args, spec, keep_state=bool(args.dump_state))
    if args.dump_state:
        ex.write_state(args.dump_state, report.state)
    summary = report.summary()
    summary["outcomes"] = {hex(b): p for b, p in sorted(report.outcomes.items())}
    if args.out:
        with open(args.out, "w") as fh:
            _emit(summary, fh)
    _emit(summary)
    return EXIT_OK


def _cmd_spectrum(args, spec):
    report = _run(args, spec)
    if args.out:
        ex.write_spectrum(args.out, report.spectrum)
    _emit({"n_error": report.n_error, "p0": report.p0,
           "error_mass": sum(p for _, p in report.spectrum),
           "clustering_top20": ex.spectrum_clustering(report.spectrum)})
    return EXIT_OK


def _cmd_sweep(args, spec):
    rows = ex.rabi_sweep(spec, args.a, args.b, args.omega_min, args.omega_max, args.steps, args.prune_eps,
                         args.census_threshold, args.frame, args.workers)
    if args.out:
        ex.write_sweep(args.out, rows)
    best = max(rows, key=lambda r: r.p0)
    _emit({"points": len(rows), "argmax_rabi": best.rabi, "max_p0": best.p0})
    return EXIT_OK


def _cmd_find_rabi(args, spec):
    deltas = ex.detuning_set(spec)
    om = ex.find_2pik_rabi(spec, args.omega_min, args.omega_max, deltas)
    _emit({"rabi": om, "deltas": deltas,
           "max_flip_probability": max(flip_probability(d, om) for d in deltas)})
    return EXIT_OK


def _cmd_verify(args, spec):
    sparse = ex.run_addition_state(spec, args.a, args.b, args.rabi, args.prune_eps,
                                   args.ideal, args.frame)
    _, vec = ex.dense_reference_run(spec, args.a, args.b, args.rabi, args.ideal, args.frame,
                                    return_vector=True)
    diff = ex.compare_to_dense(sparse, vec)
    # dropping probability m moves an amplitude by sqrt(m); summed over K pulses
    # that is at most sqrt(K * total pruned)
    pulses = len(compile_adder(args.a, spec, args.rabi))
    bound = math.sqrt(pulses * sparse.pruned_mass) + 1e-10
    summary = {"max_abs_diff": diff, "pruned_mass": sparse.pruned_mass, "entries": len(sparse),
               "tolerance": bound, "agree": diff <= bound}
    if args.out:
        with open(args.out, "w") as fh:
            _emit(summary, fh)
    _emit(summary)
    return EXIT_OK if summary["agree"] else EXIT_TRIPWIRE


COMMANDS = {
    "compile": _cmd_compile,
    "run": _cmd_run,
    "spectrum": _cmd_spectrum,
    "sweep": _cmd_sweep,
    "find-rabi": _cmd_find_rabi,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        spec, config = resolve(args)
    except (UsageError, ValueError, OSError) as e:
        print(f"spinadder: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    print("# config " + json.dumps(config, sort_keys=True))
    try:
        return COMMANDS[args.command](args, spec)
    except ex.TripwireError as e:
        print(f"spinadder: tripwire: {e}", file=sys.stderr)
        return EXIT_TRIPWIRE
    except (ValueError, OSError) as e:
        print(f"spinadder: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
