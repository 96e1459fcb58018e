"""Command-line front end.

Exit codes: 0 success, 1 validation or parse failure, 2 runtime failure
(for example an overflow under the ``halt`` policy).
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys

import numpy as np

from puredmm import experiments as ex
from puredmm import index_language as il
from puredmm.engine import EngineError, ValidationError, build_network, run, watch_getter
from puredmm.fd_matrix import FDMatrixError
from puredmm.specfile import dump_spec, load_spec, write_trace

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
_WATCH_PREFIXES = ("Y0", "cell:", "out:")


def split_watch(values: list[str] | None) -> list[str]:
    """Split comma-separated watch lists, keeping the comma inside ``cell:r,c`` keys."""
    keys: list[str] = []
    for v in values or []:
        for piece in v.split(","):
            if keys and not piece.startswith(_WATCH_PREFIXES):
                keys[-1] += "," + piece
            else:
                keys.append(piece)
    return [k for k in keys if k]


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def cmd_validate(args) -> int:
    try:
        spec = load_spec(args.path)
        state = build_network(spec)
    except OSError as e:
        _err(str(e))
        return EXIT_INVALID
    except (ValidationError, il.IndexNameError, FDMatrixError) as e:
        _err(str(e))
        return EXIT_INVALID
    net = state.net
    print(f"ok: {spec.mode} network, {len(net.neurons)} neurons, Self={net.self_id}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        spec = load_spec(args.path)
        state = build_network(spec)
    except (OSError, ValidationError, il.IndexNameError, FDMatrixError) as e:
        _err(str(e))
        return EXIT_INVALID
    steps = args.steps if args.steps is not None else (spec.steps or 0)
    watch = split_watch(args.watch) or list(spec.meta.get("watch", ["Y0"]))
    try:
        for key in watch:
            watch_getter(key, state.net)
    except ValueError as e:
        _err(str(e))
        return EXIT_INVALID
    code = EXIT_OK
    try:
        trace = run(state, steps, watch)
    except (EngineError, FDMatrixError) as e:
        _err(f"runtime: {e}")
        trace = getattr(e, "trace", None)
        code = EXIT_RUNTIME
    if trace is not None:
        with _output(args.trace) as fh:
            write_trace(trace, fh)
    return code


def _demo_spec(args):
    if args.name == "oscillation":
        return ex.build_oscillation()
    if args.name == "wave":
        cols = [int(c) for c in args.columns.split(",")] if args.columns else None
        return ex.build_wave(args.n, cols)
    if args.name == "dfa":
        d = _demo_dfa(args)
        if args.input is None:
            if args.seed is None:
                args.input = "aab"
            else:
                rng = np.random.default_rng(args.seed + 1)
                args.input = "".join(rng.choice(list(d.alphabet), size=20))
        bad = set(args.input) - set(d.alphabet)
        if bad:
            raise ValueError(f"symbols {sorted(bad)} not in alphabet {list(d.alphabet)}")
        spec = ex.build_dfa(d)
        spec.inputs = ex.dfa_inputs(spec, args.input)
        spec.steps = len(args.input) + ex.DFA_LATENCY
        return spec
    if args.name == "gru":
        p, xs = _demo_gru(args)
        return ex.build_gru(p, xs)
    raise KeyError(args.name)


def _demo_dfa(args) -> ex.DfaSpec:
    if args.seed is None:
        return ex.DfaSpec(("even", "odd"), ("a", "b"),
                          {("even", "a"): "odd", ("odd", "a"): "even",
                           ("even", "b"): "even", ("odd", "b"): "odd"}, "even")
    return ex.DfaSpec.random(np.random.default_rng(args.seed))


def _demo_gru(args):
    rng = np.random.default_rng(42 if args.seed is None else args.seed)
    p = ex.GruParams.random(rng)
    xs = [float(x) for x in rng.normal(size=args.steps or 100)]
    return p, xs


def cmd_demo(args) -> int:
    try:
        spec = _demo_spec(args)
    except KeyError:
        _err(f"unknown demo {args.name!r}")
        return EXIT_INVALID
    except ValueError as e:
        _err(str(e))
        return EXIT_INVALID
    if args.emit_spec:
        dump_spec(spec, args.emit_spec)

    if args.name == "oscillation":
        steps = args.steps or 6
    elif args.name == "wave":
        steps = args.steps or 2 * args.n
    else:
        steps = spec.steps
    watch = list(spec.meta["watch"])
    trace = run(build_network(spec), steps, watch)
    if args.trace:
        with _output(args.trace) as fh:
            write_trace(trace, fh)

    if args.name == "oscillation":
        for r in trace.records:
            print(f"t={r.t} Y0[1][1]={r.watched['Y0[1][1]']:g}")
    elif args.name == "wave":
        pos = ex.wave_positions(trace.values("Y0[1]"))
        for r, j in zip(trace.records, pos):
            print(f"t={r.t} wave at column {j}")
    elif args.name == "dfa":
        d = _demo_dfa(args)
        lat = ex.DFA_LATENCY
        rows = trace.values("Y0[1]")[lat - 1:]
        got = [ex.decode_dfa_state(spec, row) for row in rows]
        want = [str(s) for s in ex.dfa_simulate(d, args.input)]
        print(f"input:  {args.input}")
        print(f"dmm:    {' '.join(got)}")
        print(f"direct: {' '.join(want)}")
        print("match" if got == want else "MISMATCH")
        if got != want:
            return EXIT_RUNTIME
    elif args.name == "gru":
        p, xs = _demo_gru(args)
        h_dmm = ex.gru_hidden_from_trace(spec, trace.values(watch[0]))
        h_ref = ex.gru_reference(p, xs)
        err = max(abs(a - b) for a, b in zip(h_dmm, h_ref))
        print(f"steps: {len(h_ref)}  last h: {h_dmm[-1]:.12g}")
        print(f"max |DMM - reference| = {err:.3e}")
    return EXIT_OK


def cmd_parse_index(args) -> int:
    try:
        n = il.parse_index(args.index)
    except il.ParseError as e:
        _err(str(e))
        return EXIT_INVALID
    if n.kind == il.NEURON:
        print(f"type={n.type_name} kind=neuron name={n.simple_name}")
    else:
        print(f"type={n.type_name} kind={n.kind} k={n.k} name={n.simple_name}")
    if args.json:
        print(json.dumps({"type": n.type_name, "kind": n.kind, "k": n.k, "name": n.simple_name}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="puredmm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a network spec file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="run a network spec file and write a JSONL trace")
    r.add_argument("path")
    r.add_argument("--steps", type=int)
    r.add_argument("--watch", action="append",
                   help="Y0, Y0[i][j], Y0[i], cell:<row>,<col>, out:<col>; comma separated")
    r.add_argument("--trace", help="output file (default stdout)")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("demo", help="run a built-in demo")
    d.add_argument("name", help="oscillation | wave | dfa | gru")
    d.add_argument("--steps", type=int)
    d.add_argument("--n", type=int, default=5, help="wave length")
    d.add_argument("--columns", help="wave columns j_1,...,j_n")
    d.add_argument("--seed", type=int)
    d.add_argument("--input", help="DFA input symbols (default 'aab', random with --seed)")
    d.add_argument("--emit-spec", help="write the demo network as a spec file")
    d.add_argument("--trace", help="also write the demo trace as JSONL")
    d.set_defaults(func=cmd_demo)

    x = sub.add_parser("parse-index", help="parse a structured index name")
    x.add_argument("index")
    x.add_argument("--json", action="store_true")
    x.set_defaults(func=cmd_parse_index)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
