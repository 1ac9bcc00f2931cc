"""Command-line surface: gen, run, compare, memory, trace.

Exit codes: 0 success, 1 usage error, 2 IO/parse error, 3 simulation
error (queue or accumulator overflow), 4 comparison divergence. The
DELAYSIM_VERBOSITY environment variable (default 1, set 0 to silence)
gates progress chatter only; command output itself always prints.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import FormatError, SimulationError
from .fabric import ORACLE_KIND, Pipeline, RUNNABLE_KINDS, first_divergence
from .fileio import (
    RunManifest,
    load_manifest,
    load_model,
    load_spikes,
    save_manifest,
    save_model,
    save_spikes,
    write_event_trace_csv,
    write_membrane_csv,
    write_result,
    write_wvu_csv,
)
from .metrics import (
    KIND_RING,
    STRUCTURE_KINDS,
    crossover_alpha,
    memory_bits,
    memory_events,
    scaling_sweep,
)
from .model import DelayNetwork
from .workload import PRUNE_MODES, parse_shape, random_network, random_spikes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_SIM = 3
EXIT_DIVERGED = 4

_EVENT_TRACE_KINDS = tuple(k for k in STRUCTURE_KINDS if k != KIND_RING)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _UsageError(f"{self.prog}: {message}")


def _say(message: str) -> None:
    if int(os.environ.get("DELAYSIM_VERBOSITY", "1")) > 0:
        print(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="delaysim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random model, spike train, and manifest")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--shape", required=True, help='layer widths, e.g. "700-48-48-20"')
    gen.add_argument("--levels", type=int, default=4, help="delay levels per projection")
    gen.add_argument(
        "--first-levels",
        type=int,
        default=1,
        help="delay levels of the first projection (default 1, the usual model family)",
    )
    gen.add_argument("--stride", type=int, default=1, help="zero every level d with d %% stride != 0")
    gen.add_argument("--prune", choices=PRUNE_MODES, default="none")
    gen.add_argument("--keep-k", type=int, default=None, help="levels kept by pruning")
    gen.add_argument("--density", type=float, default=0.2, help="input spike density")
    gen.add_argument("--duration", type=int, default=32, help="spike-train timesteps")
    gen.add_argument("--weight-span", type=int, default=64)
    gen.add_argument("--decay", type=float, default=None, help="LIF decay in [0,1] (default: random)")
    gen.add_argument("--threshold", type=int, default=None)
    gen.add_argument("--structure", choices=RUNNABLE_KINDS, default="scdq")
    gen.add_argument("--capacity", type=int, default=2048)
    gen.add_argument("--inline-weights", action="store_true")
    gen.add_argument("--out-dir", type=Path, default=Path("."))

    run = sub.add_parser("run", help="run a manifest and write result files")
    run.add_argument("manifest", type=Path)
    run.add_argument("--structure", choices=RUNNABLE_KINDS, default=None)
    run.add_argument("--scheduler", choices=("sequential", "threaded"), default=None)

    cmp_cmd = sub.add_parser("compare", help="run two or more structure kinds and diff outputs")
    cmp_cmd.add_argument("manifest", type=Path)
    cmp_cmd.add_argument(
        "--kinds", nargs="+", choices=RUNNABLE_KINDS, default=["scdq", ORACLE_KIND]
    )

    mem = sub.add_parser("memory", help="closed-form memory tables and sweeps")
    mem.add_argument("--presyn", type=int, default=256)
    mem.add_argument("--postsyn", type=int, default=256)
    mem.add_argument("--levels", type=int, default=16)
    mem.add_argument("--alpha", type=float, default=1.0)
    mem.add_argument("--word-bits", type=int, default=16)
    mem.add_argument("--weight-bits", type=int, default=16)
    mem.add_argument(
        "--sweep", default=None, metavar="LO:HI[:STEP]", help="CSV sweep over delay depths"
    )
    mem.add_argument(
        "--crossover",
        nargs=2,
        metavar=("KIND_A", "KIND_B"),
        default=None,
        help="density at which the two kinds need equal bits",
    )
    mem.add_argument("--out", type=Path, default=None, help="write to file instead of stdout")

    trace = sub.add_parser("trace", help="run a manifest and dump event-lifespan CSVs")
    trace.add_argument("manifest", type=Path)
    trace.add_argument("--structure", choices=_EVENT_TRACE_KINDS, default=None)
    trace.add_argument(
        "--column", choices=("delay_tag", "counter"), default="delay_tag",
        help="third CSV column: elapsed delay tag (plots) or remaining counter",
    )
    trace.add_argument("--wvu", action="store_true", help="also dump WVU/clz tables")

    return parser


# -- handlers ---------------------------------------------------------------


def _cmd_gen(args) -> int:
    shape = parse_shape(args.shape)
    network = random_network(
        seed=args.seed,
        shape=shape,
        levels=args.levels,
        first_levels=args.first_levels,
        stride=args.stride,
        prune_mode=args.prune,
        keep_k=args.keep_k,
        weight_span=args.weight_span,
        decay=args.decay,
        threshold=args.threshold,
    )
    spikes = random_spikes(args.seed + 1, shape[0], args.duration, args.density)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / "model.json"
    spikes_path = out / "spikes.jsonl"
    save_model(network, model_path, inline_weights=args.inline_weights)
    save_spikes(spikes, spikes_path)
    manifest = RunManifest(
        model_path=model_path,
        spikes_path=spikes_path,
        structure=args.structure,
        capacity=args.capacity,
        seed=args.seed,
        output_dir=out / "out",
    )
    manifest_path = save_manifest(manifest, out / "manifest.json")
    _say(f"wrote {model_path}, {spikes_path}, {manifest_path}")
    return EXIT_OK


def _load_run_inputs(manifest: RunManifest):
    network = load_model(manifest.model_path)
    if manifest.policy is not None:
        network = DelayNetwork(network.layers, policy=manifest.policy)
    spikes = load_spikes(manifest.spikes_path)
    return network, spikes


def _cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    structure = args.structure or manifest.structure
    scheduler = args.scheduler or manifest.scheduler
    network, spikes = _load_run_inputs(manifest)
    want_events = manifest.trace_events and structure in _EVENT_TRACE_KINDS
    collectors = {
        k: [] for k, layer in enumerate(network.layers) if layer.delay_levels > 1
    }
    trace_factory = (lambda k: collectors[k].append) if want_events else None
    pipeline = Pipeline(
        network,
        structure_kind=structure,
        capacity=manifest.capacity,
        scheduler=scheduler,
        record_membranes=manifest.trace_membranes,
        record_inputs=False,
        trace_factory=trace_factory,
    )
    result = pipeline.run(spikes)
    outdir = manifest.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    written = [write_result(result, outdir / "result.json")]
    if manifest.trace_membranes:
        written.append(write_membrane_csv(result, outdir / "membranes.csv"))
    if want_events:
        for k, records in collectors.items():
            written.append(
                write_event_trace_csv(records, outdir / f"events_layer{k}.csv")
            )
    _say(
        f"classification={result.classification} "
        f"output_spikes={result.metrics.output_spikes} "
        + " ".join(str(p) for p in written)
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    manifest = load_manifest(args.manifest)
    kinds = list(dict.fromkeys(args.kinds))
    if len(kinds) < 2:
        raise _UsageError("compare needs at least two distinct kinds")
    network, spikes = _load_run_inputs(manifest)
    pipeline = Pipeline(
        network,
        capacity=manifest.capacity,
        scheduler=manifest.scheduler,
        record_membranes=True,
        record_inputs=True,
    )
    from dataclasses import replace

    baseline = replace(pipeline, structure_kind=kinds[0]).run(spikes)
    for kind in kinds[1:]:
        candidate = replace(pipeline, structure_kind=kind).run(spikes)
        div = first_divergence(baseline, candidate)
        if div is not None:
            section, layer, t, j = div
            print(
                f"divergence: {kinds[0]} vs {kind}: {section} "
                f"layer={layer} timestep={t} neuron={j}"
            )
            return EXIT_DIVERGED
    print(f"identical: {', '.join(kinds)}")
    return EXIT_OK


def _parse_span(text: str) -> range:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise _UsageError(f"bad sweep span {text!r}; expected LO:HI or LO:HI:STEP")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise _UsageError(f"bad sweep span {text!r}") from None
    if lo < 1 or hi < lo or step < 1:
        raise _UsageError(f"bad sweep span {text!r}")
    return range(lo, hi + 1, step)


def _cmd_memory(args) -> int:
    lines: list[str] = []
    if args.crossover is not None:
        kind_a, kind_b = args.crossover
        alpha = crossover_alpha(
            kind_a,
            kind_b,
            presyn=args.presyn,
            postsyn=args.postsyn,
            levels=args.levels,
            word_bits=args.word_bits,
            weight_bits=args.weight_bits,
        )
        lines.append(f"crossover_alpha,{kind_a},{kind_b},{alpha}")
    elif args.sweep is not None:
        sweep = scaling_sweep(
            args.alpha, args.presyn, _parse_span(args.sweep), postsyn=args.postsyn
        )
        lines.append("levels,sdq_events,scdq_events,scdq_1f_events,ring_slots,ratio")
        for row in sweep.rows():
            lines.append(",".join(str(v) for v in row))
    else:
        lines.append("kind,I,J,L,alpha,events,bits")
        for kind in STRUCTURE_KINDS:
            events = memory_events(
                kind, args.alpha, args.presyn, args.levels, postsyn=args.postsyn
            )
            bits = memory_bits(
                kind,
                args.alpha,
                args.presyn,
                args.postsyn,
                args.levels,
                word_bits=args.word_bits,
                weight_bits=args.weight_bits,
            )
            lines.append(
                f"{kind},{args.presyn},{args.postsyn},{args.levels},"
                f"{args.alpha},{events},{bits}"
            )
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text)
        _say(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_trace(args) -> int:
    manifest = load_manifest(args.manifest)
    structure = args.structure or manifest.structure
    if structure not in _EVENT_TRACE_KINDS:
        raise FormatError(
            f"structure {structure!r} stores no events to trace; "
            f"pick one of {_EVENT_TRACE_KINDS} via --structure"
        )
    network, spikes = _load_run_inputs(manifest)
    collectors = {
        k: [] for k, layer in enumerate(network.layers) if layer.delay_levels > 1
    }
    pipeline = Pipeline(
        network,
        structure_kind=structure,
        capacity=manifest.capacity,
        scheduler=manifest.scheduler,
        record_membranes=False,
        record_inputs=False,
        trace_factory=lambda k: collectors[k].append,
    )
    pipeline.run(spikes)
    outdir = manifest.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for k, records in collectors.items():
        written.append(
            write_event_trace_csv(
                records, outdir / f"trace_layer{k}.csv", tag_column=args.column
            )
        )
    if args.wvu:
        from .model import derive_wvu
        from .wvu import WvuFilter

        for k, layer in enumerate(network.layers):
            if layer.delay_levels > 1:
                written.append(
                    write_wvu_csv(
                        WvuFilter(derive_wvu(layer.weights)), outdir / f"wvu_layer{k}.csv"
                    )
                )
    _say(" ".join(str(p) for p in written))
    return EXIT_OK


_HANDLERS = {
    "gen": _cmd_gen,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "memory": _cmd_memory,
    "trace": _cmd_trace,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
