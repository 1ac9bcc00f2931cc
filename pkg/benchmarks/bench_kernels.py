#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernel backends.

Times each inner-loop kernel on synthetic batches, plus one end-to-end
pipeline run, under both backends. Mutating kernels refresh their working
buffers from a pristine copy inside the timed region; both backends pay
the same refresh cost, so the relative numbers stay meaningful.

Usage: python benchmarks/bench_kernels.py [--iters N] [--best-of K]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from delaysim import Pipeline, backend, random_network, random_spikes
from delaysim.model import DECAY_ONE


def best_time(fn, iters, best_of):
    best = float("inf")
    for _ in range(best_of):
        t0 = time.perf_counter()
        for _ in range(iters):
            fn()
        best = min(best, (time.perf_counter() - t0) / iters)
    return best


def kernel_benches(rng, n_events, n_neurons, n_pushes):
    """One bench per kernel at the given batch scale.

    Typical per-timestep batches in a real run are small (tens of events);
    large batches show where numpy's vectorized fallback catches up.
    """
    presyn, levels, postsyn = 256, 32, 64
    wvu = (rng.random((presyn, levels)) < 0.5).astype(np.uint8)
    clz = np.array(
        [levels - 1 - nz[-1] if (nz := np.flatnonzero(row)).size else levels for row in wvu],
        dtype=np.int32,
    )
    weights = rng.integers(-64, 65, size=(levels, presyn, postsyn), dtype=np.int64)
    weights[rng.random(weights.shape) < 0.3] = 0

    src = rng.integers(0, presyn, size=n_events, dtype=np.int32)
    cnt = rng.integers(0, levels, size=n_events, dtype=np.int32)
    out_src = np.empty(n_events, dtype=np.int32)
    out_cnt = np.empty(n_events, dtype=np.int32)
    del_src = np.empty(n_events, dtype=np.int32)
    del_d = np.empty(n_events, dtype=np.int32)
    actions = np.empty(n_events, dtype=np.uint8)

    membranes0 = rng.integers(-(2**30), 2**30, size=n_neurons, dtype=np.int64)
    membranes = membranes0.copy()
    fired = np.empty(n_neurons, dtype=np.int32)

    acc = np.zeros(postsyn, dtype=np.int64)
    deliveries = rng.integers(0, presyn, size=n_events, dtype=np.int32)
    delivery_d = rng.integers(0, levels, size=n_events, dtype=np.int32)

    slots0 = np.zeros((levels, postsyn), dtype=np.int64)
    slots = slots0.copy()
    ring_srcs = rng.integers(0, presyn, size=n_pushes, dtype=np.int32)

    def bench_drain(k):
        k.drain_filter(src, cnt, n_events, wvu, clz, levels, out_src, out_cnt, del_src, del_d, actions)

    def bench_scan(k):
        k.scan_cohort(src, n_events, 7, wvu, clz, levels, out_src, del_src, del_d, actions)

    def bench_apply(k):
        acc[:] = 0
        k.apply_deliveries(deliveries, delivery_d, deliveries.size, weights, acc)

    def bench_lif(k):
        np.copyto(membranes, membranes0)
        k.lif_step(membranes, 29491, 2**20, False, -(2**62), 2**62, fired)

    def bench_ring(k):
        np.copyto(slots, slots0)
        k.ring_push_batch(slots, weights, ring_srcs, ring_srcs.size, 5)

    return [
        (f"drain_filter ({n_events} events)", bench_drain),
        (f"scan_cohort ({n_events} events)", bench_scan),
        (f"apply_deliveries ({n_events} x {postsyn})", bench_apply),
        (f"lif_step ({n_neurons} neurons)", bench_lif),
        (f"ring_push_batch ({n_pushes} x {levels}x{postsyn})", bench_ring),
    ]


def pipeline_bench():
    net = random_network(3, (64, 48, 32), levels=8, first_levels=None, zero_fraction=0.3)
    spikes = random_spikes(4, 64, 64, 0.3)

    def run():
        Pipeline(net, structure_kind="scdq").run(spikes)

    return [("pipeline (64-48-32, L=8, T=64)", run)]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=200, help="calls per timing sample")
    parser.add_argument("--best-of", type=int, default=5, help="samples per cell (min wins)")
    args = parser.parse_args(argv)

    backends = ["python"] + (["compiled"] if "compiled" in backend.available() else [])
    if len(backends) == 1:
        print("note: compiled backend not built; timing the python backend only")

    rng = np.random.default_rng(11)
    cases = kernel_benches(rng, n_events=48, n_neurons=128, n_pushes=8)
    cases += kernel_benches(rng, n_events=4096, n_neurons=4096, n_pushes=512)
    rows = []
    for label, fn in cases:
        cells = {}
        for name in backends:
            previous = backend.use(name)
            try:
                cells[name] = best_time(lambda: fn(backend.kernels()), args.iters, args.best_of)
            finally:
                backend.use(previous)
        rows.append((label, cells))
    for label, fn in pipeline_bench():
        cells = {}
        for name in backends:
            previous = backend.use(name)
            try:
                cells[name] = best_time(fn, max(1, args.iters // 40), args.best_of)
            finally:
                backend.use(previous)
        rows.append((label, cells))

    width = max(len(label) for label, _ in rows)
    header = f"{'benchmark':<{width}}  {'python':>12}"
    if "compiled" in backends:
        header += f"  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, cells in rows:
        line = f"{label:<{width}}  {cells['python'] * 1e6:>10.1f}us"
        if "compiled" in cells:
            speed = cells["python"] / cells["compiled"]
            line += f"  {cells['compiled'] * 1e6:>10.1f}us  {speed:>7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
