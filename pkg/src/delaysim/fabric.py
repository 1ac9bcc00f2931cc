"""Multi-core pipeline: spike routing, EOT barriers, scheduling.

One core per projection, connected by FIFO links that carry packed
event words (spikes for the upcoming timestep followed by exactly one
EOT word). A core buffers incoming spikes until it sees the EOT, then
pushes them into its delay structure, drains the structure's deliveries
into its membranes, runs the LIF update, and forwards its own spikes
plus a fresh EOT downstream.

Two schedulers drive the same per-core code: a sequential round-robin
loop and one thread per core with queue links. Cores are deterministic
functions of their input word stream and links preserve order, so both
schedulers produce identical results; tests assert byte equality.
"""

from __future__ import annotations

import queue as queue_mod
import threading
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .cores import NeuronCore
from .events import EOT_WORD, EventCodec, EventWord
from .metrics import KIND_SCDQ, RunMetrics, STRUCTURE_KINDS
from .model import DelayNetwork, SpikeTrain, derive_wvu
from .oracle import oracle_run
from .structures import DEFAULT_CAPACITY, TraceSink, make_structure
from .wvu import WvuFilter

ORACLE_KIND = "oracle"
RUNNABLE_KINDS = STRUCTURE_KINDS + (ORACLE_KIND,)
SCHEDULERS = ("sequential", "threaded")


@dataclass
class InferenceResult:
    structure_kind: str
    timesteps: int
    rasters: list[np.ndarray]  # input raster first, then one per core (T, width)
    membranes: Optional[list[np.ndarray]]  # per core (T, J)
    input_sums: Optional[list[np.ndarray]]  # per core (T, J)
    spike_counts: np.ndarray
    classification: int
    metrics: RunMetrics


class _CoreDriver:
    """Consumes one link's word stream and advances its core per EOT."""

    def __init__(self, index, core, structure, wvu_filter, in_codec, out_codec, emit):
        self.index = index
        self.core = core
        self.structure = structure
        self.filter = wvu_filter
        self._in_codec = in_codec
        self._out_codec = out_codec
        self._emit = emit
        self._pending: list[int] = []
        self.fired_rows: list[np.ndarray] = []
        self.steps_done = 0

    def on_word(self, packed: int) -> None:
        word = self._in_codec.unpack(packed)
        if word.eot:
            self._step()
        else:
            self._pending.append(word.source)

    def _step(self) -> None:
        srcs = np.asarray(self._pending, dtype=np.int32)
        self._pending.clear()
        if self.structure is None:
            # L=1 projection: direct delivery, gated by the useful-level table
            gated = srcs[self.filter.wvu[srcs, 0] != 0] if srcs.size else srcs
            self.core.receive_batch(gated, np.zeros(gated.size, dtype=np.int32))
            extra = None
        else:
            self.structure.push_spikes(srcs)
            del_src, del_d = self.structure.drain_deliveries()
            self.core.receive_batch(del_src, del_d)
            extra = self.structure.end_of_timestep()
        fired = self.core.end_of_timestep(extra_input=extra)
        self.fired_rows.append(fired)
        for j in fired:
            self._emit(self._out_codec.pack(EventWord(False, int(j), 0)))
        self._emit(self._out_codec.pack(EOT_WORD))
        self.steps_done += 1

    def pad_eot(self, remaining: int) -> None:
        """Unblock downstream consumers after a failure in this core."""
        for _ in range(remaining):
            self._emit(self._out_codec.pack(EOT_WORD))


@dataclass
class Pipeline:
    """Run configuration; structures and cores are rebuilt for every run."""

    network: DelayNetwork
    source: Optional[SpikeTrain] = None
    structure_kind: str = KIND_SCDQ
    capacity: int = DEFAULT_CAPACITY
    scheduler: str = "sequential"
    record_membranes: bool = True
    record_inputs: bool = True
    trace_factory: Optional[Callable[[int], Optional[TraceSink]]] = None

    def run(self, spikes: Optional[SpikeTrain] = None) -> InferenceResult:
        spikes = self.source if spikes is None else spikes
        if spikes is None:
            raise ValueError("no spike train given (neither pipeline.source nor argument)")
        if self.structure_kind not in RUNNABLE_KINDS:
            raise ValueError(
                f"unknown structure kind {self.structure_kind!r}; expected one of {RUNNABLE_KINDS}"
            )
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}; expected one of {SCHEDULERS}")
        if spikes.width != self.network.input_width:
            raise ValueError(
                f"spike train width {spikes.width} does not match "
                f"network input {self.network.input_width}"
            )
        if self.structure_kind == ORACLE_KIND:
            return self._run_oracle(spikes)
        return self._run_events(spikes)

    # -- oracle dispatch ------------------------------------------------------
    def _run_oracle(self, spikes: SpikeTrain) -> InferenceResult:
        res = oracle_run(self.network, spikes)
        horizon = spikes.duration
        counts = np.asarray(spikes.to_raster().sum(axis=1), dtype=np.int64)
        metrics = RunMetrics(
            timesteps=horizon,
            input_spikes=len(spikes.events),
            output_spikes=int(res.spike_counts.sum()),
            density_per_timestep=[c / spikes.width for c in counts.tolist()],
            density_max=float(counts.max() / spikes.width) if counts.size else 0.0,
        )
        return InferenceResult(
            structure_kind=ORACLE_KIND,
            timesteps=horizon,
            rasters=res.rasters,
            membranes=res.membranes if self.record_membranes else None,
            input_sums=res.input_sums if self.record_inputs else None,
            spike_counts=res.spike_counts,
            classification=res.classification,
            metrics=metrics,
        )

    # -- event-driven path ----------------------------------------------------
    def _build_drivers(self, emits):
        network = self.network
        drivers = []
        structures = []
        for k, layer in enumerate(network.layers):
            wvu_filter = WvuFilter(derive_wvu(layer.weights))
            in_codec = EventCodec.sized_for(layer.presyn_count, layer.delay_levels)
            next_layer = network.layers[k + 1] if k + 1 < len(network.layers) else None
            out_codec = (
                EventCodec.sized_for(next_layer.presyn_count, next_layer.delay_levels)
                if next_layer is not None
                else EventCodec.sized_for(layer.postsyn_count, 1)
            )
            if layer.delay_levels == 1:
                structure = None  # same-step delivery, nothing to queue or trace
            else:
                trace = self.trace_factory(k) if self.trace_factory is not None else None
                structure = make_structure(
                    self.structure_kind,
                    wvu_filter,
                    capacity=self.capacity,
                    codec=in_codec,
                    trace=trace,
                    weights=layer.weights,
                    policy=network.policy,
                )
                structures.append(structure)
            core = NeuronCore(
                layer,
                policy=network.policy,
                record_membranes=self.record_membranes,
                record_inputs=self.record_inputs,
            )
            drivers.append(
                _CoreDriver(k, core, structure, wvu_filter, in_codec, out_codec, emits[k])
            )
        return drivers, structures

    def _run_events(self, spikes: SpikeTrain) -> InferenceResult:
        horizon = spikes.duration
        n_cores = len(self.network.layers)
        input_codec = EventCodec.sized_for(
            self.network.input_width, self.network.layers[0].delay_levels
        )
        if self.scheduler == "sequential":
            drivers, structures = self._run_sequential(spikes, input_codec, n_cores)
        else:
            drivers, structures = self._run_threaded(spikes, input_codec, n_cores)
        return self._assemble(spikes, horizon, drivers, structures)

    def _run_sequential(self, spikes, input_codec, n_cores):
        from collections import deque

        links = [deque() for _ in range(n_cores + 1)]
        emits = [links[k + 1].append for k in range(n_cores)]
        drivers, structures = self._build_drivers(emits)
        for step_spikes in spikes.steps():
            for i in step_spikes:
                links[0].append(input_codec.pack(EventWord(False, int(i), 0)))
            links[0].append(input_codec.pack(EOT_WORD))
            for k, driver in enumerate(drivers):
                link = links[k]
                while link:
                    driver.on_word(link.popleft())
        return drivers, structures

    def _run_threaded(self, spikes, input_codec, n_cores):
        queues = [queue_mod.Queue() for _ in range(n_cores)]
        emits = [queues[k + 1].put for k in range(n_cores - 1)]
        emits.append(lambda _word: None)
        drivers, structures = self._build_drivers(emits)
        horizon = spikes.duration
        errors: list[tuple[int, BaseException]] = []
        errors_lock = threading.Lock()

        def worker(driver, q):
            try:
                while driver.steps_done < horizon:
                    driver.on_word(q.get())
            except BaseException as exc:  # noqa: BLE001 - propagated after join
                with errors_lock:
                    errors.append((driver.index, exc))
                driver.pad_eot(horizon - driver.steps_done)

        threads = [
            threading.Thread(target=worker, args=(driver, queues[k]), daemon=True)
            for k, driver in enumerate(drivers)
        ]
        for thread in threads:
            thread.start()
        for step_spikes in spikes.steps():
            for i in step_spikes:
                queues[0].put(input_codec.pack(EventWord(False, int(i), 0)))
            queues[0].put(input_codec.pack(EOT_WORD))
        for thread in threads:
            thread.join()
        if errors:
            errors.sort(key=lambda pair: pair[0])
            raise errors[0][1]
        return drivers, structures

    def _assemble(self, spikes, horizon, drivers, structures) -> InferenceResult:
        rasters = [spikes.to_raster()]
        for driver in drivers:
            width = driver.core.layer.postsyn_count
            raster = np.zeros((horizon, width), dtype=np.uint8)
            for t, row in enumerate(driver.fired_rows):
                raster[t, row] = 1
            rasters.append(raster)
        membranes = None
        input_sums = None
        if self.record_membranes:
            membranes = [
                np.array(d.core.membrane_trace, dtype=np.int64).reshape(
                    horizon, d.core.layer.postsyn_count
                )
                for d in drivers
            ]
        if self.record_inputs:
            input_sums = [
                np.array(d.core.input_trace, dtype=np.int64).reshape(
                    horizon, d.core.layer.postsyn_count
                )
                for d in drivers
            ]
        counts = rasters[-1].sum(axis=0, dtype=np.int64)
        step_counts = rasters[0].sum(axis=1, dtype=np.int64)
        width = self.network.input_width
        metrics = RunMetrics(
            timesteps=horizon,
            input_spikes=len(spikes.events),
            output_spikes=int(counts.sum()),
            delivered_events=sum(s.metrics.delivered for s in structures),
            suppressed_events=sum(s.metrics.suppressed for s in structures),
            retired_events=sum(s.metrics.retired for s in structures),
            macs=sum(d.core.macs for d in drivers)
            + sum(getattr(s, "macs", 0) for s in structures),
            zero_skips=sum(d.core.zero_skips for d in drivers)
            + sum(getattr(s, "zero_skips", 0) for s in structures),
            density_per_timestep=[c / width for c in step_counts.tolist()],
            density_max=float(step_counts.max() / width) if step_counts.size else 0.0,
            structures=[s.metrics for s in structures],
        )
        return InferenceResult(
            structure_kind=self.structure_kind,
            timesteps=horizon,
            rasters=rasters,
            membranes=membranes,
            input_sums=input_sums,
            spike_counts=counts,
            classification=int(np.argmax(counts)) if counts.size else 0,
            metrics=metrics,
        )


def run_inference(pipeline: Pipeline, spikes: Optional[SpikeTrain] = None) -> InferenceResult:
    return pipeline.run(spikes)


def run_with_structure(
    pipeline: Pipeline, structure_kind: str, spikes: Optional[SpikeTrain] = None
) -> InferenceResult:
    """Evaluate the same network and input under a different delay mechanism."""
    return replace(pipeline, structure_kind=structure_kind).run(spikes)


def first_divergence(a: InferenceResult, b: InferenceResult):
    """First (section, layer, timestep, neuron) where two results differ.

    Compares spike rasters, then membrane traces, then input sums (the
    latter two only when recorded on both sides). Returns None when
    equivalent.
    """
    sections = [("raster", a.rasters, b.rasters)]
    if a.membranes is not None and b.membranes is not None:
        sections.append(("membrane", a.membranes, b.membranes))
    if a.input_sums is not None and b.input_sums is not None:
        sections.append(("input_sum", a.input_sums, b.input_sums))
    for name, xs, ys in sections:
        if len(xs) != len(ys):
            return (name, min(len(xs), len(ys)), 0, 0)
        for layer, (x, y) in enumerate(zip(xs, ys)):
            if x.shape != y.shape:
                return (name, layer, 0, 0)
            if not np.array_equal(x, y):
                t, j = np.argwhere(x != y)[0]
                return (name, layer, int(t), int(j))
    return None
