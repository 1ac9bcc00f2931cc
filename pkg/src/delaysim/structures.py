"""The four interchangeable delay structures behind one delivery contract.

A delay structure sits between a presynaptic spike source and a
postsynaptic core. The contract: a spike from source i pushed at
timestep t yields exactly one delivery (i, d) at timestep t+d for every
delay level d where the pruning filter says the level is useful, and
nothing else.

* Scdq              - two FIFOs (pre- and post-processing) swapped at
                      end of timestep; events carry a countdown counter.
* ScdqSingleFifo    - one FIFO storing each live event once; age is
                      derived from the event's spawn cohort.
* SharedDelayQueue  - cascade of per-level FIFOs; one event copy per
                      useful level, shifting one level per timestep.
* RingBuffer        - per-postsynaptic-neuron accumulator slots; stores
                      weight sums instead of events and yields the due
                      slot at end of timestep.

All integer state lives in numpy arrays so the hot filtering loops can
run through the kernel backend (compiled or pure Python, bit-identical).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import backend
from .errors import AccumulatorOverflowError, QueueOverflowError, SimulationStateError
from .events import DEFAULT_CODEC, EventCodec
from .metrics import (
    KIND_RING,
    KIND_SCDQ,
    KIND_SCDQ_1F,
    KIND_SDQ,
    STRUCTURE_KINDS,
    StructureMetrics,
)
from .model import FixedPointPolicy, DEFAULT_POLICY
from .wvu import WvuFilter

DEFAULT_CAPACITY = 2048  # events; matches a 2048-word queue SRAM

ACTION_ENTER = "enter"
ACTION_EXIT = "exit"
ACTION_REQUEUE = "requeue"
ACTION_RETIRE = "retire"


class DeliveryRecord(NamedTuple):
    """One spike arrival at the postsynaptic side: source i, elapsed delay d."""

    source: int
    delay: int


class TraceRecord(NamedTuple):
    """One structure-level event for lifespan plots and CSV dumps."""

    timestep: int
    source: int
    counter: int
    delay_tag: int
    action: str


TraceSink = Callable[[TraceRecord], None]


def _as_sources(srcs, presyn_count: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.atleast_1d(np.asarray(srcs, dtype=np.int32)))
    if arr.ndim != 1:
        raise ValueError("spike sources must be a 1-D sequence of addresses")
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= presyn_count):
        raise IndexError(f"spike source out of range [0, {presyn_count})")
    return arr


class DelayStructure:
    """Shared plumbing: filter tables, codec check, metrics, trace sink."""

    kind: str = "abstract"

    def __init__(
        self,
        wvu_filter: WvuFilter,
        capacity: int = DEFAULT_CAPACITY,
        codec: EventCodec | None = None,
        trace: TraceSink | None = None,
    ):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.filter = wvu_filter
        self.capacity = int(capacity)
        self.codec = DEFAULT_CODEC if codec is None else codec
        self.presyn_count = wvu_filter.presyn_count
        self.levels = wvu_filter.delay_levels
        if not self.codec.fits(self.presyn_count, self.levels):
            raise ValueError(
                f"event word layout ({self.codec.addr_bits} addr / "
                f"{self.codec.counter_bits} counter bits) cannot encode "
                f"I={self.presyn_count}, L={self.levels}"
            )
        self._wvu = wvu_filter.wvu
        self._clz = wvu_filter.clz_table
        self._trace = trace
        self._t = 0
        self._step_pushes = 0
        self.metrics = StructureMetrics(
            kind=self.kind,
            capacity=self.capacity,
            presyn_count=self.presyn_count,
            levels=self.levels,
        )

    # -- contract -----------------------------------------------------------
    def push_spike(self, i: int) -> None:
        self.push_spikes(np.array([i], dtype=np.int32))

    def push_spikes(self, srcs) -> None:
        raise NotImplementedError

    def drain_deliveries(self) -> tuple[np.ndarray, np.ndarray]:
        """All remaining deliveries for the current timestep as (src, d) arrays."""
        raise NotImplementedError

    def deliveries_now(self) -> list[DeliveryRecord]:
        src, d = self.drain_deliveries()
        return [DeliveryRecord(int(s), int(t)) for s, t in zip(src, d)]

    def end_of_timestep(self) -> Optional[np.ndarray]:
        raise NotImplementedError

    # -- shared helpers ------------------------------------------------------
    @property
    def timestep(self) -> int:
        return self._t

    @property
    def live(self) -> int:
        raise NotImplementedError

    def _note_pushes(self, count: int) -> None:
        self._step_pushes += count

    def _finish_step(self) -> None:
        if self._step_pushes > self.metrics.max_step_pushes:
            self.metrics.max_step_pushes = self._step_pushes
        self._step_pushes = 0
        self._t += 1

    def _emit(self, source: int, counter: int, delay_tag: int, action: str) -> None:
        if self._trace is not None:
            self._trace(TraceRecord(self._t, int(source), int(counter), int(delay_tag), action))


class Scdq(DelayStructure):
    """Two-FIFO circular delay queue.

    Spikes enter the pre-processing queue (PRQ) with counter L-1. Draining
    pops every PRQ word: a word with counter c has elapsed d = (L-1) - c
    timesteps and is delivered iff the filter forwards (i, d); it re-enters
    the post-processing queue (POQ) with counter c-1 iff c > clz(i). At end
    of timestep the two FIFOs swap roles.
    """

    kind = KIND_SCDQ

    def __init__(self, wvu_filter, capacity=DEFAULT_CAPACITY, codec=None, trace=None):
        super().__init__(wvu_filter, capacity, codec, trace)
        self._prq_src = np.empty(self.capacity, dtype=np.int32)
        self._prq_cnt = np.empty(self.capacity, dtype=np.int32)
        self._poq_src = np.empty(self.capacity, dtype=np.int32)
        self._poq_cnt = np.empty(self.capacity, dtype=np.int32)
        self._n_prq = 0  # filled entries in the PRQ buffer
        self._prq_read = 0  # consumed entries (FIFO head)
        self._n_poq = 0
        self._del_src = np.empty(self.capacity, dtype=np.int32)
        self._del_d = np.empty(self.capacity, dtype=np.int32)
        self._actions = np.empty(self.capacity, dtype=np.uint8)
        self._hw_prq = 0  # high-water marks per FIFO role
        self._hw_poq = 0

    @property
    def live(self) -> int:
        return (self._n_prq - self._prq_read) + self._n_poq

    def _note_regions(self) -> None:
        prq = self._n_prq - self._prq_read
        if prq > self._hw_prq:
            self._hw_prq = prq
        if self._n_poq > self._hw_poq:
            self._hw_poq = self._n_poq
        total = prq + self._n_poq
        if total > self.metrics.peak_live:
            self.metrics.peak_live = total
        demand = self._hw_prq + self._hw_poq
        if demand > self.metrics.peak_demand:
            self.metrics.peak_demand = demand

    def push_spikes(self, srcs) -> None:
        arr = _as_sources(srcs, self.presyn_count)
        self._note_pushes(arr.size)
        if arr.size == 0:
            return
        kept = arr[self._clz[arr] < self.levels]
        self.metrics.entry_dropped += arr.size - kept.size
        if kept.size == 0:
            return
        if self.live + kept.size > self.capacity:
            raise QueueOverflowError(
                f"scdq over capacity: {self.live} live + {kept.size} new > {self.capacity}"
            )
        end = self._n_prq + kept.size
        self._prq_src[self._n_prq:end] = kept
        self._prq_cnt[self._n_prq:end] = self.levels - 1
        self._n_prq = end
        self.metrics.entered += kept.size
        if self._trace is not None:
            for s in kept:
                self._emit(s, self.levels - 1, 0, ACTION_ENTER)
        self._note_regions()

    def drain_deliveries(self) -> tuple[np.ndarray, np.ndarray]:
        pending = self._n_prq - self._prq_read
        if pending == 0:
            return (np.empty(0, dtype=np.int32),) * 2
        self._note_regions()
        src = self._prq_src[self._prq_read:self._n_prq]
        cnt = self._prq_cnt[self._prq_read:self._n_prq]
        out_src = self._poq_src[self._n_poq:self._n_poq + pending]
        out_cnt = self._poq_cnt[self._n_poq:self._n_poq + pending]
        n_keep, n_del = backend.kernels().drain_filter(
            src, cnt, pending, self._wvu, self._clz, self.levels,
            out_src, out_cnt, self._del_src, self._del_d, self._actions,
        )
        if self._trace is not None:
            for k in range(pending):
                s = int(src[k])
                c = int(cnt[k])
                d = (self.levels - 1) - c
                act = int(self._actions[k])
                if act & 1:
                    self._emit(s, c, d, ACTION_EXIT)
                if act & 2:
                    self._emit(s, c - 1, d, ACTION_REQUEUE)
                else:
                    self._emit(s, c, d, ACTION_RETIRE)
        self._n_poq += n_keep
        self._prq_read = 0
        self._n_prq = 0
        self.metrics.delivered += n_del
        self.metrics.suppressed += pending - n_del
        self.metrics.requeued += n_keep
        self.metrics.retired += pending - n_keep
        self._note_regions()
        return self._del_src[:n_del].copy(), self._del_d[:n_del].copy()

    def end_of_timestep(self) -> None:
        if self._n_prq - self._prq_read:
            raise SimulationStateError(
                "end of timestep with an undrained pre-processing queue"
            )
        self._prq_src, self._poq_src = self._poq_src, self._prq_src
        self._prq_cnt, self._poq_cnt = self._poq_cnt, self._prq_cnt
        self._n_prq = self._n_poq
        self._prq_read = 0
        self._n_poq = 0
        self._finish_step()
        self._note_regions()
        return None


@dataclass
class _Cohort:
    """Events spawned in one timestep; their age is shared, not stored."""

    spawn: int
    members: np.ndarray
    scanned: int = 0  # members[:scanned] already scanned this timestep
    scan_t: int = -1


class ScdqSingleFifo(DelayStructure):
    """Single-FIFO delay queue: each live event stored once, no counter field.

    Events sit in spawn cohorts; the whole queue is scanned once per
    timestep. An event of age d is delivered iff the filter forwards
    (i, d) and retired once no useful level remains beyond d. Steady-state
    occupancy is about half of the two-FIFO queue's provisioned demand.
    """

    kind = KIND_SCDQ_1F

    def __init__(self, wvu_filter, capacity=DEFAULT_CAPACITY, codec=None, trace=None):
        super().__init__(wvu_filter, capacity, codec, trace)
        self._cohorts: deque[_Cohort] = deque()
        self._live = 0
        self._keep_src = np.empty(self.capacity, dtype=np.int32)
        self._del_src = np.empty(self.capacity, dtype=np.int32)
        self._del_d = np.empty(self.capacity, dtype=np.int32)
        self._actions = np.empty(self.capacity, dtype=np.uint8)

    @property
    def live(self) -> int:
        return self._live

    def _note_peaks(self) -> None:
        if self._live > self.metrics.peak_live:
            self.metrics.peak_live = self._live
            self.metrics.peak_demand = self._live

    def push_spikes(self, srcs) -> None:
        arr = _as_sources(srcs, self.presyn_count)
        self._note_pushes(arr.size)
        if arr.size == 0:
            return
        kept = arr[self._clz[arr] < self.levels]
        self.metrics.entry_dropped += arr.size - kept.size
        if kept.size == 0:
            return
        if self._live + kept.size > self.capacity:
            raise QueueOverflowError(
                f"single-fifo queue over capacity: {self._live} live + "
                f"{kept.size} new > {self.capacity}"
            )
        if self._cohorts and self._cohorts[-1].spawn == self._t:
            tail = self._cohorts[-1]
            tail.members = np.concatenate([tail.members, kept])
        else:
            self._cohorts.append(_Cohort(self._t, kept.copy()))
        self._live += kept.size
        self.metrics.entered += kept.size
        if self._trace is not None:
            for s in kept:
                self._emit(s, self.levels - 1, 0, ACTION_ENTER)
        self._note_peaks()

    def drain_deliveries(self) -> tuple[np.ndarray, np.ndarray]:
        out_src: list[np.ndarray] = []
        out_d: list[np.ndarray] = []
        for cohort in self._cohorts:
            if cohort.scan_t != self._t:
                cohort.scan_t = self._t
                cohort.scanned = 0
            seg = cohort.members[cohort.scanned:]
            if seg.size == 0:
                continue
            age = self._t - cohort.spawn
            seg = np.ascontiguousarray(seg)
            n_keep, n_del = backend.kernels().scan_cohort(
                seg, seg.size, age, self._wvu, self._clz, self.levels,
                self._keep_src, self._del_src, self._del_d, self._actions,
            )
            if self._trace is not None:
                counter = (self.levels - 1) - age
                for k in range(seg.size):
                    s = int(seg[k])
                    act = int(self._actions[k])
                    if act & 1:
                        self._emit(s, counter, age, ACTION_EXIT)
                    if not act & 2:
                        self._emit(s, counter, age, ACTION_RETIRE)
            retired = seg.size - n_keep
            cohort.members = np.concatenate(
                [cohort.members[:cohort.scanned], self._keep_src[:n_keep]]
            )
            cohort.scanned = cohort.members.size
            self._live -= retired
            self.metrics.delivered += n_del
            self.metrics.suppressed += seg.size - n_del
            self.metrics.retired += retired
            if n_del:
                out_src.append(self._del_src[:n_del].copy())
                out_d.append(self._del_d[:n_del].copy())
        while self._cohorts and self._cohorts[0].members.size == 0:
            self._cohorts.popleft()
        if not out_src:
            return (np.empty(0, dtype=np.int32),) * 2
        return np.concatenate(out_src), np.concatenate(out_d)

    def end_of_timestep(self) -> None:
        for cohort in self._cohorts:
            if cohort.members.size and (
                cohort.scan_t != self._t or cohort.scanned != cohort.members.size
            ):
                raise SimulationStateError(
                    "end of timestep with unscanned events in the single-FIFO queue"
                )
        self._finish_step()
        return None


class SharedDelayQueue(DelayStructure):
    """Per-level FIFO cascade: one event copy per useful delay level.

    A spike at level d >= 1 is stored and shifts one cascade position per
    timestep until due; a useful level 0 is delivered immediately without
    storage. Each stored copy enters and exits exactly once, so the
    structure needs one slot per (event, useful level) pair.
    """

    kind = KIND_SDQ

    def __init__(self, wvu_filter, capacity=DEFAULT_CAPACITY, codec=None, trace=None):
        super().__init__(wvu_filter, capacity, codec, trace)
        # position 0 = due this timestep, position w = due after w timesteps
        self._pending: deque[list[tuple[np.ndarray, int]]] = deque(
            [] for _ in range(self.levels - 1)
        )
        self._due: list[tuple[np.ndarray, int]] = []
        self._immediate: list[np.ndarray] = []
        self._live = 0
        self._position_hw = np.zeros(self.levels, dtype=np.int64)

    @property
    def live(self) -> int:
        return self._live

    def _note_positions(self) -> None:
        content = np.zeros(self.levels, dtype=np.int64)
        content[0] = sum(chunk.size for chunk, _ in self._due)
        for k, bucket in enumerate(self._pending):
            content[k + 1] = sum(chunk.size for chunk, _ in bucket)
        np.maximum(self._position_hw, content, out=self._position_hw)
        self.metrics.peak_demand = int(self._position_hw.sum())
        if self._live > self.metrics.peak_live:
            self.metrics.peak_live = self._live

    def push_spikes(self, srcs) -> None:
        arr = _as_sources(srcs, self.presyn_count)
        self._note_pushes(arr.size)
        if arr.size == 0:
            return
        self.metrics.entry_dropped += int(np.count_nonzero(self._clz[arr] >= self.levels))
        chunks: list[tuple[np.ndarray, int]] = []
        stored = 0
        for d in range(1, self.levels):
            chunk = arr[self._wvu[arr, d] != 0]
            if chunk.size:
                chunks.append((chunk, d))
                stored += chunk.size
        if self._live + stored > self.capacity:
            raise QueueOverflowError(
                f"shared delay queue over capacity: {self._live} live + "
                f"{stored} new > {self.capacity}"
            )
        for chunk, d in chunks:
            self._pending[d - 1].append((chunk, d))
            if self._trace is not None:
                for s in chunk:
                    self._emit(s, d, d, ACTION_ENTER)
        self._live += stored
        self.metrics.entered += stored
        immediate = arr[self._wvu[arr, 0] != 0]
        if immediate.size:
            self._immediate.append(immediate)
        self._note_positions()

    def drain_deliveries(self) -> tuple[np.ndarray, np.ndarray]:
        out_src: list[np.ndarray] = []
        out_d: list[np.ndarray] = []
        for chunk, d0 in self._due:
            out_src.append(chunk)
            out_d.append(np.full(chunk.size, d0, dtype=np.int32))
            if self._trace is not None:
                for s in chunk:
                    self._emit(s, 0, d0, ACTION_EXIT)
                    self._emit(s, 0, d0, ACTION_RETIRE)
            self._live -= chunk.size
            self.metrics.delivered += chunk.size
            self.metrics.retired += chunk.size
        self._due = []
        for chunk in self._immediate:
            out_src.append(chunk)
            out_d.append(np.zeros(chunk.size, dtype=np.int32))
            if self._trace is not None:
                for s in chunk:
                    self._emit(s, 0, 0, ACTION_EXIT)
            self.metrics.delivered += chunk.size
        self._immediate = []
        if not out_src:
            return (np.empty(0, dtype=np.int32),) * 2
        return np.concatenate(out_src), np.concatenate(out_d)

    def end_of_timestep(self) -> None:
        if self._due or self._immediate:
            raise SimulationStateError(
                "end of timestep with undelivered due events in the shared delay queue"
            )
        if self.levels > 1:
            self._due = self._pending.popleft()
            self._pending.append([])
        self._finish_step()
        self._note_positions()
        return None


class RingBuffer(DelayStructure):
    """Dendritic accumulator ring: J slots per delay level, no events.

    Pushing a spike adds the source's whole L x J weight block into the
    slots, level d landing d positions ahead of the cursor. At end of
    timestep the cursor slot is returned as the per-neuron input vector,
    zeroed, and the cursor advances. Storage is exactly J*L slots no
    matter the activity.
    """

    kind = KIND_RING

    def __init__(
        self,
        wvu_filter,
        weights: np.ndarray,
        capacity: int = DEFAULT_CAPACITY,
        codec: EventCodec | None = None,
        trace: TraceSink | None = None,
        policy: FixedPointPolicy = DEFAULT_POLICY,
    ):
        super().__init__(wvu_filter, capacity, codec, trace)
        weights = np.ascontiguousarray(weights, dtype=np.int64)
        if weights.ndim != 3 or weights.shape[:2] != (self.levels, self.presyn_count):
            raise ValueError("weights must have shape (L, I, J) matching the filter")
        self._weights = weights
        self.postsyn_count = weights.shape[2]
        self._slots = np.zeros((self.levels, self.postsyn_count), dtype=np.int64)
        self._cursor = 0
        self._policy = policy
        self.macs = 0
        self.zero_skips = 0
        slot_count = self.levels * self.postsyn_count
        self.metrics.capacity = slot_count
        self.metrics.peak_live = slot_count
        self.metrics.peak_demand = slot_count

    @property
    def live(self) -> int:
        return self.levels * self.postsyn_count

    def push_spikes(self, srcs) -> None:
        arr = _as_sources(srcs, self.presyn_count)
        self._note_pushes(arr.size)
        if arr.size == 0:
            return
        macs, skips = backend.kernels().ring_push_batch(
            self._slots, self._weights, arr, arr.size, self._cursor
        )
        self.macs += macs
        self.zero_skips += skips
        self.metrics.entered += arr.size

    def drain_deliveries(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.empty(0, dtype=np.int32),) * 2

    def end_of_timestep(self) -> np.ndarray:
        lo = int(self._slots.min()) if self._slots.size else 0
        hi = int(self._slots.max()) if self._slots.size else 0
        if lo < self._policy.acc_min or hi > self._policy.acc_max:
            raise AccumulatorOverflowError(
                f"ring-buffer slot value {lo if lo < self._policy.acc_min else hi} "
                f"outside [{self._policy.acc_min}, {self._policy.acc_max}]"
            )
        vec = self._slots[self._cursor].copy()
        self._slots[self._cursor] = 0
        self._cursor = (self._cursor + 1) % self.levels
        self._finish_step()
        return vec


_STRUCTURE_CLASSES = {
    KIND_SCDQ: Scdq,
    KIND_SCDQ_1F: ScdqSingleFifo,
    KIND_SDQ: SharedDelayQueue,
}


def make_structure(
    kind: str,
    wvu_filter: WvuFilter,
    capacity: int = DEFAULT_CAPACITY,
    codec: EventCodec | None = None,
    trace: TraceSink | None = None,
    weights: np.ndarray | None = None,
    policy: FixedPointPolicy = DEFAULT_POLICY,
) -> DelayStructure:
    """Build a delay structure by kind name (see STRUCTURE_KINDS)."""
    if kind == KIND_RING:
        if weights is None:
            raise ValueError("ring-buffer structure requires the weight tensor")
        return RingBuffer(wvu_filter, weights, capacity, codec, trace, policy)
    try:
        cls = _STRUCTURE_CLASSES[kind]
    except KeyError:
        raise ValueError(
            f"unknown structure kind {kind!r}; expected one of {STRUCTURE_KINDS}"
        ) from None
    return cls(wvu_filter, capacity, codec, trace)
