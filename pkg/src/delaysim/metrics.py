"""Memory-scaling model and run statistics.

The memory model answers one question: how much storage does a delay
structure need for a layer with I presynaptic sources, J postsynaptic
neurons, L delay levels, and average spike density alpha (fraction of
sources spiking per timestep)?

Event-queue structures are provisioned in events:

* shared-delay-queue  : alpha*I * (L^2 + L) / 2   (one copy per level)
* scdq                : alpha*I * (2L - 1)        (PRQ + POQ regions)
* scdq-1fifo          : alpha*I * L               (single region)

The dendritic ring buffer stores accumulator slots instead of events:
J * L slots, independent of alpha. Bit costs multiply events by the
event word width and slots by the weight width.

Densities are interpreted as exact decimals (0.3 means 3/10), so event
counts are deterministic integers and sweep curves have exact finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

KIND_SCDQ = "scdq"
KIND_SCDQ_1F = "scdq-1fifo"
KIND_SDQ = "shared-delay-queue"
KIND_RING = "ring-buffer"

STRUCTURE_KINDS = (KIND_SCDQ, KIND_SCDQ_1F, KIND_SDQ, KIND_RING)

_EVENT_KINDS = (KIND_SCDQ, KIND_SCDQ_1F, KIND_SDQ)


def _exact(alpha) -> Fraction:
    """Interpret a density as an exact rational (floats via their decimal repr)."""
    if isinstance(alpha, Fraction):
        value = alpha
    elif isinstance(alpha, int):
        value = Fraction(alpha)
    else:
        value = Fraction(Decimal(str(alpha)))
    if not 0 <= value <= 1:
        raise ValueError(f"density must lie in [0, 1], got {alpha}")
    return value


def _events_exact(kind: str, alpha: Fraction, presyn: int, levels: int) -> Fraction:
    if kind == KIND_SDQ:
        return alpha * presyn * levels * (levels + 1) / 2
    if kind == KIND_SCDQ:
        return alpha * presyn * (2 * levels - 1)
    if kind == KIND_SCDQ_1F:
        return alpha * presyn * levels
    raise ValueError(f"{kind!r} is not an event-queue structure")


def memory_events(kind: str, alpha, presyn: int, levels: int, postsyn: int | None = None) -> int:
    """Provisioned storage: events (ceiling) for queues, slots for the ring."""
    if kind == KIND_RING:
        if postsyn is None:
            raise ValueError("ring-buffer sizing needs postsyn")
        return ring_slots(postsyn, levels)
    if kind not in _EVENT_KINDS:
        raise ValueError(f"unknown structure kind {kind!r}")
    return math.ceil(_events_exact(kind, _exact(alpha), presyn, levels))


def ring_slots(postsyn: int, levels: int) -> int:
    """Accumulator slots held by a dendritic ring buffer."""
    return postsyn * levels


def memory_bits(
    kind: str,
    alpha,
    presyn: int,
    postsyn: int,
    levels: int,
    word_bits: int = 16,
    weight_bits: int = 16,
) -> int:
    """Storage bits: events x word width, or ring slots x weight width."""
    if kind == KIND_RING:
        return ring_slots(postsyn, levels) * weight_bits
    return memory_events(kind, alpha, presyn, levels) * word_bits


def crossover_alpha(
    kind_a: str,
    kind_b: str,
    presyn: int,
    postsyn: int,
    levels: int,
    word_bits: int = 16,
    weight_bits: int = 16,
) -> float:
    """Density at which an event queue's storage bits match a ring buffer's.

    Exactly one of the two kinds must be density-dependent (an event queue);
    the other must be the ring buffer. Below the returned density the event
    queue is smaller, above it the ring buffer wins. The crossover of the
    continuous formulas is computed exactly and rounded to three decimals,
    clamped to [0, 1].
    """
    kinds = {kind_a, kind_b}
    if KIND_RING not in kinds or kinds == {KIND_RING}:
        raise ValueError("exactly one kind must be density-dependent (non-ring)")
    event_kind = kind_a if kind_b == KIND_RING else kind_b
    if levels < 1:
        raise ValueError("levels must be >= 1")
    ring_bits = ring_slots(postsyn, levels) * weight_bits
    event_bits_at_full = _events_exact(event_kind, Fraction(1), presyn, levels) * word_bits
    if event_bits_at_full == 0:
        raise ValueError("event structure has zero capacity cost; no crossover exists")
    exact = min(Fraction(ring_bits) / event_bits_at_full, Fraction(1))
    return float(round(exact, 3))


@dataclass(frozen=True)
class MemorySweep:
    """Exact event-count curves over a range of delay depths."""

    alpha: Fraction
    presyn: int
    levels: tuple[int, ...]
    sdq_events: tuple[Fraction, ...]
    scdq_events: tuple[Fraction, ...]
    scdq_1f_events: tuple[Fraction, ...]
    ratio: tuple[Fraction, ...]  # sdq / scdq advantage factor
    ring_slots: tuple[int, ...] | None = None  # present when postsyn was given

    def rows(self):
        """Float rows (levels, sdq, scdq, scdq_1f, [ring,] ratio) for display."""
        for k, levels in enumerate(self.levels):
            row = [
                levels,
                float(self.sdq_events[k]),
                float(self.scdq_events[k]),
                float(self.scdq_1f_events[k]),
            ]
            if self.ring_slots is not None:
                row.append(self.ring_slots[k])
            row.append(float(self.ratio[k]))
            yield tuple(row)


def scaling_sweep(alpha, presyn: int, levels_seq: Sequence[int], postsyn: int | None = None) -> MemorySweep:
    """Evaluate the analytic memory curves at each delay depth in levels_seq.

    Values are exact rationals (no ceiling), so curve shape is testable:
    scdq grows linearly in L, the shared delay queue quadratically, and
    their ratio strictly increases for L >= 2. When postsyn is given, the
    (density-independent) ring-buffer slot column is included.
    """
    a = _exact(alpha)
    levels = tuple(int(x) for x in levels_seq)
    if not levels:
        raise ValueError("levels_seq must be non-empty")
    if any(x < 1 for x in levels):
        raise ValueError("delay depths must be >= 1")
    sdq = tuple(_events_exact(KIND_SDQ, a, presyn, x) for x in levels)
    scdq = tuple(_events_exact(KIND_SCDQ, a, presyn, x) for x in levels)
    one_f = tuple(_events_exact(KIND_SCDQ_1F, a, presyn, x) for x in levels)
    ratio = tuple(s / c for s, c in zip(sdq, scdq))
    ring = None if postsyn is None else tuple(ring_slots(postsyn, x) for x in levels)
    return MemorySweep(a, presyn, levels, sdq, scdq, one_f, ratio, ring)


@dataclass
class StructureMetrics:
    """Lifetime counters for one delay structure instance.

    peak_live is the largest number of simultaneously stored events at any
    instant (what a shared buffer must hold); peak_demand sums the per-FIFO
    high-water marks, matching how the closed-form provisioning formulas
    size each region separately. For single-region structures the two
    coincide. max_step_pushes / presyn_count is the measured density that
    feeds the formula bounds.
    """

    kind: str
    capacity: int
    presyn_count: int = 0
    levels: int = 0
    entered: int = 0
    entry_dropped: int = 0
    delivered: int = 0
    suppressed: int = 0
    requeued: int = 0
    retired: int = 0
    peak_live: int = 0
    peak_demand: int = 0
    max_step_pushes: int = 0

    @property
    def alpha_measured(self) -> Fraction:
        """Maximum per-timestep fraction of presynaptic neurons that fired."""
        if self.presyn_count == 0:
            return Fraction(0)
        return Fraction(self.max_step_pushes, self.presyn_count)

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["alpha_measured"] = float(self.alpha_measured)
        return out


@dataclass
class RunMetrics:
    """Aggregate statistics for one inference run."""

    timesteps: int = 0
    input_spikes: int = 0
    output_spikes: int = 0
    delivered_events: int = 0
    suppressed_events: int = 0
    retired_events: int = 0
    macs: int = 0
    zero_skips: int = 0
    density_per_timestep: list = field(default_factory=list)
    density_max: float = 0.0
    structures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["structures"] = [m.as_dict() for m in self.structures]
        return out
