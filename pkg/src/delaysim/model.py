"""Delay-parameterized network model and pruning.

A projection between two layers carries a 3-D weight tensor of shape
L x I x J: one I x J weight matrix per discrete delay level d in 0..L-1.
A presynaptic spike at timestep t is delivered to the postsynaptic side
at t+d with weights W[d], for every d whose slice is not entirely zero.

All arithmetic is signed fixed point. Weights are range-checked against
the storage width (default 16 bits); membranes and dendritic slots are
range-checked against the accumulator width (default 32 bits). Overflow
is an error, never wraparound, so sums are order-independent and runs
are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

# LIF decay factors are Q15 fixed point: 32768 represents exactly 1.0 and
# the decay multiply is an arithmetic right shift, v' = (v * q) >> 15.
DECAY_SHIFT = 15
DECAY_ONE = 1 << DECAY_SHIFT

RESET_TO_ZERO = "zero"
RESET_SUBTRACT = "subtract"


@dataclass(frozen=True)
class FixedPointPolicy:
    """Numeric policy: storage width for weights, range for accumulators."""

    weight_bits: int = 16
    acc_bits: int = 32

    def __post_init__(self):
        if not 2 <= self.weight_bits <= 32:
            raise ValueError("weight_bits must be in 2..32")
        if not self.weight_bits <= self.acc_bits <= 62:
            raise ValueError("acc_bits must be in weight_bits..62")

    @property
    def weight_min(self) -> int:
        return -(1 << (self.weight_bits - 1))

    @property
    def weight_max(self) -> int:
        return (1 << (self.weight_bits - 1)) - 1

    @property
    def acc_min(self) -> int:
        return -(1 << (self.acc_bits - 1))

    @property
    def acc_max(self) -> int:
        return (1 << (self.acc_bits - 1)) - 1


DEFAULT_POLICY = FixedPointPolicy()


@dataclass(frozen=True)
class LifParams:
    """Leaky integrate-and-fire parameters in fixed point.

    decay_q15: leak factor in Q15, 0..32768 (32768 = keep everything).
    threshold: firing threshold in weight units, > 0.
    reset_mode: "zero" (clear on fire) or "subtract" (subtract threshold).

    The update applied once per timestep at the end-of-timestep barrier is
        v' = (v + accumulated input) * decay_q15 >> 15
    with a spike emitted iff v' >= threshold.
    """

    decay_q15: int
    threshold: int
    reset_mode: str = RESET_TO_ZERO

    def __post_init__(self):
        if not 0 <= self.decay_q15 <= DECAY_ONE:
            raise ValueError(f"decay_q15 must be in 0..{DECAY_ONE}")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.reset_mode not in (RESET_TO_ZERO, RESET_SUBTRACT):
            raise ValueError(f"unknown reset_mode {self.reset_mode!r}")

    @classmethod
    def from_float(cls, decay: float, threshold: int, reset_mode: str = RESET_TO_ZERO) -> "LifParams":
        """Quantize a real-valued decay in [0, 1] to Q15 (round half away from zero)."""
        if not 0.0 <= decay <= 1.0:
            raise ValueError("decay must be in [0, 1]")
        return cls(int(decay * DECAY_ONE + 0.5), threshold, reset_mode)


@dataclass(frozen=True)
class LayerSpec:
    """One projection: I presynaptic neurons, J postsynaptic, L delay levels."""

    presyn_count: int
    postsyn_count: int
    delay_levels: int
    weights: np.ndarray  # shape (L, I, J), signed integers
    lif: LifParams

    def __post_init__(self):
        if self.presyn_count < 1 or self.postsyn_count < 1:
            raise ValueError("layer dimensions must be >= 1")
        if self.delay_levels < 1:
            raise ValueError("delay_levels must be >= 1")
        w = np.asarray(self.weights, dtype=np.int64)
        expected = (self.delay_levels, self.presyn_count, self.postsyn_count)
        if w.shape != expected:
            raise ValueError(f"weights shape {w.shape} != {expected}")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def check_weight_range(self, policy: FixedPointPolicy) -> None:
        lo, hi = policy.weight_min, policy.weight_max
        if self.weights.size and (self.weights.min() < lo or self.weights.max() > hi):
            raise ValueError(f"weights exceed the {policy.weight_bits}-bit storage range")


@dataclass(frozen=True)
class DelayNetwork:
    """An ordered stack of projections; adjacent layers must be compatible."""

    layers: tuple[LayerSpec, ...]
    policy: FixedPointPolicy = DEFAULT_POLICY

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one projection")
        for k in range(len(layers) - 1):
            if layers[k].postsyn_count != layers[k + 1].presyn_count:
                raise ValueError(
                    f"projection {k} postsyn_count {layers[k].postsyn_count} != "
                    f"projection {k + 1} presyn_count {layers[k + 1].presyn_count}"
                )
        for spec in layers:
            spec.check_weight_range(self.policy)
        object.__setattr__(self, "layers", layers)

    @property
    def input_width(self) -> int:
        return self.layers[0].presyn_count

    @property
    def output_width(self) -> int:
        return self.layers[-1].postsyn_count

    @property
    def layer_widths(self) -> tuple[int, ...]:
        return (self.input_width,) + tuple(s.postsyn_count for s in self.layers)


@dataclass(frozen=True)
class SpikeTrain:
    """Input events: (timestep, neuron) pairs over a horizon of T steps."""

    duration: int
    width: int
    events: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.duration < 0 or self.width < 1:
            raise ValueError("duration must be >= 0 and width >= 1")
        events = tuple((int(t), int(n)) for t, n in self.events)
        last_t = 0
        for t, n in events:
            if not 0 <= t < self.duration:
                raise ValueError(f"event timestep {t} outside 0..{self.duration - 1}")
            if not 0 <= n < self.width:
                raise ValueError(f"event neuron {n} outside 0..{self.width - 1}")
            if t < last_t:
                raise ValueError("events must be sorted by timestep")
            last_t = t
        object.__setattr__(self, "events", events)

    def steps(self) -> Iterator[np.ndarray]:
        """Yield, for each timestep 0..T-1, the array of neurons firing then."""
        per_step: list[list[int]] = [[] for _ in range(self.duration)]
        for t, n in self.events:
            per_step[t].append(n)
        for group in per_step:
            yield np.asarray(group, dtype=np.int32)

    def to_raster(self) -> np.ndarray:
        """Dense 0/1 raster of shape (T, width)."""
        raster = np.zeros((self.duration, self.width), dtype=np.int64)
        for t, n in self.events:
            raster[t, n] = 1
        return raster

    @classmethod
    def from_raster(cls, raster: np.ndarray) -> "SpikeTrain":
        raster = np.asarray(raster)
        ts, ns = np.nonzero(raster)
        order = np.lexsort((ns, ts))
        return cls(
            duration=raster.shape[0],
            width=raster.shape[1],
            events=tuple((int(ts[k]), int(ns[k])) for k in order),
        )


def derive_wvu(weights: np.ndarray) -> np.ndarray:
    """Binary I x L usefulness matrix: entry (i, d) is 1 iff any W[d, i, j] != 0."""
    weights = np.asarray(weights)
    if weights.ndim != 3:
        raise ValueError("weights must have shape (L, I, J)")
    return np.ascontiguousarray((weights != 0).any(axis=2).T.astype(np.uint8))


def prune_per_synapse(weights: np.ndarray, keep_k: int) -> np.ndarray:
    """Keep, per (presyn, postsyn) pair, the keep_k largest-magnitude delay taps.

    Ties keep the smaller delay level. Returns a new tensor; entries are only
    ever zeroed, never changed.
    """
    weights = np.asarray(weights, dtype=np.int64)
    levels = weights.shape[0]
    if not 1 <= keep_k <= levels:
        raise ValueError(f"keep_k must be in 1..{levels}")
    # Stable sort on descending magnitude leaves equal magnitudes in
    # ascending-d order, which is exactly the tie-break we want.
    order = np.argsort(-np.abs(weights), axis=0, kind="stable")
    mask = np.zeros(weights.shape, dtype=bool)
    np.put_along_axis(mask, order[:keep_k], True, axis=0)
    return np.where(mask, weights, 0)


def prune_per_axon(weights: np.ndarray, keep_k: int) -> np.ndarray:
    """Keep, per presynaptic neuron, the keep_k delay levels with the largest
    L1 weight mass over the postsynaptic side; zero every other level's slice.

    Ties keep the smaller delay level.
    """
    weights = np.asarray(weights, dtype=np.int64)
    levels = weights.shape[0]
    if not 1 <= keep_k <= levels:
        raise ValueError(f"keep_k must be in 1..{levels}")
    scores = np.abs(weights).sum(axis=2)  # (L, I)
    order = np.argsort(-scores, axis=0, kind="stable")
    mask = np.zeros(scores.shape, dtype=bool)
    np.put_along_axis(mask, order[:keep_k], True, axis=0)
    return np.where(mask[:, :, None], weights, 0)


def apply_delay_stride(weights: np.ndarray, stride: int) -> np.ndarray:
    """Zero every delay level d with d % stride != 0 (stride 2 keeps even levels)."""
    weights = np.asarray(weights, dtype=np.int64)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = weights.copy()
    for d in range(out.shape[0]):
        if d % stride != 0:
            out[d] = 0
    return out
