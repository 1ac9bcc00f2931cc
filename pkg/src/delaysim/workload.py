"""Seeded synthetic workloads: random delay networks and spike trains.

Everything is driven by numpy's PCG64 generator, so a fixed seed yields
identical models and inputs on every platform — the determinism the file
formats and result comparisons rely on.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .model import (
    DEFAULT_POLICY,
    DelayNetwork,
    FixedPointPolicy,
    LayerSpec,
    LifParams,
    RESET_TO_ZERO,
    SpikeTrain,
    apply_delay_stride,
    prune_per_axon,
    prune_per_synapse,
)

PRUNE_MODES = ("none", "synapse", "axon")


def parse_shape(text: str) -> tuple[int, ...]:
    """Parse a layer-size spec like "700-48-48-20" into widths."""
    try:
        widths = tuple(int(part) for part in text.split("-"))
    except ValueError:
        raise ValueError(f"invalid shape spec {text!r}; expected e.g. 700-48-48-20") from None
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"shape spec {text!r} needs >= 2 positive layer widths")
    return widths


def random_network(
    seed: int,
    shape: Sequence[int],
    levels: int,
    first_levels: Optional[int] = 1,
    stride: int = 1,
    prune_mode: str = "none",
    keep_k: Optional[int] = None,
    weight_span: int = 64,
    zero_fraction: float = 0.25,
    decay: Optional[float] = None,
    threshold: Optional[int] = None,
    reset_mode: str = RESET_TO_ZERO,
    policy: FixedPointPolicy = DEFAULT_POLICY,
) -> DelayNetwork:
    """Random delay network over the given layer widths.

    first_levels pins the first projection's delay depth (the usual model
    family keeps it at 1); pass None to use `levels` everywhere. Pruning
    and stride are applied to every projection with more than one level.
    """
    if prune_mode not in PRUNE_MODES:
        raise ValueError(f"prune_mode must be one of {PRUNE_MODES}")
    if weight_span < 1:
        raise ValueError("weight_span must be >= 1")
    if not 0.0 <= zero_fraction < 1.0:
        raise ValueError("zero_fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    widths = tuple(int(w) for w in shape)
    layers = []
    for k in range(len(widths) - 1):
        presyn, postsyn = widths[k], widths[k + 1]
        depth = levels if (first_levels is None or k > 0) else first_levels
        weights = rng.integers(
            -weight_span, weight_span + 1, size=(depth, presyn, postsyn), dtype=np.int64
        )
        if zero_fraction:
            weights[rng.random(weights.shape) < zero_fraction] = 0
        if depth > 1:
            if stride > 1:
                weights = apply_delay_stride(weights, stride)
            if prune_mode == "synapse" and keep_k is not None and keep_k < depth:
                weights = prune_per_synapse(weights, keep_k)
            elif prune_mode == "axon" and keep_k is not None and keep_k < depth:
                weights = prune_per_axon(weights, keep_k)
        if decay is None:
            decay_q15 = int(rng.integers(19661, 32769))  # lambda in [0.6, 1.0]
        else:
            decay_q15 = LifParams.from_float(decay, 1).decay_q15
        if threshold is None:
            theta = int(weight_span * rng.integers(1, 5))
        else:
            theta = int(threshold)
        lif = LifParams(decay_q15=decay_q15, threshold=theta, reset_mode=reset_mode)
        layers.append(LayerSpec(presyn, postsyn, depth, weights, lif))
    return DelayNetwork(tuple(layers), policy=policy)


def random_spikes(seed: int, width: int, duration: int, density: float) -> SpikeTrain:
    """Bernoulli spike train: each (t, neuron) fires with probability density."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    raster = (rng.random((duration, width)) < density).astype(np.uint8)
    return SpikeTrain.from_raster(raster)


def dense_spikes(width: int, duration: int) -> SpikeTrain:
    """Every neuron fires every timestep (density 1) — worst-case load."""
    return SpikeTrain.from_raster(np.ones((duration, width), dtype=np.uint8))
