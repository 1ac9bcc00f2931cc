"""Dense, time-unrolled reference implementation.

No queues, no events, no shared kernel code: each projection's input is
computed directly as input_j(t) = sum over d and i of W[d][i][j] *
spike_i(t-d), followed by the same LIF rule the event-driven cores use
(decay-after-input, threshold, reset). Event-driven runs are checked
bit-exactly against this module, which is only meaningful because the
two implementations share nothing but the arithmetic definition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccumulatorOverflowError
from .model import DECAY_SHIFT, DelayNetwork, RESET_SUBTRACT, SpikeTrain


@dataclass
class OracleResult:
    rasters: list[np.ndarray]  # input raster first, then one per projection (T, width)
    membranes: list[np.ndarray]  # per projection (T, J), values after each update
    input_sums: list[np.ndarray]  # per projection (T, J) pre-threshold inputs
    spike_counts: np.ndarray  # output-layer totals per neuron
    classification: int


def _layer_inputs(raster: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """inputs[t, j] = sum_d sum_i weights[d, i, j] * raster[t - d, i]."""
    timesteps = raster.shape[0]
    levels = weights.shape[0]
    inputs = np.zeros((timesteps, weights.shape[2]), dtype=np.int64)
    dense = raster.astype(np.int64)
    for d in range(min(levels, timesteps)):
        inputs[d:] += dense[: timesteps - d] @ weights[d]
    return inputs


def oracle_run(network: DelayNetwork, spikes: SpikeTrain, timesteps: int | None = None) -> OracleResult:
    if spikes.width != network.input_width:
        raise ValueError(
            f"spike train width {spikes.width} does not match network input {network.input_width}"
        )
    horizon = spikes.duration if timesteps is None else int(timesteps)
    raster = spikes.to_raster()[:horizon]
    if raster.shape[0] < horizon:
        raster = np.vstack(
            [raster, np.zeros((horizon - raster.shape[0], spikes.width), dtype=raster.dtype)]
        )
    rasters = [raster]
    membranes: list[np.ndarray] = []
    input_sums: list[np.ndarray] = []
    acc_min, acc_max = network.policy.acc_min, network.policy.acc_max
    for layer in network.layers:
        inputs = _layer_inputs(rasters[-1], layer.weights)
        lif = layer.lif
        subtract = lif.reset_mode == RESET_SUBTRACT
        v = np.zeros(layer.postsyn_count, dtype=np.int64)
        out = np.zeros((horizon, layer.postsyn_count), dtype=np.uint8)
        vtrace = np.zeros((horizon, layer.postsyn_count), dtype=np.int64)
        for t in range(horizon):
            v = v + inputs[t]
            if v.size:
                lo, hi = int(v.min()), int(v.max())
                if lo < acc_min or hi > acc_max:
                    raise AccumulatorOverflowError(
                        f"membrane potential {lo if lo < acc_min else hi} "
                        f"outside [{acc_min}, {acc_max}]"
                    )
            v = (v * lif.decay_q15) >> DECAY_SHIFT
            fired = v >= lif.threshold
            out[t] = fired
            if subtract:
                v = np.where(fired, v - lif.threshold, v)
            else:
                v = np.where(fired, 0, v)
            vtrace[t] = v
        rasters.append(out)
        membranes.append(vtrace)
        input_sums.append(inputs)
    counts = rasters[-1].sum(axis=0, dtype=np.int64)
    return OracleResult(
        rasters=rasters,
        membranes=membranes,
        input_sums=input_sums,
        spike_counts=counts,
        classification=int(np.argmax(counts)) if counts.size else 0,
    )
