"""Pure-Python kernel backend (numpy-vectorized).

These are the hot inner loops of the simulator: queue filtering, weight
accumulation, the LIF end-of-timestep update, and dendritic ring-buffer
pushes. A compiled Cython twin (`delaysim._kernels`) implements exactly
the same contracts; `delaysim.backend` picks whichever is available.
All functions operate on caller-owned preallocated arrays and must be
bit-identical across backends: integer arithmetic only, right shifts are
arithmetic, and output ordering follows input (FIFO) order.

Action codes written per drained/scanned event: bit 0 = delivered to the
output, bit 1 = kept for a future timestep.
"""

from __future__ import annotations

import numpy as np

from .errors import AccumulatorOverflowError
from .model import DECAY_SHIFT

BACKEND_NAME = "python"

ACTION_DELIVERED = 1
ACTION_KEPT = 2


def drain_filter(src, cnt, n, wvu, clz, levels, out_src, out_cnt, del_src, del_d, actions):
    """Filter one batch of countdown events leaving the pre-processing queue.

    For event k with source i and remaining counter c, the elapsed delay tag
    is d = (levels-1) - c. The event is delivered iff wvu[i, d] is set and is
    re-enqueued (with counter c-1) iff c > clz[i]. Survivors and deliveries
    are written in input order. Returns (n_kept, n_delivered).
    """
    if n == 0:
        return 0, 0
    s = src[:n]
    c = cnt[:n]
    d = (levels - 1) - c
    fwd = wvu[s, d] != 0
    keep = c > clz[s]
    n_del = int(np.count_nonzero(fwd))
    n_keep = int(np.count_nonzero(keep))
    del_src[:n_del] = s[fwd]
    del_d[:n_del] = d[fwd]
    out_src[:n_keep] = s[keep]
    out_cnt[:n_keep] = c[keep] - 1
    actions[:n] = fwd * ACTION_DELIVERED + keep * ACTION_KEPT
    return n_keep, n_del


def scan_cohort(src, n, age, wvu, clz, levels, keep_src, del_src, del_d, actions):
    """Scan one spawn cohort of a single-FIFO queue at elapsed age `age`.

    Deliveries follow wvu[i, age]; an event survives the scan iff a useful
    level remains beyond this age, i.e. age < (levels-1) - clz[i]. Returns
    (n_kept, n_delivered).
    """
    if n == 0:
        return 0, 0
    s = src[:n]
    fwd = wvu[s, age] != 0
    keep = age < (levels - 1) - clz[s]
    n_del = int(np.count_nonzero(fwd))
    n_keep = int(np.count_nonzero(keep))
    del_src[:n_del] = s[fwd]
    del_d[:n_del] = age
    keep_src[:n_keep] = s[keep]
    actions[:n] = fwd * ACTION_DELIVERED + keep * ACTION_KEPT
    return n_keep, n_del


def apply_deliveries(del_src, del_d, n, weights, membranes):
    """Accumulate weight slices W[d, i, :] into the membrane vector.

    Zero weights perform no MAC and are counted as skipped. Returns
    (performed_macs, zero_skips). Overflow is checked at the LIF update,
    not here, so results are independent of delivery order.
    """
    if n == 0:
        return 0, 0
    slices = weights[del_d[:n], del_src[:n], :]
    membranes += slices.sum(axis=0, dtype=np.int64)
    macs = int(np.count_nonzero(slices))
    return macs, n * weights.shape[2] - macs


def lif_step(membranes, decay_q15, threshold, reset_subtract, acc_min, acc_max, fired_out):
    """End-of-timestep LIF update: range check, decay, threshold, reset.

    v' = (v * decay_q15) >> 15 (arithmetic shift); spike iff v' >= threshold.
    Fired indices are written ascending. Returns the number of spikes.
    """
    if membranes.size == 0:
        return 0
    lo = int(membranes.min())
    hi = int(membranes.max())
    if lo < acc_min or hi > acc_max:
        raise AccumulatorOverflowError(
            f"membrane potential {lo if lo < acc_min else hi} outside [{acc_min}, {acc_max}]"
        )
    membranes *= decay_q15
    np.right_shift(membranes, DECAY_SHIFT, out=membranes)
    fired = np.nonzero(membranes >= threshold)[0]
    k = fired.size
    if k:
        if reset_subtract:
            membranes[fired] -= threshold
        else:
            membranes[fired] = 0
        fired_out[:k] = fired
    return int(k)


def ring_push_batch(slots, weights, srcs, n, cursor):
    """Accumulate, for each spiking source, its L x J weight block into the
    dendritic slots, level d landing in slot (cursor + d) mod L.

    Returns (performed_macs, zero_skips); slot range checks happen at the
    end-of-timestep harvest.
    """
    if n == 0:
        return 0, 0
    levels = slots.shape[0]
    block = weights[:, srcs[:n], :]
    idx = (cursor + np.arange(levels)) % levels
    slots[idx] += block.sum(axis=1, dtype=np.int64)
    macs = int(np.count_nonzero(block))
    return macs, n * levels * weights.shape[2] - macs
