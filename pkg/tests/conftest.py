import numpy as np
import pytest

from delaysim import (
    DelayNetwork,
    LayerSpec,
    LifParams,
    SpikeTrain,
    WvuFilter,
)


def weights_for_wvu(wvu, value=3):
    """Smallest weight tensor (L, I, 1) whose useful-level matrix is `wvu`."""
    wvu = np.asarray(wvu)
    presyn, levels = wvu.shape
    w = np.zeros((levels, presyn, 1), dtype=np.int64)
    w[wvu.T.astype(bool)] = value
    return w


def filter_from_rows(rows):
    return WvuFilter(np.asarray(rows, dtype=np.uint8))


def single_layer_net(weights, decay_q15=32768, threshold=10**6, reset="zero"):
    """One-projection network; huge default threshold keeps neurons silent."""
    weights = np.asarray(weights, dtype=np.int64)
    levels, presyn, postsyn = weights.shape
    lif = LifParams(decay_q15=decay_q15, threshold=threshold, reset_mode=reset)
    return DelayNetwork((LayerSpec(presyn, postsyn, levels, weights, lif),))


def train(duration, width, events):
    return SpikeTrain(duration=duration, width=width, events=tuple(events))


@pytest.fixture
def two_row_filter():
    # row 0 useful at d=0,1; row 1 useful only at d=2 -> clz [1, 0]
    return filter_from_rows([[1, 1, 0], [0, 0, 1]])


def expected_deliveries(wvu, schedule, horizon):
    """Reference delivery multisets: spike (t, i) lands as (i, d) at t + d
    for every delay level d the filter marks useful."""
    wvu = np.asarray(wvu)
    out = [[] for _ in range(horizon)]
    for t, srcs in enumerate(schedule):
        for i in srcs:
            for d in np.nonzero(wvu[i])[0]:
                if t + int(d) < horizon:
                    out[t + int(d)].append((int(i), int(d)))
    return [sorted(step) for step in out]


def drive(structure, schedule, horizon):
    """Push/drain/EOT loop; returns per-timestep sorted delivery lists."""
    got = []
    for t in range(horizon):
        if t < len(schedule):
            structure.push_spikes(np.asarray(schedule[t], dtype=np.int32))
        src, d = structure.drain_deliveries()
        got.append(sorted(zip(src.tolist(), d.tolist())))
        structure.end_of_timestep()
    return got
