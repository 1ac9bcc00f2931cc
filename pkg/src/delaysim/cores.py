"""Time-multiplexed neuron core: weight accumulation plus LIF dynamics.

A core owns one projection's postsynaptic membranes. Deliveries arriving
during a timestep accumulate their weight slices W[d][i][:] into a
per-step input vector (zero weights are skipped and counted). At end of
timestep the input is added to the membranes, the LIF update runs
(decay, threshold, reset), and the indices of fired neurons are returned
in ascending order. Exact integer arithmetic makes the result invariant
to delivery order within a timestep.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import backend
from .model import DEFAULT_POLICY, FixedPointPolicy, LayerSpec, RESET_SUBTRACT
from .structures import DeliveryRecord


class NeuronCore:
    def __init__(
        self,
        layer: LayerSpec,
        policy: FixedPointPolicy = DEFAULT_POLICY,
        record_membranes: bool = True,
        record_inputs: bool = True,
    ):
        self.layer = layer
        self._weights = layer.weights
        width = layer.postsyn_count
        self.membranes = np.zeros(width, dtype=np.int64)
        self._step_input = np.zeros(width, dtype=np.int64)
        self._fired = np.empty(width, dtype=np.int32)
        self.macs = 0
        self.zero_skips = 0
        # per-timestep snapshots: membranes after the LIF update, inputs summed
        self.membrane_trace: Optional[list[np.ndarray]] = [] if record_membranes else None
        self.input_trace: Optional[list[np.ndarray]] = [] if record_inputs else None
        lif = layer.lif
        self._decay_q15 = lif.decay_q15
        self._threshold = lif.threshold
        self._reset_subtract = lif.reset_mode == RESET_SUBTRACT
        self._acc_min = policy.acc_min
        self._acc_max = policy.acc_max

    def receive(self, delivery: DeliveryRecord) -> None:
        self.receive_batch(
            np.array([delivery.source], dtype=np.int32),
            np.array([delivery.delay], dtype=np.int32),
        )

    def receive_batch(self, del_src: np.ndarray, del_d: np.ndarray) -> None:
        n = int(len(del_src))
        if n == 0:
            return
        macs, skips = backend.kernels().apply_deliveries(
            del_src, del_d, n, self._weights, self._step_input
        )
        self.macs += macs
        self.zero_skips += skips

    def end_of_timestep(self, extra_input: Optional[np.ndarray] = None) -> np.ndarray:
        """Run the LIF update; returns fired neuron indices, ascending."""
        if extra_input is not None:
            self._step_input += extra_input
        self.membranes += self._step_input
        n = backend.kernels().lif_step(
            self.membranes,
            self._decay_q15,
            self._threshold,
            self._reset_subtract,
            self._acc_min,
            self._acc_max,
            self._fired,
        )
        fired = self._fired[:n].copy()
        if self.input_trace is not None:
            self.input_trace.append(self._step_input.copy())
        if self.membrane_trace is not None:
            self.membrane_trace.append(self.membranes.copy())
        self._step_input[:] = 0
        return fired
