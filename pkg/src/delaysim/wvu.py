"""Zero-skipping delay-forwarding filter.

The filter holds a binary I x L matrix (one row per presynaptic neuron,
one column per delay level; 1 means at least one postsynaptic weight at
that level is nonzero) and a per-row leading-zero count taken from the
highest delay level downward. Together they decide, for every event
leaving the queue, whether it is forwarded to the postsynaptic side and
whether it still needs to be kept for a later timestep.

Rows that are entirely zero get a leading-zero count of L; their events
are never useful, never forwarded, and never occupy queue memory.
"""

from __future__ import annotations

import numpy as np


def row_leading_zeros(row: np.ndarray) -> int:
    """Consecutive zeros reading from the maximum delay level downward."""
    nz = np.nonzero(row)[0]
    if nz.size == 0:
        return row.shape[0]
    return row.shape[0] - 1 - int(nz[-1])


class WvuFilter:
    """Immutable forwarding/retention filter for one projection."""

    def __init__(self, wvu: np.ndarray):
        wvu = np.asarray(wvu)
        if wvu.ndim != 2:
            raise ValueError("wvu must be a 2-D I x L matrix")
        if wvu.size and not np.isin(wvu, (0, 1)).all():
            raise ValueError("wvu must be binary")
        self._wvu = np.ascontiguousarray(wvu, dtype=np.uint8)
        self._wvu.setflags(write=False)
        self._clz = np.ascontiguousarray(
            [row_leading_zeros(r) for r in self._wvu], dtype=np.int32
        )
        self._clz.setflags(write=False)

    @property
    def presyn_count(self) -> int:
        return self._wvu.shape[0]

    @property
    def delay_levels(self) -> int:
        return self._wvu.shape[1]

    @property
    def wvu(self) -> np.ndarray:
        return self._wvu

    @property
    def clz_table(self) -> np.ndarray:
        return self._clz

    def _check_source(self, i: int) -> None:
        if not 0 <= i < self.presyn_count:
            raise IndexError(f"source {i} outside 0..{self.presyn_count - 1}")

    def forward(self, i: int, d: int) -> bool:
        """Is an event from neuron i useful at delay tag d (elapsed timesteps)?"""
        self._check_source(i)
        if not 0 <= d < self.delay_levels:
            raise IndexError(f"delay tag {d} outside 0..{self.delay_levels - 1}")
        return bool(self._wvu[i, d])

    def retain(self, i: int, counter: int) -> bool:
        """Does an event from neuron i with this remaining counter re-enter the
        post-processing queue? False exactly when the counter has reached the
        row's leading-zero count: no useful delivery remains beyond this point."""
        self._check_source(i)
        if not 0 <= counter <= self.delay_levels - 1:
            raise IndexError(f"counter {counter} outside 0..{self.delay_levels - 1}")
        return counter > int(self._clz[i])

    def never_useful(self, i: int) -> bool:
        """All-zero row: events from this neuron are dropped at entry."""
        self._check_source(i)
        return int(self._clz[i]) >= self.delay_levels

    def last_useful_tag(self, i: int) -> int:
        """Largest delay tag with a nonzero entry, or -1 for all-zero rows."""
        self._check_source(i)
        return self.delay_levels - 1 - int(self._clz[i])


def build_filter(wvu: np.ndarray) -> WvuFilter:
    return WvuFilter(wvu)
