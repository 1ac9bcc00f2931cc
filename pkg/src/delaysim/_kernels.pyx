# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Bit-identical twin of delaysim._kernels_py: same signatures, same
contracts, same integer arithmetic (right shifts are arithmetic on the
signed 64-bit values used here). The pure-Python module remains the
reference; parity is enforced by tests that run both backends on the
same inputs.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t

from .errors import AccumulatorOverflowError
from .model import DECAY_SHIFT as _PY_DECAY_SHIFT

BACKEND_NAME = "compiled"

ACTION_DELIVERED = 1
ACTION_KEPT = 2

cdef int DECAY_SHIFT = _PY_DECAY_SHIFT


def drain_filter(
    const int32_t[::1] src,
    const int32_t[::1] cnt,
    Py_ssize_t n,
    const uint8_t[:, ::1] wvu,
    const int32_t[::1] clz,
    int levels,
    int32_t[::1] out_src,
    int32_t[::1] out_cnt,
    int32_t[::1] del_src,
    int32_t[::1] del_d,
    uint8_t[::1] actions,
):
    cdef Py_ssize_t k, n_keep = 0, n_del = 0
    cdef int32_t i, c, d
    cdef uint8_t act
    for k in range(n):
        i = src[k]
        c = cnt[k]
        d = (levels - 1) - c
        act = 0
        if wvu[i, d]:
            del_src[n_del] = i
            del_d[n_del] = d
            n_del += 1
            act = ACTION_DELIVERED
        if c > clz[i]:
            out_src[n_keep] = i
            out_cnt[n_keep] = c - 1
            n_keep += 1
            act |= ACTION_KEPT
        actions[k] = act
    return n_keep, n_del


def scan_cohort(
    const int32_t[::1] src,
    Py_ssize_t n,
    int age,
    const uint8_t[:, ::1] wvu,
    const int32_t[::1] clz,
    int levels,
    int32_t[::1] keep_src,
    int32_t[::1] del_src,
    int32_t[::1] del_d,
    uint8_t[::1] actions,
):
    cdef Py_ssize_t k, n_keep = 0, n_del = 0
    cdef int32_t i
    cdef uint8_t act
    for k in range(n):
        i = src[k]
        act = 0
        if wvu[i, age]:
            del_src[n_del] = i
            del_d[n_del] = age
            n_del += 1
            act = ACTION_DELIVERED
        if age < (levels - 1) - clz[i]:
            keep_src[n_keep] = i
            n_keep += 1
            act |= ACTION_KEPT
        actions[k] = act
    return n_keep, n_del


def apply_deliveries(
    const int32_t[::1] del_src,
    const int32_t[::1] del_d,
    Py_ssize_t n,
    const int64_t[:, :, ::1] weights,
    int64_t[::1] membranes,
):
    cdef Py_ssize_t k, j, width = weights.shape[2]
    cdef int32_t i, d
    cdef int64_t w
    cdef long long macs = 0
    for k in range(n):
        i = del_src[k]
        d = del_d[k]
        for j in range(width):
            w = weights[d, i, j]
            if w != 0:
                membranes[j] += w
                macs += 1
    return macs, n * width - macs


def lif_step(
    int64_t[::1] membranes,
    int decay_q15,
    int64_t threshold,
    bint reset_subtract,
    int64_t acc_min,
    int64_t acc_max,
    int32_t[::1] fired_out,
):
    cdef Py_ssize_t j, width = membranes.shape[0], fired = 0
    cdef int64_t v
    for j in range(width):
        v = membranes[j]
        if v < acc_min or v > acc_max:
            raise AccumulatorOverflowError(
                f"membrane potential {v} outside [{acc_min}, {acc_max}]"
            )
    for j in range(width):
        v = (membranes[j] * decay_q15) >> DECAY_SHIFT
        if v >= threshold:
            fired_out[fired] = <int32_t> j
            fired += 1
            if reset_subtract:
                v -= threshold
            else:
                v = 0
        membranes[j] = v
    return fired


def ring_push_batch(
    int64_t[:, ::1] slots,
    const int64_t[:, :, ::1] weights,
    const int32_t[::1] srcs,
    Py_ssize_t n,
    Py_ssize_t cursor,
):
    cdef Py_ssize_t levels = slots.shape[0], width = slots.shape[1]
    cdef Py_ssize_t k, d, j, slot
    cdef int32_t i
    cdef int64_t w
    cdef long long macs = 0
    for k in range(n):
        i = srcs[k]
        for d in range(levels):
            slot = cursor + d
            if slot >= levels:
                slot -= levels
            for j in range(width):
                w = weights[d, i, j]
                if w != 0:
                    slots[slot, j] += w
                    macs += 1
    return macs, n * levels * width - macs
