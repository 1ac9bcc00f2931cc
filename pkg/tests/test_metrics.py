from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from delaysim.metrics import (
    KIND_RING,
    KIND_SCDQ,
    KIND_SCDQ_1F,
    KIND_SDQ,
    STRUCTURE_KINDS,
    StructureMetrics,
    crossover_alpha,
    memory_bits,
    memory_events,
    ring_slots,
    scaling_sweep,
)


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def brute_force_events(kind, alpha, presyn, levels):
    """Re-derive the provisioning sums term by term instead of in closed form."""
    a = Fraction(alpha)
    per_step = a * presyn
    if kind == KIND_SDQ:
        # one FIFO per delay level, the level-d FIFO holds a cohort for d steps
        return sum(per_step * d for d in range(1, levels + 1))
    if kind == KIND_SCDQ:
        # pre-processing region: L cohorts; post-processing region: L-1
        return per_step * levels + per_step * (levels - 1)
    if kind == KIND_SCDQ_1F:
        # one copy per live event, cohorts of age 0..L-1
        return per_step * levels
    raise AssertionError(kind)


@given(
    kind=st.sampled_from([KIND_SDQ, KIND_SCDQ, KIND_SCDQ_1F]),
    alpha=st.fractions(min_value=0, max_value=1, max_denominator=64),
    presyn=st.integers(1, 512),
    levels=st.integers(1, 64),
)
def test_memory_events_match_term_by_term_sums(kind, alpha, presyn, levels):
    expect = ceil_frac(brute_force_events(kind, alpha, presyn, levels))
    assert memory_events(kind, alpha, presyn, levels) == expect


def test_float_densities_are_read_exactly():
    # 0.1 as a float is not 1/10, but the decimal spelling is; ceil must not
    # pick up a stray ulp
    assert memory_events(KIND_SCDQ_1F, 0.1, 10, 1) == 1
    assert memory_events(KIND_SCDQ_1F, 0.3, 10, 1) == 3
    assert memory_events(KIND_SDQ, 0.5, 3, 2) == 5  # ceil of 4.5


def test_alpha_validation():
    for bad in (-0.01, 1.01, 2):
        with pytest.raises(ValueError):
            memory_events(KIND_SCDQ, bad, 4, 4)


def test_ring_sizing_ignores_density_but_needs_postsyn():
    assert ring_slots(48, 64) == 3072
    assert memory_events(KIND_RING, 0.25, 999, 64, postsyn=48) == 3072
    with pytest.raises(ValueError):
        memory_events(KIND_RING, 1, 999, 64)
    with pytest.raises(ValueError):
        memory_events("bogus", 1, 4, 4)


def test_memory_bits_scales_words_and_weights():
    assert memory_bits(KIND_SCDQ, 1, 48, 48, 64, word_bits=16) == \
        memory_events(KIND_SCDQ, 1, 48, 64) * 16
    assert memory_bits(KIND_RING, 1, 48, 48, 64, weight_bits=8) == 48 * 64 * 8


def test_published_configuration_numbers():
    assert memory_events(KIND_SDQ, 1, 256, 16) == 34816
    assert memory_events(KIND_SCDQ, 1, 256, 16) == 7936
    assert memory_bits(KIND_SCDQ, 1, 48, 48, 64, word_bits=16, weight_bits=8) == 97536
    assert memory_bits(KIND_RING, 1, 48, 48, 64, word_bits=16, weight_bits=8) == 24576
    assert memory_bits(KIND_RING, 1, 256, 256, 16, word_bits=16, weight_bits=16) == 65536
    assert memory_bits(KIND_SCDQ, 1, 256, 256, 16, word_bits=16, weight_bits=16) == 126976


def test_crossover_requires_exactly_one_ring():
    with pytest.raises(ValueError):
        crossover_alpha(KIND_SCDQ, KIND_SDQ, 4, 4, 4)
    with pytest.raises(ValueError):
        crossover_alpha(KIND_RING, KIND_RING, 4, 4, 4)


def test_crossover_is_symmetric_and_matches_direct_solve():
    a = crossover_alpha(KIND_SCDQ, KIND_RING, 48, 48, 64, word_bits=16, weight_bits=8)
    b = crossover_alpha(KIND_RING, KIND_SCDQ, 48, 48, 64, word_bits=16, weight_bits=8)
    assert a == b
    # solve alpha * I * (2L-1) * word = J * L * weight directly
    exact = Fraction(48 * 64 * 8, 48 * (2 * 64 - 1) * 16)
    assert a == float(round(exact, 3)) == 0.252
    c = crossover_alpha(KIND_SCDQ, KIND_RING, 256, 256, 16, word_bits=16, weight_bits=16)
    assert c == float(round(Fraction(256 * 16 * 16, 256 * 31 * 16), 3)) == 0.516


def test_crossover_clamps_to_one():
    # a huge ring never becomes cheaper within alpha <= 1
    assert crossover_alpha(KIND_SCDQ, KIND_RING, 4, 10**6, 4) == 1.0


def test_sweep_curve_shapes():
    sweep = scaling_sweep(1, 256, range(1, 65), postsyn=128)
    scdq = sweep.scdq_events
    sdq = sweep.sdq_events
    # linear: constant first difference; quadratic: constant second difference
    d1 = [scdq[k + 1] - scdq[k] for k in range(len(scdq) - 1)]
    assert len(set(d1)) == 1
    d2 = [sdq[k + 1] - sdq[k] for k in range(len(sdq) - 1)]
    dd2 = [d2[k + 1] - d2[k] for k in range(len(d2) - 1)]
    assert len(set(dd2)) == 1
    ratios = sweep.ratio
    assert all(b > a for a, b in zip(ratios[1:], ratios[2:]))  # increasing for L >= 2
    assert sweep.ring_slots == tuple(128 * x for x in range(1, 65))
    rows = list(sweep.rows())
    assert rows[0][0] == 1 and len(rows) == 64
    assert len(rows[0]) == 6  # levels, three curves, ring, ratio


def test_sweep_without_postsyn_drops_ring_column():
    sweep = scaling_sweep(0.5, 16, [2, 4])
    assert sweep.ring_slots is None
    assert len(next(iter(sweep.rows()))) == 5
    with pytest.raises(ValueError):
        scaling_sweep(1, 16, [])
    with pytest.raises(ValueError):
        scaling_sweep(1, 16, [0, 2])


def test_structure_metrics_alpha_measured():
    m = StructureMetrics(kind=KIND_SCDQ, capacity=64, presyn_count=8, levels=4)
    m.max_step_pushes = 3
    assert m.alpha_measured == Fraction(3, 8)
    d = m.as_dict()
    assert d["alpha_measured"] == 0.375
    assert d["kind"] == KIND_SCDQ
    assert set(STRUCTURE_KINDS) == {KIND_SCDQ, KIND_SCDQ_1F, KIND_SDQ, KIND_RING}
