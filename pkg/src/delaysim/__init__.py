"""Event-driven simulator for spiking networks with synaptic delays.

Delay structures (shared circular delay queue and three baselines) feed
time-multiplexed LIF cores over AER-style event words; a dense oracle,
closed-form memory models, and deterministic file formats round out the
toolkit. See the README for a tour.
"""

from . import backend
from .errors import (
    AccumulatorOverflowError,
    DelaySimError,
    FormatError,
    QueueOverflowError,
    SimulationError,
    SimulationStateError,
)
from .events import DEFAULT_CODEC, EOT_WORD, EventCodec, EventWord
from .model import (
    DECAY_ONE,
    DECAY_SHIFT,
    DEFAULT_POLICY,
    DelayNetwork,
    FixedPointPolicy,
    LayerSpec,
    LifParams,
    RESET_SUBTRACT,
    RESET_TO_ZERO,
    SpikeTrain,
    apply_delay_stride,
    derive_wvu,
    prune_per_axon,
    prune_per_synapse,
)
from .wvu import WvuFilter, build_filter
from .metrics import (
    KIND_RING,
    KIND_SCDQ,
    KIND_SCDQ_1F,
    KIND_SDQ,
    MemorySweep,
    RunMetrics,
    STRUCTURE_KINDS,
    StructureMetrics,
    crossover_alpha,
    memory_bits,
    memory_events,
    ring_slots,
    scaling_sweep,
)
from .structures import (
    DEFAULT_CAPACITY,
    DelayStructure,
    DeliveryRecord,
    RingBuffer,
    Scdq,
    ScdqSingleFifo,
    SharedDelayQueue,
    TraceRecord,
    make_structure,
)
from .cores import NeuronCore
from .oracle import OracleResult, oracle_run
from .fabric import (
    InferenceResult,
    ORACLE_KIND,
    Pipeline,
    RUNNABLE_KINDS,
    first_divergence,
    run_inference,
    run_with_structure,
)
from .workload import dense_spikes, parse_shape, random_network, random_spikes

__version__ = "0.1.0"

__all__ = [
    "AccumulatorOverflowError",
    "DECAY_ONE",
    "DECAY_SHIFT",
    "DEFAULT_CAPACITY",
    "DEFAULT_CODEC",
    "DEFAULT_POLICY",
    "DelayNetwork",
    "DelaySimError",
    "DelayStructure",
    "DeliveryRecord",
    "EOT_WORD",
    "EventCodec",
    "EventWord",
    "FixedPointPolicy",
    "FormatError",
    "InferenceResult",
    "KIND_RING",
    "KIND_SCDQ",
    "KIND_SCDQ_1F",
    "KIND_SDQ",
    "LayerSpec",
    "LifParams",
    "MemorySweep",
    "NeuronCore",
    "ORACLE_KIND",
    "OracleResult",
    "Pipeline",
    "QueueOverflowError",
    "RESET_SUBTRACT",
    "RESET_TO_ZERO",
    "RUNNABLE_KINDS",
    "RingBuffer",
    "RunMetrics",
    "STRUCTURE_KINDS",
    "Scdq",
    "ScdqSingleFifo",
    "SharedDelayQueue",
    "SimulationError",
    "SimulationStateError",
    "SpikeTrain",
    "StructureMetrics",
    "TraceRecord",
    "WvuFilter",
    "apply_delay_stride",
    "backend",
    "build_filter",
    "crossover_alpha",
    "dense_spikes",
    "derive_wvu",
    "first_divergence",
    "make_structure",
    "memory_bits",
    "memory_events",
    "oracle_run",
    "parse_shape",
    "prune_per_axon",
    "prune_per_synapse",
    "random_network",
    "random_spikes",
    "ring_slots",
    "run_inference",
    "run_with_structure",
    "scaling_sweep",
]
