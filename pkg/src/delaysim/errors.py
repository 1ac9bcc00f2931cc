"""Exception hierarchy.

Simulation errors (overflow, protocol misuse) are separated from format
errors so the CLI can map them to distinct exit codes.
"""


class DelaySimError(Exception):
    """Base class for all package errors."""


class SimulationError(DelaySimError):
    """A run aborted; the hardware analog would be a fault, not a result."""


class QueueOverflowError(SimulationError):
    """A delay structure ran out of event storage (SRAM buffer overrun)."""


class AccumulatorOverflowError(SimulationError):
    """A membrane potential or dendritic slot left the accumulator range."""


class SimulationStateError(SimulationError):
    """Driving protocol violated, e.g. end-of-timestep with undrained events."""


class FormatError(DelaySimError):
    """A model, spike-train, or manifest file could not be parsed."""
