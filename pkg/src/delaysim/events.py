"""AER event words.

A word carries an end-of-timestep flag, a source-neuron address, and a
remaining-delay counter. The default layout packs into 16 bits:

    bit 15     EOT flag
    bits 14..6 source address (9 bits, up to 512 neurons)
    bits 5..0  delay counter (6 bits, up to 64 delay levels)

Field widths are configurable per codec; construction of a delay
structure fails if its neuron count or delay resolution does not fit.
Serialized words are little-endian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple


class EventWord(NamedTuple):
    eot: bool
    source: int
    counter: int


EOT_WORD = EventWord(eot=True, source=0, counter=0)


@dataclass(frozen=True)
class EventCodec:
    """Packs and unpacks event words under a fixed bit layout."""

    addr_bits: int = 9
    counter_bits: int = 6

    def __post_init__(self):
        if self.addr_bits < 1 or self.counter_bits < 0:
            raise ValueError("field widths must be positive")
        if self.word_bits > 32:
            raise ValueError(f"{self.word_bits}-bit words exceed the 32-bit packing limit")

    @property
    def word_bits(self) -> int:
        return 1 + self.addr_bits + self.counter_bits

    @property
    def word_bytes(self) -> int:
        return 2 if self.word_bits <= 16 else 4

    @property
    def max_source(self) -> int:
        return (1 << self.addr_bits) - 1

    @property
    def max_counter(self) -> int:
        return (1 << self.counter_bits) - 1

    def fits(self, presyn_count: int, delay_levels: int) -> bool:
        """Whether sources 0..I-1 and counters 0..L-1 are representable."""
        return presyn_count - 1 <= self.max_source and delay_levels - 1 <= self.max_counter

    @classmethod
    def sized_for(cls, presyn_count: int, delay_levels: int = 1) -> "EventCodec":
        """Smallest codec (at least the default widths) covering the given ranges."""
        addr = max(9, (max(presyn_count - 1, 1)).bit_length())
        cnt = max(6, (max(delay_levels - 1, 1)).bit_length())
        return cls(addr_bits=addr, counter_bits=cnt)

    def pack(self, word: EventWord) -> int:
        if not 0 <= word.source <= self.max_source:
            raise ValueError(f"source {word.source} exceeds {self.addr_bits}-bit field")
        if not 0 <= word.counter <= self.max_counter:
            raise ValueError(f"counter {word.counter} exceeds {self.counter_bits}-bit field")
        return (int(word.eot) << (self.addr_bits + self.counter_bits)) | (
            word.source << self.counter_bits
        ) | word.counter

    def unpack(self, raw: int) -> EventWord:
        if not 0 <= raw < (1 << self.word_bits):
            raise ValueError(f"raw word {raw:#x} out of range for {self.word_bits}-bit layout")
        return EventWord(
            eot=bool(raw >> (self.addr_bits + self.counter_bits)),
            source=(raw >> self.counter_bits) & self.max_source,
            counter=raw & self.max_counter,
        )

    def to_bytes(self, word: EventWord) -> bytes:
        return self.pack(word).to_bytes(self.word_bytes, "little")

    def from_bytes(self, data: bytes) -> EventWord:
        if len(data) != self.word_bytes:
            raise ValueError(f"expected {self.word_bytes} bytes, got {len(data)}")
        return self.unpack(int.from_bytes(data, "little"))


DEFAULT_CODEC = EventCodec()
