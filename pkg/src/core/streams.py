"""Counter-based random streams addressed by (seed, purpose, indices).

Every stream is a Philox generator keyed from the seed and a structured label, so a
given stream can be re-created at any position without replaying the others. Values
are handed out in fixed-size blocks; block b of a stream always starts at the same
Philox counter, which makes any uniform addressable by its absolute index.

Example usage:
    >>> handle = StreamHandle(seed=7, purpose=StreamPurpose.SERVICE, indices=(0,))
    >>> u = UniformSequence(handle)
    >>> u[1] == UniformSequence(handle)[1]
    True
"""

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

# Uniforms per cached block (multiple of the 4 outputs Philox makes per counter step)
BLOCK_SIZE = 1024


class StreamPurpose(IntEnum):
    """What a stream is used for; part of the stream label."""

    ARRIVAL = 1
    SERVICE = 2
    EXPLORE = 3
    REQUIREMENT = 4
    REPLICATION = 5


@dataclass(frozen=True)
class StreamHandle:
    """Label of one independent random stream.

    Attributes:
        seed: 64-bit master seed of the run
        purpose: Purpose tag
        indices: Queue/server indices completing the label
    """

    seed: int
    purpose: StreamPurpose
    indices: tuple[int, ...] = ()

    @cached_property
    def key(self) -> np.ndarray:
        sequence = np.random.SeedSequence(
            entropy=int(self.seed), spawn_key=(int(self.purpose), *self.indices)
        )
        return sequence.generate_state(2, dtype=np.uint64)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of the stream."""
        return np.random.Generator(np.random.Philox(key=self.key))

    def block(self, index: int, size: int = BLOCK_SIZE) -> np.ndarray:
        """Uniforms of block ``index``; identical for every call with the same arguments."""
        bit_generator = np.random.Philox(key=self.key, counter=index * (size // 4))
        return np.random.Generator(bit_generator).random(size)


def derive_seed(seed: int, replication: int) -> int:
    """Seed of one replication, derived from the experiment seed."""
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(StreamPurpose.REPLICATION), int(replication))
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class UniformSequence:
    """Lazily generated U(0,1) sequence indexed from 1.

    Access is expected to move forward; the two most recent blocks are cached so that
    two coupled systems can read the same slot window.
    """

    def __init__(self, handle: StreamHandle, block_size: int = BLOCK_SIZE):
        self._handle = handle
        self._block_size = block_size
        self._cache: dict[int, np.ndarray] = {}

    def __getitem__(self, index: int) -> float:
        if index < 1:
            raise IndexError("uniform sequences are indexed from 1")
        block, offset = divmod(index - 1, self._block_size)
        values = self._cache.get(block)
        if values is None:
            values = self._handle.block(block, self._block_size)
            if len(self._cache) >= 2:
                self._cache.pop(min(self._cache))
            self._cache[block] = values
        return float(values[offset])


class ArrivalStream:
    """Bernoulli(λ_i) arrivals per queue; slot t reads uniform t of queue i's stream."""

    def __init__(self, seed: int, lam: np.ndarray):
        self._lam = np.asarray(lam, dtype=float)
        self._uniforms = [
            UniformSequence(StreamHandle(seed, StreamPurpose.ARRIVAL, (i,)))
            for i in range(len(self._lam))
        ]

    def at(self, t: int) -> tuple[int, ...]:
        return tuple(
            1 if self._uniforms[i][t] < self._lam[i] else 0 for i in range(len(self._lam))
        )


class WorkloadStream:
    """Per-queue job uniforms U_i(s) and the cumulative job counters Z_i.

    The job with FCFS index n in queue i at a slot reads U_i(Z_i + n), where Z_i is the
    counter before the slot. advance() moves the counters by the queue lengths of the
    slot (the larger of two coupled systems).
    """

    def __init__(self, seed: int, num_queues: int):
        self._uniforms = [
            UniformSequence(StreamHandle(seed, StreamPurpose.SERVICE, (i,)))
            for i in range(num_queues)
        ]
        self.counters = [0] * num_queues

    def job_uniform(self, queue: int, job: int) -> float:
        return self._uniforms[queue][self.counters[queue] + job]

    def advance(self, *states: tuple[int, ...]) -> None:
        for i in range(len(self.counters)):
            self.counters[i] += max(state[i] for state in states)


class ExploreDraws:
    """Two uniforms per slot for the explore coin and the explore-set pick."""

    def __init__(self, seed: int):
        self._uniforms = UniformSequence(StreamHandle(seed, StreamPurpose.EXPLORE))

    def at(self, t: int) -> tuple[float, float]:
        return self._uniforms[2 * t - 1], self._uniforms[2 * t]
