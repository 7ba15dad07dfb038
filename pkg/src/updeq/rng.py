"""Seeded RNG streams.

Both backends draw through the identical primitive: one uniform double per
categorical decision, scanning the cumulative distribution in canonical
action order. The compiled kernels consume the same PCG64 bit stream
through the numpy C interface, so a (seed, stream, call sequence) triple
reproduces draws bit-for-bit on either backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def bit_generator(self) -> np.random.PCG64:
        return np.random.PCG64(
            np.random.SeedSequence([self.seed & _MASK64, self.stream & _MASK64]))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot make a Generator from {rng!r}")


def draw_index(gen: np.random.Generator, probs) -> int:
    """One categorical draw: a single uniform against the running CDF."""
    u = gen.random()
    c = 0.0
    last = 0
    for i in range(len(probs)):
        c += probs[i]
        if u < c:
            return i
        last = i
    return last


def draw_uniform_index(gen: np.random.Generator, k: int) -> int:
    """Uniform over k slots via the same CDF scan as draw_index, so both
    backends and both code paths consume identically."""
    u = gen.random()
    c = 0.0
    p = 1.0 / k
    for i in range(k):
        c += p
        if u < c:
            return i
    return k - 1
