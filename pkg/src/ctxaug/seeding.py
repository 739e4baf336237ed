"""Deterministic seed derivation.

All randomness in the toolkit flows from one master seed through the
counter-based generator below (a splitmix64 stream).  Counter-based draws
have no shared mutable state, so work items can be generated in any order
and the compiled and pure-Python inpaint kernels can reproduce the exact
same sequences.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SEED0 = 0x243F6A8885A308D3  # first 64 fractional bits of pi


def _avalanche(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix64(*parts: int | str | bytes) -> int:
    """Fold integers/strings into a single uint64 seed. Order-sensitive."""
    h = _SEED0
    for part in parts:
        if isinstance(part, str):
            part = part.encode()
        if isinstance(part, bytes):
            for chunk in (part[i:i + 8] for i in range(0, len(part), 8)):
                h = _avalanche(h + int.from_bytes(chunk, "little") + len(part))
            continue
        h = _avalanche(h + (int(part) & _MASK64))
    return h


def rand_u64(seed: int, counter: int) -> int:
    """Output `counter` of the splitmix64 stream anchored at `seed`."""
    return _avalanche((seed + ((counter + 1) * _GOLDEN)) & _MASK64)


def rand_u64_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized ``rand_u64`` for counters start..start+count-1."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed) + counters * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def generator(*parts: int | str | bytes) -> np.random.Generator:
    """NumPy Generator seeded from `mix64` of the given parts."""
    return np.random.Generator(np.random.PCG64(mix64(*parts)))
