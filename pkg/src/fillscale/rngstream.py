"""Named, reproducible RNG streams.

A master seed fans out into independent streams addressed by a path of
labels, e.g. ``stream(seed, "gen", slot, segment)``. Derivation goes through
``numpy.random.SeedSequence`` so that changing the draw count of one stream
never perturbs any other stream.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import ConfigError


def _encode_part(part: int | str) -> tuple[int, int]:
    # Tag by type so the int 5 and the string "5" land on different streams.
    if isinstance(part, bool):
        raise ConfigError("rng path elements must be ints or strings, not bool")
    if isinstance(part, int):
        if part < 0:
            raise ConfigError(f"rng path ints must be non-negative, got {part}")
        return (0, part)
    if isinstance(part, str):
        return (1, zlib.crc32(part.encode("utf-8")))
    raise ConfigError(f"rng path elements must be ints or strings, got {type(part).__name__}")


def seed_sequence(master_seed: int, *path: int | str) -> np.random.SeedSequence:
    """SeedSequence for the stream addressed by ``path`` under ``master_seed``."""
    if not isinstance(master_seed, int) or isinstance(master_seed, bool) or master_seed < 0:
        raise ConfigError(f"master_seed must be a non-negative int, got {master_seed!r}")
    entropy: list[int] = [master_seed]
    for part in path:
        entropy.extend(_encode_part(part))
    return np.random.SeedSequence(entropy)


def stream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Independent PCG64 generator for the named stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *path)))
