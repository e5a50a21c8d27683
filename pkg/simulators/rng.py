"""
Label-keyed random streams.

Every consumer of randomness asks for its own stream by label, so adding a new
consumer never shifts the numbers an existing one sees.
"""

import zlib

import numpy as np


def stream_key(label: str) -> int:
    # Stable across processes, unlike hash()
    return zlib.crc32(label.encode("utf-8")) & 0xFFFFFFFF


def derive_rng(master_seed: int, stream_label: str) -> np.random.Generator:
    """Independent, reproducible generator for (master_seed, stream_label)"""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, stream_key(stream_label)])
    return np.random.default_rng(seq)


def derive_seed(master_seed: int, stream_label: str) -> int:
    """Integer seed for libraries that take one (e.g. scikit-learn random_state)"""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, stream_key(stream_label)])
    return int(seq.generate_state(1)[0])
