"""
Seed splitting for reproducible randomized audits.

All randomness flows from one 64-bit seed. Each consumer asks for a named stream (usually the operation name) and a
trial index, so adding a new stream never shifts the numbers drawn by an existing one.
"""
import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def _stream_key(name: str) -> int:
    # stable across runs and platforms, unlike hash()
    digest = hashlib.sha256(name.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def stream_generator(seed: int, name: str, trial: int = 0) -> np.random.Generator:
    """
    :param seed: master seed (reduced to 64 bits)
    :param name: stream id, e.g. 'minimal_norm_audit'
    :param trial: trial index within the stream
    :return: independent numpy Generator for (seed, name, trial)
    """
    if trial < 0:
        raise ValueError(f"Trial index must be non-negative. Got {trial}.")
    sequence = np.random.SeedSequence([seed & SEED_MASK, _stream_key(name), trial])
    return np.random.default_rng(sequence)


def complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """
    Circularly-symmetric complex Gaussian samples with unit variance per entry.
    """
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
