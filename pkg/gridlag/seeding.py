"""Seeding

This module derives independent, reproducible random streams from one
scenario seed. Streams are keyed by a stable text tag so that adding a new
consumer never shifts the draws of an existing one.
"""

import zlib

import numpy as np

SEED_MASK = 0xFFFFFFFFFFFFFFFF


def derive_seed(seed, tag):
    """Combine the scenario seed with the CRC-32 of a tag."""
    crc = zlib.crc32(str(tag).encode('utf-8')) & 0xFFFFFFFF
    return (int(seed) & SEED_MASK) ^ crc


def derive_rng(seed, tag):
    """Return a numpy Generator for the stream named by tag."""
    return np.random.default_rng(derive_seed(seed, tag))
