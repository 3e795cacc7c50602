"""Named, splittable random streams.

Every stream is a Philox counter-based generator keyed by the run seed plus a
stable hash of a stream name, so adding a new consumer never shifts the
numbers another consumer sees.
"""
import zlib

import numpy as np


def _name_key(name):
    return zlib.crc32(str(name).encode("utf-8"))


def make_rng(seed, *names):
    entropy = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF] + [_name_key(n) for n in names]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
