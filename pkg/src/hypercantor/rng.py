"""Seeded counter-based random streams (numpy Philox)."""
import numpy as np

GENERATOR_NAME = "numpy.random.Philox"


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))
