"""Deterministic Monte-Carlo plumbing: per-batch random streams and batch maps.

Every batch of trials draws from its own stream derived from
``(seed, stream_id)``, and batch sizes depend only on the problem shape, so
results are the same whatever the number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

GENERATOR = f"numpy {np.__version__} Philox4x64 via SeedSequence"

# float64 elements per working array; about 32 MB
BATCH_ELEMENTS = 1 << 22

# Stream namespaces; stream_id = key * 2**32 + batch index.
TASK_OPTIMIZE = 1
TASK_RELIABILITY = 2
TASK_SIMULATE = 3
TASK_RATES = 4
TASK_SUBSAMPLE = 5
TASK_RANDOM_TREE = 6


def rng_stream(seed, stream_id):
    """Independent generator for each (seed, stream_id) pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream_id)])))


def stream_key(task, *sub):
    """Pack a task code and small sub-indices into a stream key."""
    key = task
    for s in sub:
        key = (key << 16) | (int(s) & 0xFFFF)
    return key


def batch_plan(trials, elements_per_trial):
    """Split ``trials`` into batches sized to the working-array budget."""
    size = max(1, BATCH_ELEMENTS // max(1, elements_per_trial))
    full, rest = divmod(trials, size)
    return [size] * full + ([rest] if rest else [])


def map_batches(fn, items, threads=1):
    """``[fn(i, item) for i, item in enumerate(items)]``, optionally threaded.

    Results come back in input order regardless of scheduling.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(items)), items))
