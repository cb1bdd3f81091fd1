""""""
import hashlib
import logging
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

logger = logging.getLogger(__name__)


def rng_stream(seed, name):
    """ Get an independent random generator for a named purpose.

    Parameters
    ----------
    seed : int
        The master seed of the run.

    name : str or int
        Name of the substream, e.g. ``"negatives"``. Integers can be used to
        derive per-item streams.

    Returns
    -------
    numpy.random.Generator
        A generator that only depends on ``seed`` and ``name``.
    """
    if isinstance(name, str):
        key = zlib.crc32(name.encode("utf-8"))
    else:
        key = int(name)

    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def compute_hash(arrays):
    """ Compute a digest over a mapping of named arrays. """
    m = hashlib.sha256()
    for name in sorted(arrays):
        value = np.ascontiguousarray(arrays[name], dtype="<f8")
        m.update(name.encode("utf-8"))
        m.update(str(value.shape).encode("utf-8"))
        m.update(value.tobytes())

    return m.hexdigest()


def map_chunks(fn, items, threads=1, chunk_size=256):
    """ Map a function over chunks of a sequence, preserving order.

    Parameters
    ----------
    fn : callable
        Function applied to each chunk.

    items : sequence
        Sequence supporting slicing, e.g. a numpy array.

    threads : int, default 1
        Maximum number of worker threads. With 1, the chunks are processed
        in the calling thread.

    chunk_size : int, default 256
        Number of items per chunk.

    Returns
    -------
    list
        The results for each chunk in order.
    """
    chunks = [
        items[start : start + chunk_size]
        for start in range(0, len(items), chunk_size)
    ]

    if threads is None or threads <= 1 or len(chunks) <= 1:
        return [fn(chunk) for chunk in chunks]

    logger.debug(f"Processing {len(chunks)} chunks with {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, chunks))
