"""Named, order-independent random streams.

Every stochastic piece of a run (member m's forecast noise at step k,
the reverse-time sampler at step k, initial draws, ...) pulls from its
own counter-based stream addressed by a path of labels.  Two
consequences the rest of the package leans on:

* reruns with the same master seed reproduce every draw bit for bit,
  regardless of platform or evaluation order;
* consumers of different paths can draw in any order (or not at all)
  without shifting each other's values.
"""

from __future__ import annotations

import zlib

import numpy as np


def _component(c):
    if isinstance(c, str):
        return zlib.crc32(c.encode("utf-8"))
    if isinstance(c, (int, np.integer)):
        if c < 0:
            raise ValueError("path components must be non-negative, got %d" % c)
        return int(c)
    raise TypeError("path components must be str or int, got %r" % type(c).__name__)


def stream(master_seed, *path):
    """Generator for the stream addressed by (master_seed, *path).

    Path components are non-negative ints or strings (hashed).  Philox
    is counter-based, so distinct spawn keys give statistically
    independent streams.
    """
    key = tuple(_component(c) for c in path)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))
