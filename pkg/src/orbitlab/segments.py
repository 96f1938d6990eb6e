"""Segment interchange: one normalizer for the two shapes a dyadic crossing
travels in (list of (n, tau) pairs, or a pair of parallel arrays)."""

from __future__ import annotations

import numpy as np


def segment_arrays(segment):
    """Return (values, taus) as int64 arrays for either segment shape."""
    if isinstance(segment, tuple) and len(segment) == 2 \
            and not isinstance(segment[0], (int, np.integer)):
        values = np.asarray(segment[0], dtype=np.int64)
        taus = np.asarray(segment[1], dtype=np.int64)
    else:
        if len(segment) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.asarray(segment, dtype=np.int64)
        values, taus = arr[:, 0], arr[:, 1]
    if values.shape != taus.shape:
        raise ValueError("segment values and taus differ in length")
    return values, taus


def segment_energy(segment) -> int:
    _, taus = segment_arrays(segment)
    return int(taus.sum())
