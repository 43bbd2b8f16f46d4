"""Seeded dataset splits."""
import dataclasses

import numpy as np


def split_samples(samples, fractions, seed):
    """Partition samples by a seeded permutation.

    fractions must sum to 1 (within 1e-9) and every resulting part must
    be non-empty.  Returns a list of sample lists, one per fraction, in
    the given order.
    """
    fractions = [float(f) for f in fractions]
    if len(fractions) < 2:
        raise ValueError("need at least two fractions")
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive, got %r" % (fractions,))
    total = sum(fractions)
    if abs(total - 1.0) > 1e-9:
        raise ValueError("fractions sum to %.12g, expected 1" % total)
    n = len(samples)
    perm = np.random.default_rng(seed).permutation(n)
    edges = [0]
    acc = 0.0
    for f in fractions[:-1]:
        acc += f
        edges.append(int(round(acc * n)))
    edges.append(n)
    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            raise ValueError(
                "split produced an empty part (%d samples, fractions %r)"
                % (n, fractions))
        parts.append([samples[i] for i in perm[lo:hi]])
    return parts


def derive_manifest(manifest, count, tag):
    """Manifest for a split file: same layout, new count and split tag."""
    return dataclasses.replace(manifest, sample_count=int(count), split=str(tag))
