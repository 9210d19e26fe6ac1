"""Numpy implementations of the sparse gate kernels.

These are the fallback used when the compiled ``_kernels`` extension is not
available.  Both modules expose the same four functions.  Keys agree
exactly; amplitudes agree to rounding, since numpy's vectorised complex
products and segment sums may round differently from the scalar loops.

A batch of sparse vectors is a pair ``(keys, amps)``: ``keys`` is an int64
array of ``tag * D + code`` where ``code`` is the mixed-radix basis index of a
multimode basis state and ``tag`` labels the vector the entry belongs to.
A mode with stride ``s`` holds the digit ``(key // s) % d``.
"""

import numpy as np


def swap_digits(keys, si, sj, d, keep_vacuum=True):
    di = (keys // si) % d
    dj = (keys // sj) % d
    if keep_vacuum:
        mask = (di > 0) & (dj > 0)
    else:
        mask = di != dj
    out = keys + np.where(mask, (dj - di) * (si - sj), 0)
    return out, mask


def apply_phase(keys, amps, s, d, phases):
    return amps * phases[(keys // s) % d]


def coalesce(keys, amps):
    """Sort by key, sum duplicates in input order, drop exact zeros."""
    if keys.size == 0:
        return keys, amps
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    a = amps[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(k)) + 1))
    uk = k[starts]
    ua = np.add.reduceat(a, starts)
    keep = ua != 0
    return uk[keep], ua[keep]


def apply_power_swap(keys, amps, si, sj, d, alpha, beta, keep_vacuum=True):
    swapped, mask = swap_digits(keys, si, sj, d, keep_vacuum)
    new_keys = np.concatenate([keys, swapped[mask]])
    new_amps = np.concatenate([np.where(mask, alpha * amps, amps), beta * amps[mask]])
    return coalesce(new_keys, new_amps)
