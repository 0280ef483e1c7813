"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` exactly: same arguments, same integer results.
Inputs are enumerated as bitmasks, bit i set meaning component i is +1.
"""
from __future__ import annotations

import numpy as np

from . import rng

NAME = "python"

_BATCH_CELLS = 1 << 22  # inputs x outputs x nets processed per chunk


def _inputs(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int16)


def _success(h: np.ndarray, reference: np.ndarray, tie: int) -> np.ndarray:
    """h has outputs on the last axis; returns all-components-ok flags."""
    pos = reference > 0
    if tie == 0:  # strict_minus: +1 iff h > 0
        ok = np.where(pos, h > 0, h <= 0)
    elif tie == 1:  # lenient_plus: +1 iff h >= 0
        ok = np.where(pos, h >= 0, h < 0)
    else:  # tie_fails
        ok = np.where(pos, h > 0, h < 0)
    return ok.all(axis=-1)


def _damaged_weights(weights: np.ndarray, links: np.ndarray) -> np.ndarray:
    n = weights.shape[0]
    b = links.shape[0]
    w = np.broadcast_to(weights.astype(np.int16), (b, n, n)).reshape(b, n * n).copy()
    if links.shape[1]:
        np.put_along_axis(w, links.astype(np.int64), 0, axis=1)
    return w.reshape(b, n, n)


def _chunks(b: int, n: int):
    step = max(1, _BATCH_CELLS // ((1 << n) * n))
    for start in range(0, b, step):
        yield start, min(b, start + step)


def agreement_histograms(weights, reference, tie, links) -> np.ndarray:
    """Per damaged net, success counts keyed by agreement with the reference.

    Returns int64 array (B, 2, n+1): ``[:, 0, a]`` counts successful inputs
    agreeing with the reference on exactly ``a`` components, ``[:, 1, p]``
    counts successful inputs whose leading agreement run has length ``p``.
    """
    weights = np.asarray(weights, dtype=np.int8)
    reference = np.asarray(reference, dtype=np.int8)
    links = np.asarray(links, dtype=np.int32).reshape(len(links), -1)
    n = weights.shape[0]
    U = _inputs(n)
    agree = U == reference
    a_total = agree.sum(axis=1)
    disagree_cum = np.cumsum(~agree, axis=1)
    a_prefix = (disagree_cum == 0).sum(axis=1)
    out = np.zeros((links.shape[0], 2, n + 1), dtype=np.int64)
    for lo, hi in _chunks(links.shape[0], n):
        w = _damaged_weights(weights, links[lo:hi])
        h = np.einsum("ui,bij->buj", U, w)
        ok = _success(h, reference, tie)
        for k, row in enumerate(ok):
            out[lo + k, 0] = np.bincount(a_total[row], minlength=n + 1)
            out[lo + k, 1] = np.bincount(a_prefix[row], minlength=n + 1)
    return out


def free_recall_counts(weights, reference, tie, links) -> np.ndarray:
    """Number of successful inputs (out of 2**n) per damaged net."""
    weights = np.asarray(weights, dtype=np.int8)
    reference = np.asarray(reference, dtype=np.int8)
    links = np.asarray(links, dtype=np.int32).reshape(len(links), -1)
    n = weights.shape[0]
    U = _inputs(n)
    out = np.zeros(links.shape[0], dtype=np.int64)
    for lo, hi in _chunks(links.shape[0], n):
        w = _damaged_weights(weights, links[lo:hi])
        h = np.einsum("ui,bij->buj", U, w)
        out[lo:hi] = _success(h, reference, tie).sum(axis=1)
    return out


def sample_links(seed, series, trial_start, count, n, n_d) -> np.ndarray:
    trials = np.arange(trial_start, trial_start + count, dtype=np.uint64)
    keys = rng.trial_keys_np(seed, series, trials)
    return rng.sample_link_indices_np(keys, n, n_d).astype(np.int32)


def survey_counts(seed, series, trial_start, count, weights, reference, tie, n_d) -> np.ndarray:
    n = np.asarray(weights).shape[0]
    links = sample_links(seed, series, trial_start, count, n, n_d)
    return free_recall_counts(weights, reference, tie, links)
