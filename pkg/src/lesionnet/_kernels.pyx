# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: bitmask enumeration of all 2**n inputs.

Same signatures and integer results as ``_fallback``. Per output neuron j
the column of the weight matrix is split into a +1 mask and a -1 mask, so
the local field of input mask u is
    h_j = 2*(popcount(u & pos_j) - popcount(u & neg_j)) + popcount(neg_j) - popcount(pos_j).
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint32_t, uint64_t, int64_t, int32_t, int8_t
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "cython"

cdef extern from *:
    int popcount32 "__builtin_popcount"(unsigned int) nogil
    int ctz32 "__builtin_ctz"(unsigned int) nogil

cdef enum:
    MAXN = 20

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t trial_key(uint64_t seed, uint64_t series, uint64_t trial) nogil:
    cdef uint64_t k = mix64(seed + GOLDEN)
    k = mix64(k + (series + 1) * GOLDEN)
    return mix64(k + (trial + 1) * GOLDEN)


cdef void sample_into(uint64_t key, int total, int n_d, int32_t* pool, int32_t* out) nogil:
    cdef int k, r, t, a, b
    cdef uint64_t bound, rem, x, counter = 0
    for k in range(total):
        pool[k] = k
    for k in range(n_d):
        bound = total - k
        rem = (<uint64_t>0 - bound) % bound  # 2**64 mod bound
        while True:
            x = mix64(key + (counter + 1) * GOLDEN)
            counter += 1
            if rem == 0 or x < <uint64_t>0 - rem:
                break
        r = k + <int>(x % bound)
        t = pool[k]
        pool[k] = pool[r]
        pool[r] = t
    # insertion sort, n_d is small
    for a in range(n_d):
        out[a] = pool[a]
    for a in range(1, n_d):
        t = out[a]
        b = a - 1
        while b >= 0 and out[b] > t:
            out[b + 1] = out[b]
            b -= 1
        out[b + 1] = t


cdef inline bint component_ok(int h, bint plus, int tie) nogil:
    if tie == 0:
        return h > 0 if plus else h <= 0
    elif tie == 1:
        return h >= 0 if plus else h < 0
    return h > 0 if plus else h < 0


cdef inline bint input_ok(uint32_t u, int n, uint32_t* pos, uint32_t* neg,
                          int* offset, uint32_t ref, int tie) nogil:
    cdef int j, h
    for j in range(n):
        h = 2 * (popcount32(u & pos[j]) - popcount32(u & neg[j])) + offset[j]
        if not component_ok(h, (ref >> j) & 1, tie):
            return False
    return True


cdef void build_masks(const int8_t[:, ::1] w, int n, uint32_t* pos, uint32_t* neg) nogil:
    cdef int i, j
    for j in range(n):
        pos[j] = 0
        neg[j] = 0
        for i in range(n):
            if w[i, j] > 0:
                pos[j] |= (<uint32_t>1) << i
            elif w[i, j] < 0:
                neg[j] |= (<uint32_t>1) << i


cdef inline void cut(int32_t* links, int n_d, int n, uint32_t* pos, uint32_t* neg) nogil:
    cdef int k, i, j
    for k in range(n_d):
        i = links[k] // n
        j = links[k] % n
        pos[j] &= ~((<uint32_t>1) << i)
        neg[j] &= ~((<uint32_t>1) << i)


cdef int64_t count_free(int n, uint32_t* pos, uint32_t* neg, uint32_t ref, int tie) nogil:
    cdef int j
    cdef int offset[MAXN]
    cdef uint32_t u
    cdef int64_t c = 0
    for j in range(n):
        offset[j] = popcount32(neg[j]) - popcount32(pos[j])
    for u in range((<uint32_t>1) << n):
        if input_ok(u, n, pos, neg, offset, ref, tie):
            c += 1
    return c


cdef uint32_t ref_mask(const int8_t[::1] reference, int n):
    cdef uint32_t m = 0
    cdef int i
    for i in range(n):
        if reference[i] > 0:
            m |= (<uint32_t>1) << i
    return m


def _check(weights, reference):
    w = np.ascontiguousarray(weights, dtype=np.int8)
    r = np.ascontiguousarray(reference, dtype=np.int8)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or r.shape[0] != w.shape[0]:
        raise ValueError("weights must be n x n and match the reference length")
    if w.shape[0] > MAXN:
        raise ValueError(f"compiled kernel supports n <= {MAXN}")
    return w, r


def agreement_histograms(weights, reference, int tie, links):
    w, r = _check(weights, reference)
    cdef int n = w.shape[0]
    cdef const int8_t[:, ::1] wv = w
    cdef int32_t[:, ::1] lk = np.ascontiguousarray(
        np.asarray(links, dtype=np.int32).reshape(len(links), -1))
    cdef int b = lk.shape[0], n_d = lk.shape[1]
    out = np.zeros((b, 2, n + 1), dtype=np.int64)
    cdef int64_t[:, :, ::1] ov = out
    cdef uint32_t ref = ref_mask(r, n)
    cdef uint32_t full = ((<uint32_t>1) << n) - 1
    cdef uint32_t base_pos[MAXN]
    cdef uint32_t base_neg[MAXN]
    cdef uint32_t pos[MAXN]
    cdef uint32_t neg[MAXN]
    cdef int offset[MAXN]
    cdef int t, j, agree, prefix
    cdef uint32_t u, diff
    build_masks(wv, n, base_pos, base_neg)
    with nogil:
        for t in range(b):
            for j in range(n):
                pos[j] = base_pos[j]
                neg[j] = base_neg[j]
            if n_d:
                cut(&lk[t, 0], n_d, n, pos, neg)
            for j in range(n):
                offset[j] = popcount32(neg[j]) - popcount32(pos[j])
            for u in range(full + 1):
                if input_ok(u, n, pos, neg, offset, ref, tie):
                    diff = (u ^ ref) & full
                    agree = n - popcount32(diff)
                    prefix = n if diff == 0 else ctz32(diff)
                    ov[t, 0, agree] += 1
                    ov[t, 1, prefix] += 1
    return out


def free_recall_counts(weights, reference, int tie, links):
    w, r = _check(weights, reference)
    cdef int n = w.shape[0]
    cdef const int8_t[:, ::1] wv = w
    cdef int32_t[:, ::1] lk = np.ascontiguousarray(
        np.asarray(links, dtype=np.int32).reshape(len(links), -1))
    cdef int b = lk.shape[0], n_d = lk.shape[1]
    out = np.zeros(b, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef uint32_t ref = ref_mask(r, n)
    cdef uint32_t base_pos[MAXN]
    cdef uint32_t base_neg[MAXN]
    cdef uint32_t pos[MAXN]
    cdef uint32_t neg[MAXN]
    cdef int t, j
    build_masks(wv, n, base_pos, base_neg)
    with nogil:
        for t in range(b):
            for j in range(n):
                pos[j] = base_pos[j]
                neg[j] = base_neg[j]
            if n_d:
                cut(&lk[t, 0], n_d, n, pos, neg)
            ov[t] = count_free(n, pos, neg, ref, tie)
    return out


def sample_links(uint64_t seed, uint64_t series, uint64_t trial_start, int count, int n, int n_d):
    cdef int total = n * n
    if not 0 <= n_d <= total:
        raise ValueError(f"n_d={n_d} outside [0, {total}]")
    out = np.zeros((count, n_d), dtype=np.int32)
    cdef int32_t[:, ::1] ov = out
    cdef int32_t* pool = <int32_t*>malloc(total * sizeof(int32_t))
    cdef int32_t* buf = <int32_t*>malloc((n_d + 1) * sizeof(int32_t))
    cdef int t, k
    try:
        with nogil:
            for t in range(count):
                sample_into(trial_key(seed, series, trial_start + t), total, n_d, pool, buf)
                for k in range(n_d):
                    ov[t, k] = buf[k]
    finally:
        free(pool)
        free(buf)
    return out


def survey_counts(uint64_t seed, uint64_t series, uint64_t trial_start, int count,
                  weights, reference, int tie, int n_d):
    w, r = _check(weights, reference)
    cdef int n = w.shape[0]
    cdef int total = n * n
    if not 0 <= n_d <= total:
        raise ValueError(f"n_d={n_d} outside [0, {total}]")
    cdef const int8_t[:, ::1] wv = w
    out = np.zeros(count, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef uint32_t ref = ref_mask(r, n)
    cdef uint32_t base_pos[MAXN]
    cdef uint32_t base_neg[MAXN]
    cdef uint32_t pos[MAXN]
    cdef uint32_t neg[MAXN]
    cdef int t, j
    cdef int32_t* pool = <int32_t*>malloc(total * sizeof(int32_t))
    cdef int32_t* buf = <int32_t*>malloc((n_d + 1) * sizeof(int32_t))
    build_masks(wv, n, base_pos, base_neg)
    try:
        with nogil:
            for t in range(count):
                sample_into(trial_key(seed, series, trial_start + t), total, n_d, pool, buf)
                for j in range(n):
                    pos[j] = base_pos[j]
                    neg[j] = base_neg[j]
                cut(buf, n_d, n, pos, neg)
                ov[t] = count_free(n, pos, neg, ref, tie)
    finally:
        free(pool)
        free(buf)
    return out
