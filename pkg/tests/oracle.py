"""Brute-force reference computations, deliberately naive.

Nothing here shares code with the library's enumeration path: fields are
summed with explicit loops and every (cue subset, noise) configuration is
visited one by one.
"""
import itertools
from fractions import Fraction


def hebbian(reference, diagonal="keep"):
    n = len(reference)
    w = [[reference[i] * reference[j] for j in range(n)] for i in range(n)]
    if diagonal == "zero":
        for i in range(n):
            w[i][i] = 0
    return w


def lesion(w, deleted=(), cuts=()):
    w = [row[:] for row in w]
    for i in deleted:
        w[i] = [0] * len(w)
    for i, j in cuts:
        w[i][j] = 0
    return w


def succeeds(w, reference, tie, u):
    n = len(reference)
    for j in range(n):
        h = 0
        for i in range(n):
            h += w[i][j] * u[i]
        if tie == "tie_fails" and h == 0:
            return False
        if tie == "lenient_plus":
            y = 1 if h >= 0 else -1
        else:
            y = 1 if h > 0 else -1
        if y != reference[j]:
            return False
    return True


def recall_prob(w, reference, tie, m, cue="averaged"):
    n = len(reference)
    hits = total = 0
    subsets = itertools.combinations(range(n), m) if cue == "averaged" else [tuple(range(m))]
    for cue_set in subsets:
        free = [i for i in range(n) if i not in cue_set]
        for noise in itertools.product((-1, 1), repeat=len(free)):
            u = list(reference)
            for i, v in zip(free, noise):
                u[i] = v
            total += 1
            hits += succeeds(w, reference, tie, u)
    return Fraction(hits, total), hits, total


def curve(w, reference, tie, cue="averaged"):
    return tuple(recall_prob(w, reference, tie, m, cue)[0] for m in range(len(reference) + 1))


def free_recall_count(w, reference, tie):
    return recall_prob(w, reference, tie, 0)[1]
