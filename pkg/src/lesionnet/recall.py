"""Exact recall probabilities by complete enumeration of cues and noise.

Each (cue subset S, noise assignment) pair maps to exactly one input u,
and u is reached from every size-m subset of the positions where it
agrees with the reference. So the success count for cue size m is
sum over successful u of C(agree(u), m), and one pass over the 2**n
inputs yields the whole curve.
"""
from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal, localcontext
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .kernels import backend
from .net import TrainedNet, ValidationError

CUE_VARIANTS = ("averaged", "fixed")
_NO_LINKS = np.zeros((1, 0), dtype=np.int32)


@dataclass(frozen=True)
class RecallCurve:
    """Exact P at q = m/n for m = 0..n (distortion d = 1 - q).

    ``raw`` keeps the unreduced (successes, configurations) pairs; equality
    is on the reduced probabilities only.
    """

    n: int
    points: tuple[Fraction, ...]
    raw: tuple[tuple[int, int], ...] = field(compare=False, default=())

    def __post_init__(self):
        if len(self.points) != self.n + 1:
            raise ValidationError(f"curve needs {self.n + 1} points, got {len(self.points)}")

    @property
    def recognition(self) -> Fraction:
        return self.points[self.n]

    @property
    def free_recall(self) -> Fraction:
        return self.points[0]

    def at(self, m: int) -> Fraction:
        return self.points[m]

    def sort_key(self) -> tuple[Fraction, ...]:
        return self.points


def render5(p: Fraction) -> str:
    """Five-decimal rendering of an exact probability, half-up rounding."""
    with localcontext() as ctx:
        ctx.prec = 50
        d = Decimal(p.numerator) / Decimal(p.denominator)
        return str(d.quantize(Decimal("0.00001"), rounding=ROUND_HALF_UP))


def _check_cue(cue: str) -> None:
    if cue not in CUE_VARIANTS:
        raise ValidationError(f"unknown cue variant {cue!r}; expected one of {CUE_VARIANTS}")


def counts_from_histogram(n: int, hist: np.ndarray, m: int, cue: str = "averaged") -> tuple[int, int]:
    """Unreduced (successes, configurations) for cue size m."""
    if cue == "averaged":
        num = sum(int(hist[0, a]) * comb(a, m) for a in range(m, n + 1))
        return num, comb(n, m) << (n - m)
    # fixed: cue occupies positions 0..m-1
    num = sum(int(hist[1, p]) for p in range(m, n + 1))
    return num, 1 << (n - m)


def curve_from_histogram(n: int, hist: np.ndarray, cue: str = "averaged") -> RecallCurve:
    raw = tuple(counts_from_histogram(n, hist, m, cue) for m in range(n + 1))
    return RecallCurve(n, tuple(Fraction(a, b) for a, b in raw), raw)


def success_histogram(net: TrainedNet) -> np.ndarray:
    return backend.agreement_histograms(
        net.weights, net.reference, net.conventions.tie_code, _NO_LINKS
    )[0]


def recall_counts(net: TrainedNet, m: int, cue: str = "averaged") -> tuple[int, int]:
    _check_cue(cue)
    if not 0 <= m <= net.n:
        raise ValidationError(f"cue size m={m} outside [0, {net.n}]")
    return counts_from_histogram(net.n, success_histogram(net), m, cue)


def exact_recall_prob(net: TrainedNet, m: int, cue: str = "averaged") -> Fraction:
    num, den = recall_counts(net, m, cue)
    return Fraction(num, den)


def recall_curve(net: TrainedNet, cue: str = "averaged") -> RecallCurve:
    _check_cue(cue)
    return curve_from_histogram(net.n, success_histogram(net), cue)


def curves_for_cut_sets(
    template: TrainedNet, link_sets: Sequence[Sequence[int]], cue: str = "averaged"
) -> list[RecallCurve]:
    """Recall curves of ``template`` lesioned by each set of flat link indices (i*n + j)."""
    _check_cue(cue)
    if not len(link_sets):
        return []
    links = np.asarray(link_sets, dtype=np.int32).reshape(len(link_sets), -1)
    hists = backend.agreement_histograms(
        template.weights, template.reference, template.conventions.tie_code, links
    )
    return [curve_from_histogram(template.n, h, cue) for h in hists]


def _success_rows(net: TrainedNet, u: np.ndarray) -> np.ndarray:
    h = u.astype(np.int64) @ net.weights.astype(np.int64)
    tie = net.conventions.tie_policy
    y = np.where(h >= 0, 1, -1) if tie == "lenient_plus" else np.where(h > 0, 1, -1)
    ok = (y == net.reference).all(axis=1)
    if tie == "tie_fails":
        ok &= (h != 0).all(axis=1)
    return ok


def mc_recall_estimate(
    net: TrainedNet,
    m: int,
    trials: int,
    seed: int,
    cue: str = "averaged",
    chunk: int = 100_000,
) -> tuple[float, float]:
    """Sampled recall probability and its standard error (Bernoulli)."""
    _check_cue(cue)
    n = net.n
    if not 0 <= m <= n:
        raise ValidationError(f"cue size m={m} outside [0, {n}]")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    gen = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        noise = gen.integers(0, 2, size=(b, n), dtype=np.int8) * 2 - 1
        if cue == "averaged":
            # uniform size-m subset: the m smallest of n iid keys
            ranks = np.argsort(np.argsort(gen.random((b, n)), axis=1), axis=1)
            cued = ranks < m
        else:
            cued = np.broadcast_to(np.arange(n) < m, (b, n))
        u = np.where(cued, net.reference, noise)
        hits += int(_success_rows(net, u).sum())
        done += b
    p = hits / trials
    return p, float(np.sqrt(p * (1 - p) / trials))
