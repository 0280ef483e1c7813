"""Monte Carlo survey of free-recall probability over random cut-link sets."""
from __future__ import annotations

import hashlib
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import __version__, rng
from .kernels import BACKEND, get_backend
from .net import Conventions, DamageSpec, TrainedNet, ValidationError, apply_damage, as_bipolar, train
from .recall import recall_counts, render5

Link = tuple[int, int]


def sample_cut_set(key: int, n: int, n_d: int) -> tuple[Link, ...]:
    """Uniform random set of n_d distinct links drawn from the stream ``key``."""
    if not 0 <= n_d <= n * n:
        raise ValidationError(f"n_d={n_d} outside [0, {n * n}]")
    return tuple(divmod(idx, n) for idx in rng.sample_link_indices(key, n, n_d))


def cut_set_for(seed: int, series: int, trial: int, n: int, n_d: int) -> tuple[Link, ...]:
    return sample_cut_set(rng.trial_key(seed, series, trial), n, n_d)


def links_to_flat(links: Iterable[Link], n: int) -> list[int]:
    return sorted(i * n + j for i, j in links)


def _max_workers(requested: int) -> int:
    cap = os.environ.get("LESIONNET_MAX_WORKERS")
    if cap:
        requested = min(requested, max(1, int(cap)))
    return max(1, requested)


@dataclass(frozen=True)
class SurveyConfig:
    n: int = 9
    n_d: int = 10
    trials_per_series: int = 100_000
    series: int = 10
    seed: int = 0
    conventions: Conventions = field(default_factory=Conventions)
    reference: tuple[int, ...] | None = None  # None -> all +1
    # tracked P_FR: None, "auto-nk<k>" or an exact fraction string like "146/512"
    target: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if not 0 <= self.n_d <= self.n * self.n:
            raise ValidationError(f"n_d={self.n_d} outside [0, {self.n * self.n}]")
        if self.trials_per_series < 1 or self.series < 1:
            raise ValidationError("trials_per_series and series must be >= 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.reference is not None:
            object.__setattr__(self, "reference", tuple(int(v) for v in as_bipolar(self.reference, self.n)))
        if self.target is not None:
            parse_target(self.target, self.n)

    @property
    def reference_vector(self) -> tuple[int, ...]:
        return self.reference if self.reference is not None else (1,) * self.n

    def template(self) -> TrainedNet:
        return train(self.reference_vector, self.conventions)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "n_d": self.n_d,
            "trials_per_series": self.trials_per_series,
            "series": self.series,
            "seed": self.seed,
            "conventions": self.conventions.as_dict(),
            "reference": list(self.reference_vector),
            "target": self.target,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurveyConfig":
        return cls(
            n=d["n"],
            n_d=d["n_d"],
            trials_per_series=d["trials_per_series"],
            series=d["series"],
            seed=d["seed"],
            conventions=Conventions(**d["conventions"]),
            reference=tuple(d["reference"]),
            target=d.get("target"),
        )

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_target(target: str, n: int) -> tuple[str, object]:
    target = target.strip()
    if target.startswith("auto-nk"):
        try:
            k = int(target[len("auto-nk"):])
        except ValueError as exc:
            raise ValidationError(f"bad target {target!r}") from exc
        if not 0 <= k <= n:
            raise ValidationError(f"target {target!r}: n_k outside [0, {n}]")
        return "nk", k
    try:
        frac = Fraction(target)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad target {target!r}") from exc
    if not 0 <= frac <= 1:
        raise ValidationError(f"target {target!r} is not a probability")
    return "fraction", frac


def neuron_loss_pfr_count(template: TrainedNet, n_k: int) -> int:
    """Free-recall success count (out of 2**n) with inputs 0..n_k-1 deleted."""
    net = apply_damage(template, DamageSpec.deletions(range(n_k)))
    return recall_counts(net, 0)[0]


def resolve_target(config: SurveyConfig) -> int | None:
    """Histogram key tracked for matched-set logging, or None."""
    if config.target is None:
        return None
    kind, value = parse_target(config.target, config.n)
    if kind == "nk":
        return neuron_loss_pfr_count(config.template(), value)
    key = value * (1 << config.n)
    # a probability that is not k / 2**n can never be observed
    return int(key) if key.denominator == 1 else -1


@dataclass(frozen=True)
class Match:
    series: int
    trial: int
    key: int


@dataclass
class LesionSurvey:
    config: SurveyConfig
    histograms: list[dict[int, int]]
    matched: list[Match]
    tracked_keys: tuple[int, ...]
    target_key: int | None
    intact_key: int
    manifest: dict = field(default_factory=dict)

    @property
    def total_trials(self) -> int:
        return sum(sum(h.values()) for h in self.histograms)

    def distinct_keys(self) -> list[int]:
        keys: set[int] = set()
        for h in self.histograms:
            keys.update(k for k, c in h.items() if c)
        return sorted(keys)

    def cut_set(self, match: Match) -> tuple[Link, ...]:
        c = self.config
        return cut_set_for(c.seed, match.series, match.trial, c.n, c.n_d)

    def matches_for(self, key: int) -> list[Match]:
        return [m for m in self.matched if m.key == key]

    def payload(self) -> dict:
        """Deterministic content: everything except timing and host details."""
        return {
            "config": self.config.as_dict(),
            "config_hash": self.config.config_hash(),
            "target_key": self.target_key,
            "intact_key": self.intact_key,
            "tracked_keys": list(self.tracked_keys),
            "histograms": [
                {str(k): h[k] for k in sorted(h)} for h in self.histograms
            ],
            "matched": [[m.series, m.trial, m.key] for m in self.matched],
        }

    def to_dict(self) -> dict:
        return {"payload": self.payload(), "manifest": self.manifest}

    @classmethod
    def from_dict(cls, d: dict) -> "LesionSurvey":
        p = d["payload"]
        return cls(
            config=SurveyConfig.from_dict(p["config"]),
            histograms=[{int(k): v for k, v in h.items()} for h in p["histograms"]],
            matched=[Match(*row) for row in p["matched"]],
            tracked_keys=tuple(p["tracked_keys"]),
            target_key=p["target_key"],
            intact_key=p["intact_key"],
            manifest=d.get("manifest", {}),
        )


def _task_list(config: SurveyConfig, chunk: int) -> list[tuple[int, int, int]]:
    tasks = []
    for s in range(config.series):
        for start in range(0, config.trials_per_series, chunk):
            tasks.append((s, start, min(chunk, config.trials_per_series - start)))
    return tasks


def run_fragment(
    config: SurveyConfig,
    series: int,
    trial_start: int,
    count: int,
    tracked: Sequence[int],
    backend=None,
) -> tuple[dict[int, int], list[Match]]:
    kern = backend or get_backend()
    net = config.template()
    counts = kern.survey_counts(
        config.seed, series, trial_start, count,
        net.weights, net.reference, config.conventions.tie_code, config.n_d,
    )
    keys, freq = np.unique(counts, return_counts=True)
    hist = {int(k): int(c) for k, c in zip(keys, freq)}
    matched = []
    if tracked:
        hit = np.flatnonzero(np.isin(counts, np.asarray(tracked)))
        matched = [Match(series, trial_start + int(t), int(counts[t])) for t in hit]
    return hist, matched


def empty_survey(config: SurveyConfig, tracked=(), target_key=None, intact_key=0) -> LesionSurvey:
    return LesionSurvey(config, [{} for _ in range(config.series)], [], tuple(tracked), target_key, intact_key)


def merge_partials(parts: Sequence[LesionSurvey]) -> LesionSurvey:
    """Key-wise sum of fragment histograms; matched trials concatenated in order."""
    if not parts:
        raise ValidationError("nothing to merge")
    first = parts[0]
    for p in parts[1:]:
        if (p.config != first.config or p.tracked_keys != first.tracked_keys
                or p.target_key != first.target_key or p.intact_key != first.intact_key):
            raise ValidationError("cannot merge survey fragments with different configurations")
    histograms: list[dict[int, int]] = [{} for _ in range(first.config.series)]
    matched: list[Match] = []
    for p in parts:
        for s, h in enumerate(p.histograms):
            for k, c in h.items():
                histograms[s][k] = histograms[s].get(k, 0) + c
        matched.extend(p.matched)
    matched.sort(key=lambda m: (m.series, m.trial))
    manifest = dict(first.manifest)
    manifest["total_trials"] = sum(sum(h.values()) for h in histograms)
    return LesionSurvey(first.config, histograms, matched, first.tracked_keys,
                        first.target_key, first.intact_key, manifest)


def cut_set_space(n: int, n_d: int) -> dict:
    exact = comb(n * n, n_d)
    return {
        "links": n * n,
        "n_d": n_d,
        "exact_count": exact,
        "exact_count_sci": f"{exact:.3e}",
        "published_estimate": "2.3e11" if (n, n_d) == (9, 10) else None,
        "note": (
            "exact binomial coefficient; the published approximation 2.3e11 for "
            "C(81,10) is about 8x smaller than the exact value"
            if (n, n_d) == (9, 10) else "exact binomial coefficient"
        ),
    }


def run_survey(
    config: SurveyConfig,
    workers: int = 1,
    chunk: int = 10_000,
    backend=None,
    progress=None,
) -> LesionSurvey:
    """Run every series; output is identical for any ``workers``/``chunk``."""
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    template = config.template()
    intact_key = recall_counts(template, 0)[0]
    target_key = resolve_target(config)
    tracked = tuple(sorted({intact_key} | ({target_key} if target_key is not None else set())))
    kern = backend or get_backend()

    tasks = _task_list(config, chunk)
    fragments = []

    def work(task):
        s, start, count = task
        hist, matched = run_fragment(config, s, start, count, tracked, kern)
        frag = empty_survey(config, tracked, target_key, intact_key)
        frag.histograms[s] = hist
        frag.matched = matched
        return frag

    n_workers = _max_workers(workers)
    if n_workers == 1:
        for task in tasks:
            fragments.append(work(task))
            if progress:
                progress(len(fragments), len(tasks))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for frag in pool.map(work, tasks):
                fragments.append(frag)
                if progress:
                    progress(len(fragments), len(tasks))

    survey = merge_partials(fragments)
    target_note = None
    if target_key is not None and target_key >= 0:
        target_note = {
            "count": target_key,
            "denominator": 1 << config.n,
            "fraction": f"{target_key}/{1 << config.n}",
            "float5": render5(Fraction(target_key, 1 << config.n)),
        }
    survey.manifest = {
        "config": config.as_dict(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "conventions": config.conventions.as_dict(),
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": round(time.perf_counter() - t0, 3),
        "total_trials": survey.total_trials,
        "tool_version": f"lesionnet {__version__}",
        "backend": getattr(kern, "NAME", BACKEND),
        "workers": n_workers,
        "target": target_note,
        "cut_set_space": cut_set_space(config.n, config.n_d),
    }
    return survey


@dataclass(frozen=True)
class BinStat:
    key: int
    mean: Fraction
    std: float
    counts: tuple[int, ...]

    def probability(self, n: int) -> Fraction:
        return Fraction(self.key, 1 << n)


def histogram_stats(survey: LesionSurvey) -> list[BinStat]:
    """Per-key mean frequency (exact) and across-series sample std, sorted by key."""
    t = survey.config.trials_per_series
    out = []
    for key in survey.distinct_keys():
        counts = tuple(h.get(key, 0) for h in survey.histograms)
        freqs = [Fraction(c, t) for c in counts]
        mean = sum(freqs, Fraction(0)) / len(freqs)
        std = statistics.stdev([float(f) for f in freqs]) if len(freqs) > 1 else 0.0
        out.append(BinStat(key, mean, std, counts))
    return out


def series_stats(per_series_counts: Sequence[int], trials_per_series: int) -> tuple[float, float]:
    """Mean and sample std (over series) of a per-series frequency, in percent."""
    freqs = [100.0 * c / trials_per_series for c in per_series_counts]
    if not freqs:
        return 0.0, 0.0
    mean = statistics.fmean(freqs)
    std = statistics.stdev(freqs) if len(freqs) > 1 else 0.0
    return mean, std

