"""Tip-of-the-tongue signatures: neuron-loss reference curve, grouping of
cut sets by exact recall curve, class frequencies and the loss/cut ratio."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .net import (
    DIAGONAL_POLICIES,
    TIE_POLICIES,
    Conventions,
    DamageSpec,
    TrainedNet,
    ValidationError,
    apply_damage,
    train,
)
from .recall import (
    CUE_VARIANTS,
    RecallCurve,
    curves_for_cut_sets,
    exact_recall_prob,
    recall_counts,
    recall_curve,
    render5,
)
from .survey import LesionSurvey, links_to_flat, series_stats

Link = tuple[int, int]
LABELS = ("tot_match", "other", "intact_equivalent")

# TOT probability under loss of 4 of 9 input neurons, taken as given (percent)
NEURON_LOSS_TOT_PCT = 4.8
PUBLISHED_TOT_FREQ_PCT = (7.0e-3, 1.3e-3)
PUBLISHED_RATIO = (1.5e3, 0.3e3)


@dataclass(frozen=True)
class LossSignature:
    curve: RecallCurve
    unique: bool
    # (deleted subset, curve) for every subset; filled only when not unique
    family: tuple[tuple[tuple[int, ...], RecallCurve], ...] = ()


def neuron_loss_signature(
    n: int,
    n_k: int,
    conventions: Conventions | None = None,
    reference: Sequence[int] | None = None,
    cue: str = "averaged",
) -> LossSignature:
    if not 0 <= n_k <= n:
        raise ValidationError(f"n_k={n_k} outside [0, {n}]")
    template = train(reference if reference is not None else [1] * n, conventions)
    curves = {}
    for subset in itertools.combinations(range(n), n_k):
        curves[subset] = recall_curve(apply_damage(template, DamageSpec.deletions(subset)), cue)
    first = curves[tuple(range(n_k))]
    if all(c == first for c in curves.values()):
        return LossSignature(first, True)
    return LossSignature(first, False, tuple(curves.items()))


@dataclass(frozen=True)
class MatchedSet:
    links: tuple[Link, ...]
    per_series: tuple[int, ...] = (1,)

    @property
    def multiplicity(self) -> int:
        return sum(self.per_series)


def collect_matches(survey: LesionSurvey, target: Fraction) -> list[MatchedSet]:
    """Distinct cut sets whose exact P_FR equals ``target``, with per-series counts."""
    n = survey.config.n
    key = Fraction(target) * (1 << n)
    if key.denominator != 1 or int(key) not in survey.tracked_keys:
        raise ValidationError(f"P_FR {target} was not tracked by this survey")
    found: dict[tuple[Link, ...], list[int]] = {}
    for m in survey.matches_for(int(key)):
        counts = found.setdefault(survey.cut_set(m), [0] * survey.config.series)
        counts[m.series] += 1
    return [MatchedSet(links, tuple(c)) for links, c in found.items()]


@dataclass(frozen=True)
class SignatureClass:
    curve: RecallCurve
    member_sets: tuple[tuple[Link, ...], ...]
    per_series: tuple[int, ...]
    freq_mean_pct: float = 0.0
    freq_std_pct: float = 0.0
    label: str = "other"

    @property
    def multiplicity(self) -> int:
        return sum(self.per_series)


def _as_matched(item) -> MatchedSet:
    if isinstance(item, MatchedSet):
        return item
    if isinstance(item, DamageSpec):
        if item.deleted_inputs:
            raise ValidationError("grouping expects cut-link damage only")
        return MatchedSet(item.canonical_links())
    return MatchedSet(tuple(sorted(tuple(l) for l in item)))


def group_by_curve(
    matches: Iterable,
    template: TrainedNet,
    trials_per_series: int | None = None,
    cue: str = "averaged",
) -> list[SignatureClass]:
    """Group cut sets by exact recall-curve equality.

    Classes come back sorted by frequency (descending), ties broken by the
    curve's lexicographic order.
    """
    items = [_as_matched(x) for x in matches]
    if not items:
        return []
    n = template.n
    curves: list[RecallCurve] = [None] * len(items)  # type: ignore[list-item]
    by_len: dict[int, list[int]] = {}
    for idx, it in enumerate(items):
        by_len.setdefault(len(it.links), []).append(idx)
    for idxs in by_len.values():
        flat = [links_to_flat(items[i].links, n) for i in idxs]
        for i, c in zip(idxs, curves_for_cut_sets(template, flat, cue)):
            curves[i] = c

    n_series = max(len(it.per_series) for it in items)
    groups: dict[RecallCurve, list[MatchedSet]] = {}
    for it, c in zip(items, curves):
        groups.setdefault(c, []).append(it)

    classes = []
    for c, members in groups.items():
        per_series = [0] * n_series
        for mset in members:
            for s, k in enumerate(mset.per_series):
                per_series[s] += k
        mean, std = (
            series_stats(per_series, trials_per_series) if trials_per_series else (0.0, 0.0)
        )
        classes.append(
            SignatureClass(c, tuple(sorted(m.links for m in members)), tuple(per_series), mean, std)
        )
    classes.sort(key=lambda k: (-k.multiplicity, k.curve.sort_key()))
    return classes


def classify_class(cls: SignatureClass, tot_signature: RecallCurve, intact: RecallCurve) -> str:
    if not (cls.curve.n == tot_signature.n == intact.n):
        raise ValidationError("curves are on different grids")
    if cls.curve == tot_signature:
        return "tot_match"
    if cls.curve == intact:
        return "intact_equivalent"
    return "other"


def label_classes(classes, tot_signature, intact) -> list[SignatureClass]:
    return [replace(c, label=classify_class(c, tot_signature, intact)) for c in classes]


@dataclass(frozen=True)
class RatioEstimate:
    numerator_pct: float
    denominator_pct: float
    denominator_std_pct: float
    ratio: float | None
    ratio_std: float | None
    note: str = ""
    published_pair_ratio: float = field(
        default=NEURON_LOSS_TOT_PCT / PUBLISHED_TOT_FREQ_PCT[0]
    )
    published_pair_rel_err: float = field(
        default=PUBLISHED_TOT_FREQ_PCT[1] / PUBLISHED_TOT_FREQ_PCT[0]
    )
    published_quoted_ratio: tuple[float, float] = PUBLISHED_RATIO

    @property
    def defined(self) -> bool:
        return self.ratio is not None

    @property
    def published_inconsistent(self) -> bool:
        lo = self.published_quoted_ratio[0] - self.published_quoted_ratio[1]
        hi = self.published_quoted_ratio[0] + self.published_quoted_ratio[1]
        return not lo <= self.published_pair_ratio <= hi

    def as_dict(self) -> dict:
        return {
            "neuron_loss_tot_pct": self.numerator_pct,
            "measured_tot_freq_pct": self.denominator_pct,
            "measured_tot_freq_std_pct": self.denominator_std_pct,
            "measured_ratio": self.ratio,
            "measured_ratio_std": self.ratio_std,
            "note": self.note,
            "published_pair_ratio": self.published_pair_ratio,
            "published_pair_rel_err": self.published_pair_rel_err,
            "published_quoted_ratio": list(self.published_quoted_ratio),
            "published_values_inconsistent": self.published_inconsistent,
        }


def estimate_ratio(
    tot_mean_pct: float, tot_std_pct: float, neuron_loss_pct: float = NEURON_LOSS_TOT_PCT
) -> RatioEstimate:
    """How many times more often TOT arises from neuron loss than from link cuts.

    The neuron-loss probability is treated as exact, so the ratio's relative
    error is the relative std of the measured frequency.
    """
    if tot_mean_pct <= 0:
        return RatioEstimate(neuron_loss_pct, tot_mean_pct, tot_std_pct, None, None,
                             "no TOT observed; ratio undefined")
    ratio = neuron_loss_pct / tot_mean_pct
    return RatioEstimate(neuron_loss_pct, tot_mean_pct, tot_std_pct, ratio,
                         ratio * tot_std_pct / tot_mean_pct)


@dataclass(frozen=True)
class ConventionRow:
    conventions: Conventions
    cue: str
    probability: Fraction
    raw: tuple[int, int]
    rendered: str
    unique: bool
    match: bool


@dataclass(frozen=True)
class ConventionReport:
    target: str
    n: int
    n_k: int
    m: int
    rows: tuple[ConventionRow, ...]

    @property
    def matches(self) -> list[ConventionRow]:
        return [r for r in self.rows if r.match]

    @property
    def winner(self) -> ConventionRow | None:
        """First matching row, or None (documented-discrepancy mode)."""
        m = self.matches
        return m[0] if m else None

    def summary(self) -> str:
        if not self.matches:
            return (f"NO convention reproduces P={self.target} for n={self.n}, n_k={self.n_k}, "
                    f"m={self.m}; falling back to default conventions (documented discrepancy)")
        names = ", ".join(f"{r.conventions.diagonal_policy}/{r.conventions.tie_policy}/{r.cue}"
                          for r in self.matches)
        return f"{len(self.matches)} convention(s) reproduce P={self.target}: {names}"


def convention_search(
    target: str = "0.28516",
    n: int = 9,
    n_k: int = 4,
    m: int = 0,
    reference: Sequence[int] | None = None,
) -> ConventionReport:
    """Sweep diagonal x tie x cue-placement and compare the n_k-deletion
    recall probability at cue size m with a printed 5-decimal target."""
    target = f"{Fraction(target):.5f}" if "/" in target else target.strip()
    if not 0 <= m <= n:
        raise ValidationError(f"m={m} outside [0, {n}]")
    rows = []
    for diag, tie, cue in itertools.product(DIAGONAL_POLICIES, TIE_POLICIES, CUE_VARIANTS):
        conv = Conventions(diag, tie)
        template = train(reference if reference is not None else [1] * n, conv)
        probs = {
            exact_recall_prob(apply_damage(template, DamageSpec.deletions(s)), m, cue)
            for s in itertools.combinations(range(n), n_k)
        }
        net = apply_damage(template, DamageSpec.deletions(range(n_k)))
        p = exact_recall_prob(net, m, cue)
        raw = recall_counts(net, m, cue)
        rendered = render5(p)
        rows.append(ConventionRow(conv, cue, p, raw, rendered, len(probs) == 1, rendered == target))
    return ConventionReport(target, n, n_k, m, tuple(rows))


def intact_equivalent_counts(survey: LesionSurvey, cue: str = "averaged") -> tuple[int, ...]:
    """Per-series number of trials whose full curve equals the intact net's."""
    template = survey.config.template()
    intact = recall_curve(template, cue)
    per_series = [0] * survey.config.series
    ms = survey.matches_for(survey.intact_key)
    if not ms:
        return tuple(per_series)
    flat = [links_to_flat(survey.cut_set(m), survey.config.n) for m in ms]
    for m, c in zip(ms, curves_for_cut_sets(template, flat, cue)):
        if c == intact:
            per_series[m.series] += 1
    return tuple(per_series)


@dataclass(frozen=True)
class Classification:
    target_key: int
    classes: tuple[SignatureClass, ...]
    tot_signature: LossSignature
    intact: RecallCurve
    tot_per_series: tuple[int, ...]
    tot_freq_mean_pct: float
    tot_freq_std_pct: float
    ratio: RatioEstimate

    @property
    def matched_total(self) -> int:
        return sum(c.multiplicity for c in self.classes)


def classify_survey(
    survey: LesionSurvey,
    n_k: int = 4,
    neuron_loss_pct: float = NEURON_LOSS_TOT_PCT,
    cue: str = "averaged",
    log_sets: Sequence[DamageSpec] | None = None,
) -> Classification:
    """Group the survey's target-P_FR cut sets and label them against the
    n_k neuron-loss signature and the intact curve."""
    cfg = survey.config
    if survey.target_key is None:
        raise ValidationError("survey was run without a target P_FR; no matched-set log to classify")
    template = cfg.template()
    signature = neuron_loss_signature(cfg.n, n_k, cfg.conventions, cfg.reference_vector, cue)
    intact = recall_curve(template, cue)
    matches: list[MatchedSet] = []
    if survey.target_key >= 0:
        matches = collect_matches(survey, Fraction(survey.target_key, 1 << cfg.n))
    if log_sets is not None:
        logged = sorted(s.canonical_links() for s in log_sets)
        expected = sorted(m.links for m in matches for _ in range(m.multiplicity))
        if logged != expected:
            raise ValidationError("matched-set log does not agree with the survey file")
    classes = label_classes(
        group_by_curve(matches, template, cfg.trials_per_series, cue), signature.curve, intact
    )
    tot = [0] * cfg.series
    for c in classes:
        if c.label == "tot_match":
            for s, k in enumerate(c.per_series):
                tot[s] += k
    mean, std = series_stats(tot, cfg.trials_per_series)
    return Classification(
        survey.target_key, tuple(classes), signature, intact, tuple(tot), mean, std,
        estimate_ratio(mean, std, neuron_loss_pct),
    )
