from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesionnet import rng
from lesionnet.kernels import get_backend
from lesionnet.net import Conventions, ValidationError
from lesionnet.survey import (
    LesionSurvey,
    SurveyConfig,
    cut_set_space,
    empty_survey,
    histogram_stats,
    merge_partials,
    resolve_target,
    run_fragment,
    run_survey,
    sample_cut_set,
)

SMALL = SurveyConfig(trials_per_series=3000, series=3, seed=17, target="auto-nk4")


def test_sample_cut_set_examples():
    key = rng.trial_key(1, 0, 0)
    assert sample_cut_set(key, 9, 0) == ()
    full = sample_cut_set(key, 9, 81)
    assert full == tuple((i, j) for i in range(9) for j in range(9))
    with pytest.raises(ValidationError):
        sample_cut_set(key, 9, 82)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(1, 6), st.data())
def test_sample_cut_set_canonical(key, n, data):
    n_d = data.draw(st.integers(0, n * n))
    s = sample_cut_set(key, n, n_d)
    assert len(set(s)) == n_d
    assert list(s) == sorted(s)
    assert all(0 <= i < n and 0 <= j < n for i, j in s)


def test_config_validation():
    with pytest.raises(ValidationError):
        SurveyConfig(n_d=82)
    with pytest.raises(ValidationError):
        SurveyConfig(trials_per_series=0)
    with pytest.raises(ValidationError):
        SurveyConfig(target="auto-nk12")
    with pytest.raises(ValidationError):
        SurveyConfig(target="3/2")


def test_resolve_target():
    assert resolve_target(SurveyConfig(target="auto-nk4")) == 256
    assert resolve_target(SurveyConfig(target="auto-nk4", conventions=Conventions("zero"))) == 96
    assert resolve_target(SurveyConfig(target="146/512")) == 146
    assert resolve_target(SurveyConfig(target="1/3")) == -1
    assert resolve_target(SurveyConfig()) is None


def test_no_lesion_histogram():
    s = run_survey(SurveyConfig(n_d=0, trials_per_series=1, series=1, seed=1))
    assert s.histograms == [{256: 1}]


def test_no_lesion_every_trial_matches_intact():
    s = run_survey(SurveyConfig(n_d=0, trials_per_series=50, series=2, seed=1, target="1/2"))
    assert len(s.matches_for(256)) == 100


@pytest.mark.parametrize("workers", [1, 4, 8])
def test_worker_count_does_not_change_payload(workers):
    base = run_survey(SMALL, workers=1, chunk=3000)
    other = run_survey(SMALL, workers=workers, chunk=700)
    assert other.payload() == base.payload()


def test_backends_give_same_survey():
    from lesionnet.kernels import available_backends
    if len(available_backends()) < 2:
        pytest.skip("compiled backend not built")
    a = run_survey(SMALL, backend=get_backend("cython"))
    b = run_survey(SMALL, backend=get_backend("python"))
    assert a.payload() == b.payload()


def test_conservation_and_key_range():
    s = run_survey(SMALL, workers=2)
    for h in s.histograms:
        assert sum(h.values()) == SMALL.trials_per_series
        assert all(0 <= k <= 512 for k in h)
    assert s.total_trials == 9000
    assert sum(b.mean for b in histogram_stats(s)) == 1


def test_matched_trials_reproduce_their_key():
    s = run_survey(SurveyConfig(trials_per_series=5000, series=1, seed=3, target="146/512"))
    assert s.matches_for(146)
    kern = get_backend()
    net = SMALL.template()
    for m in s.matches_for(146)[:20]:
        flat = [i * 9 + j for i, j in s.cut_set(m)]
        assert kern.free_recall_counts(net.weights, net.reference, 0, [flat])[0] == 146


def _fragment(config, series, start, count, tracked=(256,)):
    hist, matched = run_fragment(config, series, start, count, tracked)
    frag = empty_survey(config, tracked, 256, 256)
    frag.histograms[series] = hist
    frag.matched = matched
    return frag


def test_merge_identity_and_commutativity():
    cfg = SurveyConfig(trials_per_series=400, series=2, seed=9)
    a = _fragment(cfg, 0, 0, 400)
    b = _fragment(cfg, 1, 0, 400)
    empty = empty_survey(cfg, (256,), 256, 256)
    assert merge_partials([a, empty]).payload() == merge_partials([a]).payload()
    assert merge_partials([a, b]).payload() == merge_partials([b, a]).payload()
    ab = merge_partials([a, b])
    for k, c in a.histograms[0].items():
        assert ab.histograms[0][k] == c


def test_merge_sums_counts():
    cfg = SurveyConfig(trials_per_series=400, series=1, seed=9)
    a = _fragment(cfg, 0, 0, 150)
    b = _fragment(cfg, 0, 150, 250)
    m = merge_partials([a, b])
    for k in set(a.histograms[0]) | set(b.histograms[0]):
        assert m.histograms[0][k] == a.histograms[0].get(k, 0) + b.histograms[0].get(k, 0)
    assert m.payload()["histograms"] == run_survey(cfg, chunk=400).payload()["histograms"]


def test_merge_rejects_mismatched_configs():
    a = _fragment(SurveyConfig(trials_per_series=10, series=1, seed=1), 0, 0, 10)
    b = _fragment(SurveyConfig(trials_per_series=10, series=1, seed=2), 0, 0, 10)
    with pytest.raises(ValidationError):
        merge_partials([a, b])


def _survey_with(counts_per_series, trials):
    cfg = SurveyConfig(trials_per_series=trials, series=len(counts_per_series))
    s = empty_survey(cfg)
    s.histograms = [dict(h) for h in counts_per_series]
    return s


def test_histogram_stats_single_series():
    stats = histogram_stats(_survey_with([{100: 10}], 10))
    assert stats[0].mean == 1 and stats[0].std == 0


def test_histogram_stats_two_series():
    stats = histogram_stats(_survey_with([{7: 2, 8: 8}, {7: 4, 8: 6}], 10))
    b7 = stats[0]
    assert b7.key == 7 and b7.mean == Fraction(3, 10)
    assert b7.std == pytest.approx(0.1414213562, rel=1e-9)
    assert [b.key for b in stats] == [7, 8]
    assert sum(b.mean for b in stats) == 1


def test_survey_json_roundtrip():
    s = run_survey(SMALL)
    back = LesionSurvey.from_dict(s.to_dict())
    assert back.payload() == s.payload()


def test_cut_set_space_exact():
    info = cut_set_space(9, 10)
    assert info["exact_count"] == 1878392407320
    assert info["exact_count_sci"] == "1.878e+12"
