import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavediag.diagnose import (
    Decision,
    VerdictRule,
    metrics,
    round_decision,
    round_decisions,
    window_verdict,
)
from wavediag.signal import ClassLabel


@pytest.mark.parametrize("f, code", [(0.0022, 0), (1.0047, 1), (1.9998, 2), (6.49, 6), (-0.49, 0), (0.5, 1), (2.5, 3)])
def test_round_decision_values(f, code):
    assert round_decision(f, 7).code == code


@pytest.mark.parametrize("f", [7.2, 6.5, -0.5, -3.0])
def test_round_decision_unknown(f):
    d = round_decision(f, 7)
    assert d.is_unknown and d.name == "Unknown" and d.raw == f


def test_round_decision_rejects_non_finite():
    with pytest.raises(ValueError):
        round_decision(float("nan"), 7)


@given(st.integers(0, 6), st.floats(-0.5 + 1e-9, 0.5 - 1e-9))
def test_round_window_invariant(y, eps):
    assert round_decision(y + eps, 7).code == y


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=30))
def test_vectorised_rounding_agrees(values):
    got = round_decisions(np.array(values), 7)
    want = [(-1 if round_decision(v, 7).code is None else round_decision(v, 7).code) for v in values]
    assert got.tolist() == want


def D(*codes):
    return [Decision(c, float(c) if c is not None else 99.0) for c in codes]


def test_fig10_patterns():
    v = window_verdict(D(*[0] * 14, *[1] * 6))
    assert v.final == ClassLabel.S1 and v.rule is VerdictRule.TrailingRun
    assert v.counts["Normal"] == 14 and v.counts["S1"] == 6
    v = window_verdict(D(*[0] * 15, *[3] * 5))
    assert v.final == ClassLabel.S3 and v.rule is VerdictRule.TrailingRun
    v = window_verdict(D(*[0] * 20))
    assert v.final == ClassLabel.Normal and v.rule is VerdictRule.Majority


def test_short_trailing_run_falls_back_to_majority():
    v = window_verdict(D(*[0] * 18, 2, 2))
    assert v.final == 0 and v.rule is VerdictRule.Majority
    v = window_verdict(D(*[4] * 10, *[0] * 9, 1))
    assert v.final == 4 and v.rule is VerdictRule.Majority


def test_majority_tie_goes_to_lower_code():
    v = window_verdict(D(5, 5, 2, 2, 0), run_min=5)
    assert v.final == 2


def test_unknowns_are_excluded_and_all_unknown_is_normal():
    v = window_verdict(D(None, None, 3, None), run_min=3)
    assert v.final == 3 and v.counts["Unknown"] == 3
    v = window_verdict(D(*[None] * 20))
    assert v.final == 0 and v.rule is VerdictRule.Majority and v.counts["Unknown"] == 20


def test_window_verdict_rejects_empty():
    with pytest.raises(ValueError):
        window_verdict([])


@given(st.lists(st.one_of(st.none(), st.integers(0, 6)), min_size=1, max_size=25), st.integers(1, 5))
def test_verdict_counts_sum_and_depend_only_on_kinds(codes, run_min):
    a = window_verdict([Decision(c, 0.1) for c in codes], run_min)
    b = window_verdict([Decision(c, -42.0) for c in codes], run_min)
    assert sum(a.counts.values()) == len(codes)
    assert (a.final, a.rule, a.counts) == (b.final, b.rule, b.counts)


@given(st.lists(st.one_of(st.none(), st.integers(0, 6)), min_size=0, max_size=20),
       st.integers(1, 6), st.integers(3, 10), st.integers(1, 10))
def test_trailing_run_verdicts_are_permanent(prefix, fault, run, extra):
    codes = prefix + [fault] * run
    v = window_verdict(D(*codes), 3)
    assert v.rule is VerdictRule.TrailingRun and v.final == fault
    w = window_verdict(D(*codes, *[fault] * extra), 3)
    assert w.rule is VerdictRule.TrailingRun and w.final == fault


def test_verdict_json_fields():
    obj = window_verdict(D(*[0] * 14, *[1] * 6)).to_json_obj(3)
    assert obj["window_index"] == 3 and obj["final"] == "S1" and obj["rule"] == "TrailingRun"
    assert len(obj["decisions"]) == 20 and obj["counts"]["S1"] == 6


def test_metrics_examples():
    r = metrics([1, 1], [1, 0], 7)
    assert r.precision[1] == 0.5 and r.recall[1] == 1.0 and r.accuracy == 0.5
    truth = np.arange(7).repeat(3)
    r = metrics(truth, truth, 7)
    assert np.all(r.precision == 1) and np.all(r.recall == 1) and r.accuracy == 1
    with pytest.raises(ValueError):
        metrics([1], [1, 2], 7)


def tally_oracle(pred, truth, k):
    conf = [[0] * k for _ in range(k)]
    for p, t in zip(pred, truth):
        if p >= 0:
            conf[t][p] += 1
    prec, rec = [], []
    for c in range(k):
        col = sum(conf[t][c] for t in range(k))
        row = sum(1 for t in truth if t == c)
        prec.append(conf[c][c] / col if col else 0.0)
        rec.append(conf[c][c] / row if row else 0.0)
    acc = sum(conf[c][c] for c in range(k)) / len(truth)
    return conf, prec, rec, acc


def test_metrics_match_tally_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(1, 200))
        truth = rng.integers(0, 7, n)
        pred = np.where(rng.random(n) < 0.6, truth, rng.integers(-1, 7, n))
        r = metrics(pred, truth, 7)
        conf, prec, rec, acc = tally_oracle(pred.tolist(), truth.tolist(), 7)
        assert r.confusion.tolist() == conf
        assert r.precision.tolist() == prec
        assert r.recall.tolist() == rec
        assert r.accuracy == acc
        assert r.total == n == r.confusion.sum(axis=1).sum() + r.unknown.sum()
        micro_recall = np.trace(r.confusion) / (r.confusion.sum() + r.unknown.sum())
        assert micro_recall == pytest.approx(r.accuracy, abs=1e-15)
        assert "accuracy" in r.to_text()
