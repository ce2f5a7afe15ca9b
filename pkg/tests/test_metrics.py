import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceptbank import average_precision, evaluate

from _reference import ap_reference


def test_ap_positives_at_ranks_1_and_3():
    # 4 items, positives end up at ranks 1 and 3: AP = (1/1 + 2/3) / 2
    scores = [4.0, 3.0, 2.0, 1.0]
    positives = [True, False, True, False]
    ids = ["a", "b", "c", "d"]
    assert average_precision(scores, positives, ids) == \
        pytest.approx((1.0 + 2.0 / 3.0) / 2.0)


def test_ap_perfect_ranking():
    assert average_precision(
        [3.0, 2.0, 1.0], [True, True, False], ["a", "b", "c"]) == 1.0


def test_ap_no_positives_is_none():
    assert average_precision([1.0, 2.0], [False, False], ["a", "b"]) is None


def test_ap_ties_break_by_id():
    # equal scores: "a" (positive) ranks before "b"
    assert average_precision([1.0, 1.0], [True, False], ["a", "b"]) == 1.0
    assert average_precision([1.0, 1.0], [True, False], ["z", "b"]) == \
        pytest.approx(0.5)


def test_ap_exhaustive_small_cases():
    ids = ["a", "b", "c", "d", "e", "f"]
    for n in range(1, 5):
        for scores in itertools.product((0.0, 1.0, 2.0), repeat=n):
            for labels in itertools.product((False, True), repeat=n):
                got = average_precision(list(scores), list(labels), ids[:n])
                want = ap_reference(list(scores), list(labels), ids[:n])
                assert got == want


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from([0.0, 0.5, 1.0, 2.0]), min_size=n, max_size=n),
    st.lists(st.booleans(), min_size=n, max_size=n))))
def test_ap_matches_reference(case):
    scores, labels = case
    ids = [chr(ord("a") + i) for i in range(len(scores))]
    assert average_precision(scores, labels, ids) == \
        ap_reference(scores, labels, ids)


def single_label_case():
    ids = ["i1", "i2", "i3", "i4"]
    scores = np.array([
        [2.0, 0.0, 0.0],
        [0.0, 2.0, 0.0],
        [0.0, 1.5, 0.5],
        [0.0, 0.0, 2.0],
    ])
    truth = {"i1": ["a"], "i2": ["b"], "i3": ["c"], "i4": ["c"]}
    return ids, scores, truth, ["a", "b", "c"]


def test_single_label_accuracy_and_confusion():
    ids, scores, truth, classes = single_label_case()
    report = evaluate(ids, scores, truth, classes, mode="single")
    assert report.accuracy == pytest.approx(0.75)  # i3 predicted b
    assert report.confusion[2, 1] == 1
    assert report.confusion.sum() == 4
    for j, cls in enumerate(classes):
        n_true = sum(1 for i in ids if truth[i] == [cls])
        assert report.confusion[j].sum() == n_true
    assert report.mean_ap == pytest.approx(float(np.mean(report.per_class_ap)))


def test_multi_label_map_and_exclusions():
    ids = ["i1", "i2", "i3"]
    scores = np.array([
        [2.0, 0.0, 1.0],
        [1.0, 0.0, 2.0],
        [0.0, 0.0, 0.5],
    ])
    truth = {"i1": ["a"], "i2": ["a", "c"], "i3": ["c"]}
    report = evaluate(ids, scores, truth, ["a", "b", "c"], mode="multi")
    assert report.accuracy is None
    assert report.excluded_classes == ["b"]
    assert report.per_class_ap[1] is None
    included = [a for a in report.per_class_ap if a is not None]
    assert report.mean_ap == pytest.approx(float(np.mean(included)), abs=1e-12)


def test_map_is_exact_mean():
    ids, scores, truth, classes = single_label_case()
    report = evaluate(ids, scores, truth, classes, mode="single")
    assert abs(report.mean_ap - float(np.mean(report.per_class_ap))) <= 1e-12


def test_empty_evaluation_rejected():
    with pytest.raises(ValueError):
        evaluate([], np.zeros((0, 2)), {}, ["a", "b"])


def test_missing_truth_rejected():
    with pytest.raises(ValueError, match="i2"):
        evaluate(["i1", "i2"], np.zeros((2, 2)), {"i1": ["a"]}, ["a", "b"])


def test_unknown_label_rejected():
    with pytest.raises(ValueError, match="mystery"):
        evaluate(["i1"], np.zeros((1, 2)), {"i1": ["mystery"]}, ["a", "b"])


def test_report_to_dict_is_json_friendly():
    import json

    ids, scores, truth, classes = single_label_case()
    report = evaluate(ids, scores, truth, classes, mode="single")
    payload = json.dumps(report.to_dict(), sort_keys=True)
    assert "accuracy" in payload
