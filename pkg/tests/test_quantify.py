import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterfeat.linmodel import LinearModel, TrainConfig, predict, train
from clusterfeat.quantify import (
    PrevalenceVector, classify_and_count, emd, quantify_by_subject, write_quantification_tsv,
)
from clusterfeat.sentiment import DEFAULT_SCALE, FIVE_POINT, OrdinalScale

from oracles import brute_force_transport

ABC = OrdinalScale(("A", "B", "C"))


def constant_model(label, scale=DEFAULT_SCALE):
    bias = np.array([5.0 if c == label else 0.0 for c in scale.classes])
    return LinearModel(scale.classes, {}, np.zeros((len(scale), 0)), bias)


def marker_model(scale):
    """Predicts the class named by feature ``is:<class>``."""
    names = [f"is:{c}" for c in scale.classes]
    return LinearModel(scale.classes, {n: j for j, n in enumerate(names)},
                       10 * np.eye(len(scale)), np.zeros(len(scale)))


@st.composite
def prevalences(draw, size=5):
    w = draw(st.lists(st.floats(0, 10), min_size=size, max_size=size))
    total = sum(w)
    if total == 0:
        w, total = [1.0] * size, float(size)
    p = [v / total for v in w]
    p[-1] = max(0.0, 1.0 - sum(p[:-1]))
    return PrevalenceVector(OrdinalScale(FIVE_POINT[:size]), tuple(p))


class TestPrevalence:
    def test_validation(self):
        with pytest.raises(ValueError):
            PrevalenceVector(ABC, (0.5, 0.5))
        with pytest.raises(ValueError):
            PrevalenceVector(ABC, (0.5, 0.6, -0.1))
        with pytest.raises(ValueError):
            PrevalenceVector(ABC, (0.5, 0.4, 0.0))
        with pytest.raises(ValueError):
            PrevalenceVector.from_labels([], ABC)
        assert PrevalenceVector.from_labels(["A", "C"], ABC)["C"] == 0.5


class TestClassifyAndCount:
    def test_constant_classifier(self):
        p = classify_and_count(constant_model("Neutral"), [{}] * 7)
        assert p.p == (0, 0, 1, 0, 0)

    def test_counting(self):
        items = [{"is:A": 1}, {"is:A": 1}, {"is:B": 1}, {"is:C": 1}]
        assert classify_and_count(marker_model(ABC), items, ABC).p == (0.5, 0.25, 0.25)

    def test_empty(self):
        with pytest.raises(ValueError):
            classify_and_count(marker_model(ABC), [], ABC)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from(["A", "B", "C"]), min_size=1, max_size=40), st.randoms())
    def test_sums_to_one_and_permutation_invariant(self, labels, rnd):
        items = [{f"is:{c}": 1.0} for c in labels]
        a = classify_and_count(marker_model(ABC), items, ABC)
        rnd.shuffle(items)
        b = classify_and_count(marker_model(ABC), items, ABC)
        assert a == b and abs(sum(a.p) - 1) < 1e-9

    def test_probabilistic_variant(self):
        items = [{"is:A": 1}, {"is:B": 1}]
        p = classify_and_count(marker_model(ABC), items, ABC, probabilistic=True)
        assert abs(sum(p.p) - 1) < 1e-12
        assert p.p[0] == pytest.approx(0.5, abs=1e-3) and p.p[2] < 1e-3

    def test_model_class_order_may_differ(self):
        data = [({"x": 1.0}, "C"), ({"x": -1.0}, "A")] * 10 + [({"y": 1.0}, "B")] * 10
        model = train(data, TrainConfig(epochs=20), classes=("C", "A", "B"))
        assert predict(model, {"x": 1.0}) == "C"
        p = classify_and_count(model, [{"x": 1.0}, {"y": 1.0}], ABC)
        assert p.p == (0, 0.5, 0.5)
        q = classify_and_count(model, [{"x": 1.0}], ABC, probabilistic=True)
        assert q["C"] > 0.5


class TestEmd:
    def test_identity_and_extreme(self):
        p = PrevalenceVector(DEFAULT_SCALE, (1, 0, 0, 0, 0))
        q = PrevalenceVector(DEFAULT_SCALE, (0, 0, 0, 0, 1))
        assert emd(p, p) == 0
        assert emd(p, q) == 4
        assert brute_force_transport(p.p, q.p) == 4

    def test_scale_mismatch(self):
        with pytest.raises(ValueError):
            emd(PrevalenceVector(ABC, (1, 0, 0)), PrevalenceVector(OrdinalScale(("x", "y", "z")), (1, 0, 0)))

    @settings(max_examples=200)
    @given(prevalences(), prevalences())
    def test_matches_transport_oracle(self, p, q):
        assert emd(p, q) == pytest.approx(brute_force_transport(p.p, q.p), abs=1e-9)

    @given(prevalences(), prevalences(), prevalences())
    def test_metric_properties(self, p, q, r):
        assert emd(p, q) == pytest.approx(emd(q, p), abs=1e-12)
        assert emd(p, r) <= emd(p, q) + emd(q, r) + 1e-9
        assert 0 <= emd(p, q) <= len(p.p) - 1 + 1e-9
        if emd(p, q) == 0:
            assert np.allclose(p.p, q.p, atol=1e-12)

    @given(prevalences(), prevalences())
    def test_reversal_invariant(self, p, q):
        rev = OrdinalScale(tuple(reversed(p.scale.classes)))
        pr = PrevalenceVector(rev, tuple(reversed(p.p)))
        qr = PrevalenceVector(rev, tuple(reversed(q.p)))
        assert emd(pr, qr) == pytest.approx(emd(p, q), abs=1e-9)


class TestBySubject:
    def test_perfect_single_subject(self):
        model = marker_model(DEFAULT_SCALE)
        items = [({f"is:{c}": 1.0}, c) for c in ["Neutral", "Positive", "Positive"]]
        results, mean = quantify_by_subject(model, {"iphone": items})
        assert mean == 0 and results["iphone"].emd == 0

    def test_mean_of_two(self, tmp_path):
        model = constant_model("Neutral")
        groups = {"a": [({}, "Neutral"), ({}, "Positive")], "b": [({}, "VeryNegative")]}
        results, mean = quantify_by_subject(model, groups)
        assert results["a"].emd == pytest.approx(0.5)
        assert results["b"].emd == pytest.approx(2.0)
        assert mean == pytest.approx(1.25)
        gold = PrevalenceVector.from_labels([y for _, y in groups["a"]])
        assert np.allclose(results["a"].gold.p, gold.p, atol=1e-12)
        write_quantification_tsv(results, tmp_path / "q.tsv")
        rows = [line.split("\t") for line in (tmp_path / "q.tsv").read_text().splitlines()]
        assert [r[0] for r in rows] == ["a", "b"] and all(len(r) == 7 for r in rows)
        assert float(rows[1][6]) == 2.0

    def test_empty_subject(self):
        with pytest.raises(ValueError):
            quantify_by_subject(constant_model("Neutral"), {"a": []})
