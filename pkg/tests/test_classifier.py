import numpy as np
import pytest

from sparsegenre.classifier import (
    ClassifierConfig,
    Dictionary,
    build_dictionary,
    class_residuals,
    classify,
    measure,
    sparse_code,
)
from sparsegenre.errors import (
    DimensionMismatch,
    EmptyClass,
    InvalidSpec,
    ModelFormatError,
    UnknownLabel,
    ZeroVector,
)
from sparsegenre.features import FeatureConfig, FeatureVector, extract_features
from sparsegenre.model_io import load_model, save_model
from sparsegenre.solvers import MeasurementMatrix, SparseSolution


def random_features(rng, n_classes, per_class, dim=80, sparsity=10):
    feats, labels = [], []
    for c in range(n_classes):
        for j in range(per_class):
            v = np.zeros(dim)
            v[rng.choice(dim, sparsity, replace=False)] = rng.uniform(0.1, 1.0, sparsity)
            feats.append(FeatureVector(v, f"c{c}/{j}"))
            labels.append(f"class{c}")
    return feats, labels


@pytest.fixture(scope="module")
def corpus_dictionary(corpus_clips):
    cfg = FeatureConfig()
    feats = [extract_features(c, cfg) for c, _ in corpus_clips]
    labels = [lab for _, lab in corpus_clips]
    train = [i for i in range(len(feats)) if i % 5]
    test = [i for i in range(len(feats)) if i % 5 == 0]
    d = build_dictionary([feats[i] for i in train], [labels[i] for i in train], feature_cfg=cfg)
    return d, [feats[i] for i in test], [labels[i] for i in test]


class TestBuildDictionary:
    def test_shape(self, rng):
        feats, labels = random_features(rng, 10, 80)
        d = build_dictionary(feats, labels, m=35, seed=1)
        assert d.atoms.shape == (35, 800)
        assert d.class_counts() == [80] * 10
        np.testing.assert_allclose(np.linalg.norm(d.atoms, axis=0), 1.0, atol=1e-12)

    def test_minimal(self):
        feats = [FeatureVector(np.array([1.0, 0, 0]), "a"), FeatureVector(np.array([0, 1.0, 0]), "b")]
        d = build_dictionary(feats, ["x", "y"], m=2, seed=0)
        assert d.atoms.shape == (2, 2)
        assert d.class_offsets == ((0, 1), (1, 2))

    def test_columns_grouped_by_class(self, rng):
        feats, labels = random_features(rng, 3, 4)
        perm = rng.permutation(len(feats))
        d = build_dictionary([feats[i] for i in perm], [labels[i] for i in perm], m=20, seed=0)
        assert np.all(np.diff(d.labels) >= 0)
        for col, cid in enumerate(d.clip_ids):
            assert d.classes[d.labels[col]] == f"class{cid[1]}"

    def test_deterministic(self, rng):
        feats, labels = random_features(rng, 3, 5)
        a = build_dictionary(feats, labels, m=20, seed=4)
        b = build_dictionary(feats, labels, m=20, seed=4)
        np.testing.assert_array_equal(a.atoms, b.atoms)

    def test_empty_class(self, rng):
        feats, labels = random_features(rng, 2, 3)
        with pytest.raises(EmptyClass):
            build_dictionary(feats, labels, m=20, classes=["class0", "class1", "class2"])
        with pytest.raises(EmptyClass):
            build_dictionary([], [], m=20)

    def test_unknown_label(self, rng):
        feats, labels = random_features(rng, 2, 3)
        with pytest.raises(UnknownLabel):
            build_dictionary(feats, labels, m=20, classes=["class0"])

    def test_zero_feature_names_clip(self):
        feats = [FeatureVector(np.zeros(10), "silent.wav"), FeatureVector(np.ones(10), "x")]
        with pytest.raises(ZeroVector, match="silent.wav"):
            build_dictionary(feats, ["a", "b"], m=4)

    def test_dimension_mismatch(self, rng):
        feats, labels = random_features(rng, 2, 3)
        d = build_dictionary(feats, labels, m=20)
        with pytest.raises(DimensionMismatch):
            classify(d, np.ones(81))
        with pytest.raises(DimensionMismatch):
            build_dictionary(feats + [FeatureVector(np.ones(5), "odd")], labels + ["class0"], m=4)

    def test_unordered_labels_rejected(self):
        phi = MeasurementMatrix(np.eye(2, 3), 0)
        with pytest.raises(InvalidSpec):
            Dictionary(np.eye(2), np.array([1, 0]), ("a", "b"), phi)


class TestClassify:
    def test_training_sample_codes_itself(self, rng):
        feats, labels = random_features(rng, 4, 10)
        d = build_dictionary(feats, labels, m=35, seed=2)
        for i in (0, 13, 27, 39):
            res = classify(d, feats[i])
            assert res.predicted == labels[i]
            assert res.residuals[d.classes.index(labels[i])] < 1e-10
            assert res.solution.support.tolist() == [d.clip_ids.index(feats[i].clip_id)]

    def test_k_max_one(self, rng):
        feats, labels = random_features(rng, 3, 6)
        d = build_dictionary(feats, labels, m=20, seed=0)
        sol = sparse_code(d, feats[4], ClassifierConfig(k_max=1))
        assert sol.support.size == 1

    def test_orthonormal_toy(self):
        phi = MeasurementMatrix(np.hstack([np.eye(4), np.zeros((4, 1))]), 0)
        d = Dictionary(np.eye(4), np.array([0, 0, 1, 1]), ("a", "b"), phi)
        res = classify(d, np.array([0.0, 0.0, 3.0, 4.0, 9.0]))
        assert res.predicted == "b"
        np.testing.assert_allclose(res.residuals, [1.0, 0.0], atol=1e-12)
        assert res.margin == pytest.approx(1.0)

    def test_class_residuals_pythagoras(self):
        phi = MeasurementMatrix(np.hstack([np.eye(2), np.zeros((2, 1))]), 0)
        d = Dictionary(np.eye(2), np.array([0, 1]), ("a", "b"), phi)
        y = np.array([0.6, 0.8])
        sol = SparseSolution(np.array([0.6, 0.8]), 0.0, 2)
        np.testing.assert_allclose(class_residuals(d, y, sol), [0.8, 0.6])
        with pytest.raises(DimensionMismatch):
            class_residuals(d, y, SparseSolution(np.zeros(3), 0.0, 0))

    def test_ties_go_to_lowest_index(self):
        phi = MeasurementMatrix(np.hstack([np.eye(2), np.zeros((2, 1))]), 0)
        d = Dictionary(np.eye(2), np.array([0, 1]), ("a", "b"), phi)
        y = np.array([1.0, 1.0]) / np.sqrt(2)
        sol = SparseSolution(y.copy(), 0.0, 2)
        r = class_residuals(d, y, sol)
        assert r[0] == r[1]
        assert int(np.argmin(r)) == 0

    def test_scale_invariant(self, corpus_dictionary):
        d, tests, _ = corpus_dictionary
        for f in tests[:5]:
            a = classify(d, f)
            b = classify(d, FeatureVector(f.values * 7.5, f.clip_id))
            assert a.predicted == b.predicted
            np.testing.assert_allclose(a.residuals, b.residuals, atol=1e-12)

    def test_within_class_permutation(self, corpus_clips):
        cfg = FeatureConfig()
        feats = [extract_features(c, cfg) for c, _ in corpus_clips[::3]]
        labels = [lab for _, lab in corpus_clips[::3]]
        d1 = build_dictionary(feats, labels)
        rev = list(range(len(feats)))[::-1]
        d2 = build_dictionary([feats[i] for i in rev], [labels[i] for i in rev])
        probe = extract_features(corpus_clips[1][0], cfg)
        assert classify(d1, probe).predicted == classify(d2, probe).predicted

    def test_corpus_accuracy(self, corpus_dictionary):
        d, tests, truths = corpus_dictionary
        preds = [classify(d, f).predicted for f in tests]
        assert np.mean([p == t for p, t in zip(preds, truths)]) >= 0.95

    def test_ista_solver(self, corpus_dictionary):
        d, tests, truths = corpus_dictionary
        cfg = ClassifierConfig(solver="ista", lam=0.01)
        preds = [classify(d, f, cfg).predicted for f in tests[:12]]
        assert np.mean([p == t for p, t in zip(preds, truths[:12])]) >= 0.9

    def test_bad_solver(self):
        with pytest.raises(InvalidSpec):
            ClassifierConfig(solver="lasso")

    def test_measure_unit_norm(self, rng):
        phi = MeasurementMatrix(rng.standard_normal((5, 12)), 0)
        assert np.linalg.norm(measure(phi, rng.uniform(size=12))) == pytest.approx(1.0)


class TestModelIO:
    def test_roundtrip(self, tmp_path, corpus_dictionary):
        d, tests, _ = corpus_dictionary
        cfg = ClassifierConfig(k_max=8)
        save_model(tmp_path / "m.srcm", d, cfg)
        d2, cfg2 = load_model(tmp_path / "m.srcm")
        np.testing.assert_array_equal(d2.atoms, d.atoms)
        np.testing.assert_array_equal(d2.phi.entries, d.phi.entries)
        assert d2.classes == d.classes and d2.clip_ids == d.clip_ids
        assert d2.feature_cfg == d.feature_cfg
        assert cfg2.k_max == 8
        for f in tests[:5]:
            np.testing.assert_array_equal(classify(d, f, cfg).residuals, classify(d2, f, cfg2).residuals)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "bad.srcm").write_text("hello\n")
        with pytest.raises(ModelFormatError):
            load_model(tmp_path / "bad.srcm")

    def test_truncated(self, tmp_path, corpus_dictionary):
        d, _, _ = corpus_dictionary
        save_model(tmp_path / "m.srcm", d, ClassifierConfig())
        lines = (tmp_path / "m.srcm").read_text().splitlines()
        (tmp_path / "t.srcm").write_text("\n".join(lines[: len(lines) // 2]) + "\n")
        with pytest.raises(ModelFormatError):
            load_model(tmp_path / "t.srcm")
