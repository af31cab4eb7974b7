import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from _helpers import random_density, random_spectra
from polarmono import PolarizationError, edpw, sskf
from polarmono.estimators import (
    CoherencyEstimator,
    MixingTransformer,
    OrderClassifier,
    PolarizationDegree,
    SpectrumTransformer,
)


def test_coherency_estimator():
    est = CoherencyEstimator().fit([(1, 0), (0, 1)])
    np.testing.assert_allclose(est.density_, np.eye(2) / 2)
    assert est.intensity_ == pytest.approx(1.0)
    np.testing.assert_allclose(est.spectrum_, [0.5, 0.5])


def test_spectrum_transformer_shapes(rng):
    M = np.stack([random_density(rng) * 4 for _ in range(10)])
    t = SpectrumTransformer().fit(M)
    a = t.transform(M)
    b = t.transform(M.reshape(10, 9))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a.sum(axis=1), 1)
    assert list(t.get_feature_names_out()) == ["rho1", "rho2", "rho3"]


def test_spectrum_transformer_dimension_guard(rng):
    t = SpectrumTransformer().fit(np.stack([random_density(rng, 3)]))
    with pytest.raises(PolarizationError):
        t.transform(np.stack([random_density(rng, 2)]))
    with pytest.raises(PolarizationError):
        t.fit(np.zeros((2, 5)))


def test_pipeline_matches_library(rng):
    M = np.stack([random_density(rng) for _ in range(20)])
    pipe = make_pipeline(SpectrumTransformer(), PolarizationDegree(["sskf", "edpw"]))
    out = pipe.fit_transform(M)
    spectra = SpectrumTransformer().fit_transform(M)
    np.testing.assert_allclose(out[:, 0], sskf(spectra))
    np.testing.assert_allclose(out[:, 1], edpw(spectra))
    assert list(pipe.get_feature_names_out()) == ["sskf", "edpw"]


def test_degree_rejects_mixed_dimensions():
    with pytest.raises(PolarizationError, match="one dimension"):
        PolarizationDegree(["p2d", "sskf"]).fit([[0.5, 0.5]])


def test_degree_not_fitted():
    with pytest.raises(NotFittedError):
        PolarizationDegree().transform([[1, 0, 0]])


def test_mixing_transformer_scales_edpw(rng):
    x = random_spectra(rng, 100)
    out = MixingTransformer(p=0.3, omega=(0.4, 0.4, 0.2)).fit_transform(x)
    np.testing.assert_allclose(edpw(out), 0.3 * edpw(x), atol=1e-12)


def test_order_classifier():
    clf = OrderClassifier(reference=(0.5, 0.4, 0.1), theory="3d-majorization").fit()
    pred = clf.predict([[1, 0, 0], [1 / 3] * 3, [0.6, 0.2, 0.2], [0.5, 0.4, 0.1]])
    assert list(pred) == ["Greater", "Less", "Incomparable", "Equivalent"]
    assert set(clf.classes_) == {"Less", "Greater", "Equivalent", "Incomparable"}


def test_order_classifier_score():
    clf = OrderClassifier(reference=(0.7, 0.3), theory="2d").fit()
    X = [[0.8, 0.2], [0.6, 0.4]]
    assert clf.score(X, ["Greater", "Less"]) == 1.0


def test_params_and_clone():
    est = PolarizationDegree(monotones=("vn",))
    assert est.get_params() == {"monotones": ("vn",)}
    twin = clone(est.set_params(monotones=("lin",)))
    assert twin.monotones == ("lin",)
    clf = clone(OrderClassifier(theory="3d-convex", tol=1e-6))
    assert clf.get_params()["theory"] == "3d-convex" and clf.tol == 1e-6
