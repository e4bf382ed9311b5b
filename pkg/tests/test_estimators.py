import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from pouext import extend
from pouext.errors import InputError
from pouext.estimators import DistributionExtender, TestFunctionTransformer
from pouext.testfunc import Srtf, SrtfParams


def test_transformer_matches_functional_core():
    X = np.linspace(0.0, 5.0, 12).reshape(-1, 2)
    out = TestFunctionTransformer(mu2=2.0).fit_transform(X)
    np.testing.assert_array_equal(out, Srtf(SrtfParams(mu2=2.0, alpha=0.5))(X))


def test_transformer_derivative_order():
    X = np.array([[0.4], [0.9], [1.7]])
    t = TestFunctionTransformer(mu2=3.0, order=2).fit(X)
    assert t.n_features_in_ == 1
    np.testing.assert_array_equal(t.transform(X), Srtf(SrtfParams(mu2=3.0, alpha=0.5)).derivative(X, 2))


def test_transformer_validation():
    with pytest.raises(InputError):
        TestFunctionTransformer(order=7).fit()
    with pytest.raises(InputError):
        TestFunctionTransformer().fit().transform(np.array([[-1.0]]))
    with pytest.raises(NotFittedError):
        TestFunctionTransformer().transform(np.array([[1.0]]))


def test_clone_keeps_params():
    t = TestFunctionTransformer(mu2=4.0, alpha=0.3, order=1)
    c = clone(t)
    assert c.get_params() == t.get_params()
    e = DistributionExtender("inv_omega", regime="uv_alt", mu2=3.0)
    assert clone(e).get_params()["distribution"] == "inv_omega"


def test_extender_measures_order():
    assert DistributionExtender("euclid_prop_d4", regime="uv", mu2=2.0).fit().k_ == 1
    assert DistributionExtender("inv_x", regime="ir", mu2=4.0).fit().k_ == 0


def test_extender_pairing_closed_form():
    ext = DistributionExtender("euclid_prop_d4", regime="uv", mu2=2.0).fit()
    assert ext.pair() == pytest.approx(2.0 - 1.0 - np.log(2.0), rel=1e-8)


def test_extender_transform_shape():
    X = np.array([[0.5, 1.0], [2.0, 4.0]])
    out = DistributionExtender("euclid_prop_d2", regime="uv_alt", mu2=3.0).fit(X).transform(X)
    np.testing.assert_allclose(out, 1 / (X + 1) - 1 / (X + 3), atol=1e-10)


def test_extender_accepts_distribution_object():
    T = extend.builtin_distribution("inv_x2")
    assert DistributionExtender(T, regime="ir", mu2=4.0).fit().k_ == 1


def test_extender_rejects_regime():
    with pytest.raises(InputError):
        DistributionExtender(regime="sideways").fit()


def test_pipeline():
    X = np.array([[0.3], [0.8], [1.2]])
    pipe = make_pipeline(TestFunctionTransformer(mu2=2.0), TestFunctionTransformer(mu2=2.0, order=0))
    inner = Srtf(SrtfParams(mu2=2.0, alpha=0.5))
    np.testing.assert_array_equal(pipe.fit_transform(X), inner(inner(X)))
