"""scikit-learn style wrappers over the functional core.

Both classes are stateless transformers in the sklearn sense: ``fit`` only
resolves parameters (and, for the extender, the singular order), so they
drop into pipelines and ``clone`` correctly.

>>> ext = DistributionExtender("euclid_prop_d4", regime="uv", mu2=2.0).fit()
>>> ext.k_
1
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import extend, testfunc
from .errors import InputError

__all__ = ["TestFunctionTransformer", "DistributionExtender"]


class TestFunctionTransformer(TransformerMixin, BaseEstimator):
    """Apply the super-regular test function (or one of its derivatives) elementwise."""

    __test__ = False  # keep pytest from collecting the class

    def __init__(self, mu2=2.0, alpha=0.5, variant=testfunc.NU_INTEGRAL, alpha_limit=False, order=0):
        self.mu2 = mu2
        self.alpha = alpha
        self.variant = variant
        self.alpha_limit = alpha_limit
        self.order = order

    def fit(self, X=None, y=None):
        if not 0 <= int(self.order) <= 4 or int(self.order) != self.order:
            raise InputError(f"order must be an integer in 0..4, got {self.order}")
        partition = testfunc.PartitionParams(h=min(self.mu2 - 1.0, 0.5), variant=self.variant)
        self.params_ = testfunc.SrtfParams(self.mu2, self.alpha, partition, self.alpha_limit)
        self.function_ = testfunc.Srtf(self.params_)
        if X is not None:
            self.n_features_in_ = check_array(X, ensure_all_finite=False).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "function_")
        X = check_array(X, dtype=float)
        if np.any(X < 0):
            raise InputError("test-function arguments must be non-negative")
        if self.order == 0:
            return np.asarray(self.function_(X), dtype=float)
        return np.asarray(self.function_.derivative(X, int(self.order)), dtype=float)


class DistributionExtender(TransformerMixin, BaseEstimator):
    """Extend a singular radial distribution; ``transform`` evaluates T~ at X > 0.

    ``distribution`` is a builtin name or a ``SingularDistribution``.  With
    ``k=None`` the singular order is measured in ``fit``.
    """

    def __init__(self, distribution="inv_x", regime="uv", k=None, mu2=2.0, alpha=0.5, alpha_limit=True):
        self.distribution = distribution
        self.regime = regime
        self.k = k
        self.mu2 = mu2
        self.alpha = alpha
        self.alpha_limit = alpha_limit

    def _source(self):
        if isinstance(self.distribution, extend.SingularDistribution):
            return self.distribution
        return extend.builtin_distribution(self.distribution)

    def fit(self, X=None, y=None):
        T = self._source()
        regime = str(self.regime).lower()
        if regime not in ("ir", "uv", "uv_alt"):
            raise InputError(f"regime must be ir, uv or uv_alt, got {self.regime!r}")
        k = self.k if self.k is not None else extend.scaling_order(T, "ir" if regime == "ir" else "uv")
        if regime == "ir":
            ext = extend.extend_ir(T, k, 1.0 / self.mu2)
        elif regime == "uv":
            s = testfunc.SrtfParams(mu2=self.mu2, alpha=self.alpha, alpha_limit=self.alpha_limit)
            ext = extend.extend_uv(T, k, s)
        else:
            ext = extend.extend_uv_alt(T, k, T.d, self.mu2)
        self.source_ = T
        self.k_ = int(k)
        self.extension_ = ext
        if X is not None:
            self.n_features_in_ = check_array(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "extension_")
        X = check_array(X, dtype=float)
        return np.asarray(self.extension_.evaluate(X), dtype=float).reshape(X.shape)

    def pair(self, phi=None):
        """Pairing of T~ with ``phi`` (the constant 1 by default in the UV regimes)."""
        check_is_fitted(self, "extension_")
        return self.extension_.pair(phi)
