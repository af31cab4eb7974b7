"""scikit-learn compatible wrappers around the polarization toolkit.

These let spectra and monotones sit inside a :class:`sklearn.pipeline.Pipeline`::

    make_pipeline(SpectrumTransformer(), PolarizationDegree(["sskf", "edpw"]))
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import DEFAULT_TOL, PolarizationError, check_dim, check_spectra
from .channels import MixingChannel
from .monotones import get_monotone
from .orders import Relation, Theory, compare
from .polmat import canonical_state, from_field_samples, normalize

__all__ = [
    "CoherencyEstimator",
    "SpectrumTransformer",
    "PolarizationDegree",
    "MixingTransformer",
    "OrderClassifier",
]


def _as_matrix_stack(X):
    X = np.asarray(X, dtype=complex)
    if X.ndim == 2:
        d = int(round(np.sqrt(X.shape[1])))
        if d * d != X.shape[1]:
            raise PolarizationError(f"cannot reshape {X.shape[1]} features into a square matrix")
        X = X.reshape(-1, d, d)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise PolarizationError(f"expected matrices of shape (n, d, d), got {X.shape}")
    check_dim(X.shape[1])
    return X


def _spectra(X, dim=None):
    X = check_array(X, dtype=float)
    return check_spectra(X, dim=dim)


class CoherencyEstimator(BaseEstimator):
    """Estimate the coherency matrix from field realizations.

    Parameters
    ----------
    tol : float, default=1e-9
        Validation tolerance for the estimated matrix.

    Attributes
    ----------
    coherency_ : PolarizationMatrix
    intensity_ : float
    density_ : ndarray of shape (d, d)
        Unit-trace matrix.
    spectrum_ : ndarray of shape (d,)
        Sorted eigenvalues of ``density_``.
    """

    def __init__(self, tol=DEFAULT_TOL):
        self.tol = tol

    def fit(self, X, y=None):
        self.coherency_ = from_field_samples(np.asarray(X, dtype=complex), tol=self.tol)
        self.n_features_in_ = self.coherency_.dim
        self.intensity_ = self.coherency_.intensity
        self.density_ = normalize(self.coherency_, tol=self.tol)
        self.spectrum_ = np.array(canonical_state(self.density_, tol=self.tol).spectrum)
        return self


class SpectrumTransformer(TransformerMixin, BaseEstimator):
    """Map polarization matrices to their sorted (canonical) spectra.

    ``X`` is a stack ``(n, d, d)`` or its flattened form ``(n, d * d)``.
    With ``normalize=True`` every matrix is first divided by its trace.
    """

    def __init__(self, normalize=True, tol=DEFAULT_TOL):
        self.normalize = normalize
        self.tol = tol

    def fit(self, X, y=None):
        M = _as_matrix_stack(X)
        self.dim_ = M.shape[1]
        self.n_features_in_ = self.dim_ * self.dim_
        return self

    def transform(self, X):
        check_is_fitted(self, "dim_")
        M = _as_matrix_stack(X)
        if M.shape[1] != self.dim_:
            raise PolarizationError(f"fitted for d={self.dim_}, got d={M.shape[1]}")
        out = np.empty((M.shape[0], self.dim_))
        for n, m in enumerate(M):
            rho = normalize(m, tol=self.tol) if self.normalize else m
            out[n] = canonical_state(rho, tol=self.tol).spectrum
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "dim_")
        return np.array([f"rho{i}" for i in range(1, self.dim_ + 1)], dtype=object)


class PolarizationDegree(TransformerMixin, BaseEstimator):
    """Evaluate polarization monotones on sorted spectra.

    Parameters
    ----------
    monotones : sequence of str, default=("sskf", "vn", "lin", "edpw")
        Monotone identifiers, see :data:`polarmono.monotones.MONOTONES`.
    """

    def __init__(self, monotones=("sskf", "vn", "lin", "edpw")):
        self.monotones = monotones

    def fit(self, X, y=None):
        names = [self.monotones] if isinstance(self.monotones, str) else list(self.monotones)
        self.monotones_ = [get_monotone(m) for m in names]
        dims = {m.theory.dim for m in self.monotones_}
        if len(dims) != 1:
            raise PolarizationError("all monotones must share one dimension")
        self.dim_ = dims.pop()
        _spectra(X, self.dim_)
        self.n_features_in_ = self.dim_
        return self

    def transform(self, X):
        check_is_fitted(self, "monotones_")
        x = _spectra(X, self.dim_)
        return np.column_stack([np.atleast_1d(m(x)) for m in self.monotones_])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "monotones_")
        return np.array([m.name for m in self.monotones_], dtype=object)


class MixingTransformer(TransformerMixin, BaseEstimator):
    """Apply the mixing channel ``p * rho + (1 - p) * omega`` to 3D spectra."""

    def __init__(self, p=0.5, omega=(0.5, 0.5, 0.0)):
        self.p = p
        self.omega = omega

    def fit(self, X, y=None):
        self.channel_ = MixingChannel(self.p, self.omega)
        _spectra(X, 3)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "channel_")
        x = _spectra(X, 3)
        return self.channel_.p * x + (1 - self.channel_.p) * self.channel_.omega.spectrum


class OrderClassifier(ClassifierMixin, BaseEstimator):
    """Label states by their order relation to a reference state.

    ``predict`` returns ``"Less"`` for states below the reference (less
    polarized), ``"Greater"`` above it, and ``"Equivalent"`` or
    ``"Incomparable"`` otherwise.
    """

    def __init__(self, reference=(0.5, 0.4, 0.1), theory="3d-majorization", tol=DEFAULT_TOL):
        self.reference = reference
        self.theory = theory
        self.tol = tol

    def fit(self, X=None, y=None):
        self.theory_ = Theory.parse(self.theory)
        ref = np.asarray(getattr(self.reference, "spectrum", self.reference), dtype=float)
        self.reference_ = check_spectra(-np.sort(-ref), dim=self.theory_.dim)
        self.classes_ = np.array([r.value for r in Relation], dtype=object)
        self.n_features_in_ = self.theory_.dim
        if X is not None:
            _spectra(X, self.theory_.dim)
        return self

    def predict(self, X):
        check_is_fitted(self, "reference_")
        x = _spectra(X, self.theory_.dim)
        return np.array(
            [compare(row, self.reference_, self.theory_, self.tol).relation.value for row in x],
            dtype=object,
        )
