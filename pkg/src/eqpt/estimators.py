"""Estimator-object layer over the functional core.

Each estimator consumes preprocessed measurement artifacts in fit(),
exposes the recovered process as `process_matrix_`, and can then
propagate new states. The split mirrors the usual fit/predict contract:
fit ingests data, predict applies the fitted operator to kets, transform
conjugates densities, and score compares against a known reference
process (negative squared error, higher is better).
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import algorithms
from .benchmark import nmse
from .validation import as_complex_matrix, as_ket


class _ProcessEstimatorBase(BaseEstimator):
    """Shared post-fit behavior; subclasses implement fit only."""

    def _finish(self, estimate):
        self.process_matrix_ = estimate.matrix
        self.method_ = estimate.method
        self.diagnostics_ = estimate.diagnostics
        self.dim_ = estimate.matrix.shape[0]
        return self

    def predict(self, X):
        """Propagate kets through the fitted process.

        X: a single ket of length d, or an array of shape (n, d) holding
        one ket per row. Returns the propagated ket(s) in the same shape.
        """
        check_is_fitted(self, "process_matrix_")
        arr = np.asarray(X, dtype=complex)
        if arr.ndim == 1:
            return self.process_matrix_ @ as_ket(arr)
        if arr.ndim != 2 or arr.shape[1] != self.dim_:
            raise ValueError(f"expected kets of length {self.dim_} as rows")
        return arr @ self.process_matrix_.T

    def transform(self, X):
        """Conjugate densities by the fitted process.

        X: one (d, d) matrix or a stack of shape (n, d, d). Returns the
        transformed matrices in the same shape.
        """
        check_is_fitted(self, "process_matrix_")
        arr = np.asarray(X, dtype=complex)
        u = self.process_matrix_
        if arr.ndim == 2:
            as_complex_matrix(arr, "density")
            return u @ arr @ u.conj().T
        if arr.ndim != 3 or arr.shape[1:] != (self.dim_, self.dim_):
            raise ValueError(f"expected densities of shape ({self.dim_}, {self.dim_})")
        return np.einsum("ij,njk,lk->nil", u, arr, u.conj())

    def score(self, u_true, y=None):
        """Negative squared process error against a known reference."""
        check_is_fitted(self, "process_matrix_")
        return -nmse(u_true, self.process_matrix_)


class Eqpt1Estimator(_ProcessEstimatorBase):
    """One-stage estimator; the stage input has d distinct eigenvalues."""

    def fit(self, rho2_pre, phi2_hat):
        return self._finish(algorithms.eqpt1(rho2_pre, phi2_hat))


class TwoStageEstimator(_ProcessEstimatorBase):
    """Two-stage estimator with selectable unitarization mode.

    mode: "none", "unitarize-before-phase", or "unitarize-after-phase".
    """

    def __init__(self, mode=algorithms.MODE_NONE):
        self.mode = mode

    def fit(self, rho2_pre, rho6_pre, phi2_hat, m1, n2):
        return self._finish(
            algorithms.eqpt_two_stage(
                rho2_pre, rho6_pre, phi2_hat, m1, n2, mode=self.mode
            )
        )


class Eqpt2Estimator(TwoStageEstimator):
    def __init__(self):
        super().__init__(mode=algorithms.MODE_NONE)


class Eqpt3Estimator(TwoStageEstimator):
    def __init__(self):
        super().__init__(mode=algorithms.MODE_UNITARIZE_BEFORE_PHASE)


class Eqpt4Estimator(TwoStageEstimator):
    def __init__(self):
        super().__init__(mode=algorithms.MODE_UNITARIZE_AFTER_PHASE)


class Eqpt5Estimator(_ProcessEstimatorBase):
    """Dichotomic multi-stage estimator for d = 2^q, q >= 3."""

    def fit(self, rho_stages, phi2_hat):
        d = np.asarray(phi2_hat).size
        return self._finish(algorithms.eqpt5(rho_stages, phi2_hat, d))


class GeneralInputEstimator(_ProcessEstimatorBase):
    """One-stage estimator driven by a known non-diagonal input density."""

    def fit(self, rho1_known, rho2_pre, phi2_hat):
        return self._finish(
            algorithms.eqpt1_general_input(rho1_known, rho2_pre, phi2_hat)
        )


class MixedProbeEstimator(_ProcessEstimatorBase):
    """One-stage estimator whose phase step uses a mixed known input."""

    def fit(self, rho2_pre, rho5, rho8_pre):
        return self._finish(algorithms.eqpt1_mixed_probe(rho2_pre, rho5, rho8_pre))
