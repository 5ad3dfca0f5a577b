"""Scikit-learn style estimator wrappers around the functional API.

Both estimators follow the sklearn parameter contract: constructor
arguments are stored verbatim, ``get_params``/``set_params`` come from
``BaseEstimator``, and fitted state lives in trailing-underscore
attributes.
"""

from sklearn.base import BaseEstimator

from .fields import as_scalar_field, threshold
from .selective import (SPEED_BETA_DEFAULT, SPEED_EPS_DEFAULT, DistanceConstraint,
                        euclidean_distance_map, geodesic_distance_map, solve_selective)
from .variational import SolverConfig, run_cvm

__all__ = ["CVMSegmenter", "SelectiveSegmenter"]


class CVMSegmenter(BaseEstimator):
    """Segment a feature map from point annotations.

    Parameters mirror the solver configuration plus the contrast
    strength ``eta`` and a ``jobs`` knob for parallel per-point solves.

    Attributes after ``fit``: ``u_`` (aggregated field), ``per_point_``
    (list of per-point fields), ``reports_`` (list of SolveReport), and
    ``mask_`` (thresholded segmentation).
    """

    def __init__(self, eta=0.6, lam=5.0, iota=1000.0, tau=0.25, max_iters=200,
                 tol=1e-4, grad_reg=1e-4, gamma=0.5, jobs=1):
        self.eta = eta
        self.lam = lam
        self.iota = iota
        self.tau = tau
        self.max_iters = max_iters
        self.tol = tol
        self.grad_reg = grad_reg
        self.gamma = gamma
        self.jobs = jobs

    def _config(self):
        return SolverConfig(lam=self.lam, iota=self.iota, tau=self.tau,
                            max_iters=self.max_iters, tol=self.tol,
                            grad_reg=self.grad_reg, gamma=self.gamma).validate()

    def fit(self, features, annotations):
        """Run the contrast and variational pipeline; returns self."""
        u, per_point, reports = run_cvm(features, annotations, self._config(),
                                        eta=self.eta, jobs=self.jobs)
        self.u_ = u
        self.per_point_ = per_point
        self.reports_ = reports
        self.mask_ = threshold(u, self.gamma)
        return self

    def transform(self, features=None):
        """Return the aggregated relaxation field of the fitted instance."""
        self._check_fitted()
        return self.u_

    def predict(self, features=None):
        """Return the thresholded segmentation mask of the fitted instance."""
        self._check_fitted()
        return self.mask_

    def fit_predict(self, features, annotations):
        return self.fit(features, annotations).predict()

    def _check_fitted(self):
        if not hasattr(self, "u_"):
            raise RuntimeError("estimator is not fitted; call fit first")


class SelectiveSegmenter(BaseEstimator):
    """Distance-constrained segmentation of a scalar image from markers.

    ``kind`` selects the marker-distance map ('euclidean' or
    'geodesic'); ``theta`` weights the constraint (0 disables it).

    Attributes after ``fit``: ``distance_map_``, ``u_``, ``report_``,
    ``mask_``.
    """

    def __init__(self, kind="euclidean", theta=0.0, speed_eps=SPEED_EPS_DEFAULT,
                 speed_beta=SPEED_BETA_DEFAULT, lam=5.0, iota=1000.0, tau=0.25,
                 max_iters=200, tol=1e-4, grad_reg=1e-4, gamma=0.5):
        self.kind = kind
        self.theta = theta
        self.speed_eps = speed_eps
        self.speed_beta = speed_beta
        self.lam = lam
        self.iota = iota
        self.tau = tau
        self.max_iters = max_iters
        self.tol = tol
        self.grad_reg = grad_reg
        self.gamma = gamma

    def _config(self):
        return SolverConfig(lam=self.lam, iota=self.iota, tau=self.tau,
                            max_iters=self.max_iters, tol=self.tol,
                            grad_reg=self.grad_reg, gamma=self.gamma).validate()

    def fit(self, image, markers):
        """Build the distance constraint and solve; returns self."""
        shape = as_scalar_field(image).shape
        if self.kind == "euclidean":
            dmap = euclidean_distance_map(markers, shape)
        else:
            dmap = geodesic_distance_map(image, markers, speed_eps=self.speed_eps,
                                         speed_beta=self.speed_beta)
        constraint = DistanceConstraint(kind=self.kind, map=dmap,
                                        theta=self.theta).validate()
        u, report = solve_selective(image, constraint, self._config())
        self.distance_map_ = dmap
        self.u_ = u
        self.report_ = report
        self.mask_ = threshold(u, self.gamma)
        return self

    def transform(self, image=None):
        self._check_fitted()
        return self.u_

    def predict(self, image=None):
        self._check_fitted()
        return self.mask_

    def fit_predict(self, image, markers):
        return self.fit(image, markers).predict()

    def _check_fitted(self):
        if not hasattr(self, "u_"):
            raise RuntimeError("estimator is not fitted; call fit first")
