"""Estimator-style front ends.

``fit`` runs the Airy check and solves for the partition function;
``transform`` reduces operators modulo the fitted ideal and ``predict``
reports ideal membership up to the truncation order.
"""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import airy, wsp
from ._validation import (check_family, check_operators, check_order, check_rank,
                          check_window)
from .io import GeneratorCache


class _IdealMixin:
    def _check_accepted(self):
        check_is_fitted(self, "report_")
        if self.report_.verdict != "airy-at-truncation":
            raise ValueError(f"family was rejected: {self.report_.message}")

    def transform(self, X):
        """Polynomial remainders (ℏ-series) of operators modulo the ideal."""
        self._check_accepted()
        reducer = airy.Reducer(self.normalized_, self.family_.K)
        return [reducer.reduce(P) for P in check_operators(X)]

    def predict(self, X):
        """``True`` where an operator lies in the ideal up to the truncation."""
        return [not r for r in self.transform(X)]


class AiryIdealEstimator(_IdealMixin, BaseEstimator):
    """Check a user-supplied generator family and solve for its partition function.

    Parameters
    ----------
    solve : bool
        Also compute the transvection and the ``F_{g,n}`` table on success.
    """

    def __init__(self, solve=True):
        self.solve = solve

    def fit(self, X, y=None):
        F = check_family(X)
        self.family_ = F
        self.report_ = airy.check_airy(F)
        self.normalized_ = self.transvection_ = self.table_ = None
        if self.report_.verdict == "airy-at-truncation":
            self.normalized_, self.matrices_ = airy.normalize(F)
            if self.solve:
                self.transvection_, _ = airy.extract_transvection(F, self.normalized_)
                self.table_ = airy.solve_partition(F, self.normalized_)
        return self


class WspAiryEstimator(_IdealMixin, BaseEstimator):
    """The dilaton-shifted W(sp_2N) family on a finite window.

    ``fit`` ignores its input; all configuration lives in the parameters.
    """

    def __init__(self, rank=3, order=4, kmax=2, varmax=12, cache_dir=None):
        self.rank = rank
        self.order = order
        self.kmax = kmax
        self.varmax = varmax
        self.cache_dir = cache_dir

    def fit(self, X=None, y=None):
        N = check_rank(self.rank)
        K = check_order(self.order)
        kmax, varmax = check_window(N, self.kmax, self.varmax)
        cfg = wsp.TwistConfig(N, K, kmax, varmax)
        F = wsp.build_family(cfg, GeneratorCache(self.cache_dir))
        res = wsp.verify_wsp_airy(cfg, F)
        self.config_ = cfg
        self.family_ = F
        self.report_ = res.report
        self.normalized_ = res.normalized
        self.matrices_ = res.matrices
        self.transvection_ = res.transvection
        self.zero_mode_terms_ = res.zero_mode_terms
        self.table_ = None
        if res.normalized is not None:
            self.table_ = wsp.partition_wsp(cfg, F, res.normalized)
        return self
