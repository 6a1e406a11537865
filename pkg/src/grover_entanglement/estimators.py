"""scikit-learn compatible wrappers.

``GroverStateGenerator`` maps rows of marked-set indicators to Grover states
and ``EntanglementProfiler`` maps state rows to ``(delta, chi, e_chi)``
features, so the two compose in a :class:`sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .entanglement import RankPolicy, measure_batch
from .statecore import (
    MarkedSet,
    apply_diffusion,
    apply_oracle,
    grover_params,
    make_uniform,
)


def _qubits_for_width(width: int) -> int:
    n = width.bit_length() - 1
    if width < 2 or 1 << n != width:
        raise ValueError(f"expected 2**n columns with n >= 1, got {width}")
    return n


class EntanglementProfiler(TransformerMixin, BaseEstimator):
    """Separable degree, maximum Schmidt number and its log2 for each state row.

    Parameters
    ----------
    rel_tol : float
        Relative singular-value threshold for numerical Schmidt ranks.
    ambiguity_factor : float
        Width of the band around the threshold that flags a rank as ambiguous.
    max_n : int or None
        Qubit cap; ``None`` uses the package default.
    norm_atol : float
        Allowed deviation of each row's squared norm from one.
    """

    def __init__(self, rel_tol=1e-10, ambiguity_factor=32.0, max_n=None, norm_atol=1e-6):
        self.rel_tol = rel_tol
        self.ambiguity_factor = ambiguity_factor
        self.max_n = max_n
        self.norm_atol = norm_atol

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_qubits_ = _qubits_for_width(X.shape[1])
        self.n_features_in_ = X.shape[1]
        self.policy_ = RankPolicy(self.rel_tol, self.ambiguity_factor)
        return self

    def _validated(self, X):
        check_is_fitted(self, "policy_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, estimator was fitted with {self.n_features_in_}"
            )
        norms = np.einsum("ij,ij->i", X, X)
        bad = np.flatnonzero(np.abs(norms - 1.0) > self.norm_atol)
        if bad.size:
            raise ValueError(f"rows {bad.tolist()[:10]} are not normalized states")
        return X / np.sqrt(norms)[:, None]

    def transform(self, X):
        X = self._validated(X)
        delta, chi, _ = measure_batch(X, self.n_qubits_, self.policy_, max_n=self.max_n)
        return np.column_stack([delta, chi, np.log2(chi)]).astype(np.float64)

    def ambiguity(self, X):
        """Boolean flag per row: some rank decision fell inside the ambiguity band."""
        X = self._validated(X)
        return measure_batch(X, self.n_qubits_, self.policy_, max_n=self.max_n)[2]

    def get_feature_names_out(self, input_features=None):
        return np.array(["delta", "chi", "e_chi"], dtype=object)


class GroverStateGenerator(TransformerMixin, BaseEstimator):
    """Grover state for each row of a 0/1 marked-set indicator matrix.

    Parameters
    ----------
    n_iterations : int or None
        Number of oracle calls ``k``; ``None`` uses the optimal count for
        each row's number of solutions.
    stage : {"iteration", "oracle"}
        ``"iteration"`` returns the state after ``k`` full iterations,
        ``"oracle"`` the state right after the ``k``-th oracle call.
    """

    def __init__(self, n_iterations=None, stage="iteration"):
        self.n_iterations = n_iterations
        self.stage = stage

    def fit(self, X, y=None):
        X = check_array(X, dtype=None)
        self.n_qubits_ = _qubits_for_width(X.shape[1])
        self.n_features_in_ = X.shape[1]
        if self.stage not in ("iteration", "oracle"):
            raise ValueError(f"stage must be 'iteration' or 'oracle', got {self.stage!r}")
        return self

    def transform(self, X):
        check_is_fitted(self, "n_qubits_")
        X = check_array(X, dtype=None)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, estimator was fitted with {self.n_features_in_}"
            )
        if not np.isin(X, (0, 1)).all():
            raise ValueError("indicator rows must contain only 0 and 1")
        n = self.n_qubits_
        out = np.empty(X.shape, dtype=np.float64)
        for i, row in enumerate(X.astype(bool)):
            marked = MarkedSet(n, frozenset(np.flatnonzero(row).tolist()))
            k = grover_params(n, marked.M).R if self.n_iterations is None else self.n_iterations
            if self.stage == "oracle" and k < 1:
                raise ValueError("the oracle stage needs at least one oracle call")
            state = make_uniform(n)
            for j in range(k):
                state = apply_oracle(state, marked)
                if self.stage == "oracle" and j == k - 1:
                    break
                state = apply_diffusion(state)
            out[i] = state.amps
        return out
