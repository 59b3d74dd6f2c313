"""Estimator-style wrappers around maps, rotation numbers and stabilization.

These follow the scikit-learn conventions (constructor stores parameters,
``fit`` returns ``self`` and sets trailing-underscore attributes) so that
maps can be dropped into pipelines and parameter searches.  The underlying
functional API in :mod:`toricstab.tropical`, :mod:`toricstab.rotation` and
:mod:`toricstab.stability` is the primary interface.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import FanError, ZeroVectorError
from .fan import NAMED_FANS, P2_FAN, Fan, fan_validate, parse_fan
from .lattice import IntMatrix
from .rotation import DEFAULT_MAX_PERIOD, exact_rotation, numeric_rotation
from .stability import DEFAULT_BOUND, corrigibility_verdict, monomial_degrees
from .tropical import PLIntegralMap, from_monomial, map_from_json


def check_lattice_points(X, allow_zero: bool = True) -> np.ndarray:
    """Validate an ``(n, 2)`` array of integer vectors, returning an int64 copy."""
    arr = np.asarray(X)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an array of shape (n, 2), got {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ValueError("lattice points must have integer coordinates")
    elif arr.dtype.kind not in "iu" and arr.dtype != object:
        raise ValueError(f"lattice points must be integers, got dtype {arr.dtype}")
    out = arr.astype(np.int64) if arr.dtype != object else arr
    if not allow_zero and np.any(np.all(out == 0, axis=1)):
        raise ZeroVectorError("zero vector has no direction")
    return out


def check_monomial(A) -> IntMatrix:
    """Accept an :class:`IntMatrix`, a 2x2 nested sequence, or four integers."""
    if isinstance(A, IntMatrix):
        return A
    arr = np.asarray(A)
    if arr.size != 4:
        raise ValueError("a monomial matrix needs exactly four integer entries")
    if arr.dtype.kind == "f" and not np.all(arr == np.round(arr)):
        raise ValueError("monomial matrix entries must be integers")
    a, b, c, d = (int(x) for x in arr.reshape(-1))
    return IntMatrix(a, b, c, d)


def check_fan(fan) -> Fan:
    if fan is None:
        return P2_FAN
    if isinstance(fan, Fan):
        return fan
    if isinstance(fan, str):
        return parse_fan(fan)
    try:
        return fan_validate([tuple(r) for r in fan], ordered=True)
    except TypeError as exc:
        raise FanError(f"cannot read a fan from {fan!r}") from exc


def _resolve_map(map_=None, monomial=None) -> PLIntegralMap:
    if (map_ is None) == (monomial is None):
        raise ValueError("give exactly one of a map or a monomial matrix")
    if monomial is not None:
        return from_monomial(check_monomial(monomial))
    if isinstance(map_, PLIntegralMap):
        return map_
    if isinstance(map_, dict):
        return map_from_json(map_)
    raise TypeError(f"unsupported map input {type(map_).__name__}")


class TropicalTransformer(TransformerMixin, BaseEstimator):
    """Apply a tropicalized map to integer vectors.

    ``fit`` ignores ``X`` and builds ``map_`` from the parameters;
    ``transform`` returns the images of the rows of ``X``.
    """

    def __init__(self, monomial=None, map=None, primitive: bool = False):
        self.monomial = monomial
        self.map = map
        self.primitive = primitive

    def fit(self, X=None, y=None):
        self.map_ = _resolve_map(self.map, self.monomial)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "map_")
        pts = check_lattice_points(X, allow_zero=not self.primitive)
        if self.primitive:
            rows = [self.map_.image_ray(tuple(int(c) for c in p)) for p in pts]
        else:
            rows = [self.map_(tuple(int(c) for c in p)) for p in pts]
        return np.array(rows, dtype=np.int64).reshape(-1, 2)


class RotationNumber(BaseEstimator):
    """Exact rotation certificate plus a numeric estimate for one map."""

    def __init__(
        self,
        max_period: int = DEFAULT_MAX_PERIOD,
        iterations: int = 10_000,
        seed=(1, 0),
    ):
        self.max_period = max_period
        self.iterations = iterations
        self.seed = seed

    def fit(self, X, y=None):
        T = X if isinstance(X, PLIntegralMap) else _resolve_map(monomial=X)
        self.certificate_ = exact_rotation(T, self.max_period)
        self.orientation_ = self.certificate_.orientation
        if self.orientation_ == "preserving":
            self.estimate_ = numeric_rotation(T, self.iterations, tuple(self.seed))
        else:
            self.estimate_ = 0.0
        rho = self.certificate_.rho
        self.rotation_number_ = rho if rho is not None else self.estimate_
        return self

    def predict(self, X=None):
        check_is_fitted(self, "certificate_")
        return self.rotation_number_


class ToricStabilizer(BaseEstimator):
    """Find an iterate and a smooth fan on which the map is stable along the poles."""

    def __init__(
        self,
        start_fan=None,
        max_period: int = DEFAULT_MAX_PERIOD,
        bound: int = DEFAULT_BOUND,
    ):
        self.start_fan = start_fan
        self.max_period = max_period
        self.bound = bound

    def fit(self, X, y=None):
        T = X if isinstance(X, PLIntegralMap) else _resolve_map(monomial=X)
        verdict = corrigibility_verdict(T, self.max_period, self.bound, check_fan(self.start_fan))
        self.verdict_ = verdict
        self.result_ = verdict.stabilization
        self.fan_ = verdict.stabilization.fan if verdict.stabilization else None
        self.iterate_used_: Optional[int] = verdict.iterate
        return self

    def transform(self, X=None):
        """The stabilized fan as an ``(n, 2)`` array of rays."""
        check_is_fitted(self, "verdict_")
        if self.fan_ is None:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(self.fan_.rays, dtype=np.int64)


class MonomialDegrees(BaseEstimator):
    """Degree invariants of a monomial map."""

    def fit(self, X, y=None):
        self.report_ = monomial_degrees(check_monomial(X))
        self.lambda1_ = float(self.report_.lambda1)
        self.lambda2_ = self.report_.lambda2
        return self


__all__ = [
    "MonomialDegrees",
    "RotationNumber",
    "ToricStabilizer",
    "TropicalTransformer",
    "check_fan",
    "check_lattice_points",
    "check_monomial",
    "NAMED_FANS",
]
