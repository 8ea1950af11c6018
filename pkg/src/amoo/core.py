"""Objective oracles, objective sets, weight vectors, and weighted evaluation.

An objective set bundles m scalar objectives over a shared parameter space
R^n; a weight vector scalarizes them into a single function
f_w(x) = sum_i w_i f_i(x).  Everything here is immutable after construction
and deterministic, so these objects are safe to share across threads.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

Array = np.ndarray

# Weight constraint domains.
ORTHANT = "nonnegative-orthant"
SIMPLEX = "simplex"
FLOORED_SIMPLEX = "floored-simplex"

_SUM_TOL = 1e-9


class UnsupportedQueryError(RuntimeError):
    """Asked an oracle or optimum record for information it does not carry."""


class NumericError(RuntimeError):
    """Numeric failure (non-convergence, NaN/Inf); carries the best estimate.

    ``payload`` holds whatever partial result was available at the point of
    failure (e.g. the best eigenpair estimate or a partial run trace).
    """

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


def as_vector(x, dim: int | None = None, name: str = "x") -> Array:
    """Coerce to a 1-D float64 array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def _frozen(arr: Array) -> Array:
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ObjectiveOracle:
    """A single scalar objective with first-order (and optional second-order) access.

    ``value`` and ``gradient`` are required; ``hessian`` and ``diag_hessian``
    are optional callables returning the full symmetric Hessian and its
    diagonal.  ``optimal_value`` is the objective's own minimum value when
    known (consumed by gap-based weight optimizers).  All callables must be
    pure functions of x.
    """

    dim: int
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array] | None = None
    diag_hessian: Callable[[Array], Array] | None = None
    optimal_value: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"oracle dim must be positive, got {self.dim}")

    @property
    def has_hessian(self) -> bool:
        return self.hessian is not None

    @property
    def has_diag_hessian(self) -> bool:
        return self.diag_hessian is not None

    def value_at(self, x) -> float:
        return float(self.value(as_vector(x, self.dim)))

    def gradient_at(self, x) -> Array:
        g = np.asarray(self.gradient(as_vector(x, self.dim)), dtype=np.float64)
        return g.reshape(self.dim)

    def hessian_at(self, x) -> Array:
        if self.hessian is None:
            raise UnsupportedQueryError(f"oracle {self.name!r} has no Hessian")
        H = np.asarray(self.hessian(as_vector(x, self.dim)), dtype=np.float64)
        return H.reshape(self.dim, self.dim)

    def diag_hessian_at(self, x) -> Array:
        if self.diag_hessian is not None:
            d = self.diag_hessian(as_vector(x, self.dim))
            return np.asarray(d, dtype=np.float64).reshape(self.dim)
        if self.hessian is not None:
            return np.diag(self.hessian_at(x)).copy()
        raise UnsupportedQueryError(
            f"oracle {self.name!r} has neither diag_hessian nor hessian"
        )


@dataclass(frozen=True)
class ObjectiveSet:
    """m objectives sharing one parameter space."""

    objectives: tuple[ObjectiveOracle, ...]

    def __post_init__(self):
        if len(self.objectives) < 1:
            raise ValueError("an objective set needs at least one objective")
        object.__setattr__(self, "objectives", tuple(self.objectives))
        dims = {o.dim for o in self.objectives}
        if len(dims) != 1:
            raise ValueError(f"objectives disagree on dim: {sorted(dims)}")

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def dim(self) -> int:
        return self.objectives[0].dim

    def values(self, x) -> Array:
        x = as_vector(x, self.dim)
        return np.array([o.value(x) for o in self.objectives], dtype=np.float64)

    def gradients(self, x) -> Array:
        """Stacked gradients, shape (m, n)."""
        x = as_vector(x, self.dim)
        return np.stack([o.gradient_at(x) for o in self.objectives])

    def hessians(self, x) -> list[Array]:
        x = as_vector(x, self.dim)
        return [o.hessian_at(x) for o in self.objectives]

    def optimal_values(self) -> Array:
        vals = [o.optimal_value for o in self.objectives]
        if any(v is None for v in vals):
            raise UnsupportedQueryError("not every objective carries an optimal value")
        return np.array(vals, dtype=np.float64)


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative objective weights, optionally confined to a (floored) simplex.

    Simplex-constrained entries are renormalized once when the sum drifts
    beyond 1e-9 of 1; a second violation is an error.
    """

    entries: Array
    constraint: str = ORTHANT
    w_min: float = 0.0

    def __post_init__(self):
        w = as_vector(self.entries, name="weights")
        if self.constraint not in (ORTHANT, SIMPLEX, FLOORED_SIMPLEX):
            raise ValueError(f"unknown weight constraint {self.constraint!r}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if self.constraint == ORTHANT:
            if np.any(w < 0):
                raise ValueError(f"orthant weights must be nonnegative, got {w}")
        else:
            floor = self.w_min if self.constraint == FLOORED_SIMPLEX else 0.0
            if floor < 0:
                raise ValueError("w_min must be nonnegative")
            if len(w) * floor > 1.0 + _SUM_TOL:
                raise ValueError(
                    f"floored simplex infeasible: m*w_min = {len(w) * floor} > 1"
                )
            if abs(w.sum() - 1.0) > _SUM_TOL:
                w = w / w.sum()
            if abs(w.sum() - 1.0) > _SUM_TOL:
                raise ValueError(f"weights do not sum to 1: sum = {w.sum()!r}")
            if np.any(w < floor - _SUM_TOL):
                raise ValueError(
                    f"weights violate the floor {floor}: min entry {w.min()!r}"
                )
        object.__setattr__(self, "entries", _frozen(w))

    @property
    def m(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self) -> Array:
        return np.array(self.entries)


@dataclass(frozen=True)
class OptimalInfo:
    """What is known about the shared optimum of an objective set.

    ``alignment_eps`` is 0 for exactly aligned instances and otherwise the
    smallest e such that some point is within e objective gap of every
    objective's own minimum.
    """

    x_star: Array | None = None
    f_star: Array | None = None
    alignment_eps: float = 0.0

    def __post_init__(self):
        if self.x_star is not None:
            object.__setattr__(self, "x_star", _frozen(as_vector(self.x_star)))
        if self.f_star is not None:
            object.__setattr__(self, "f_star", _frozen(as_vector(self.f_star)))
        if self.alignment_eps < 0:
            raise ValueError("alignment_eps must be nonnegative")


def _check_pair(objectives: ObjectiveSet, w: WeightVector, x) -> tuple[Array, Array]:
    if len(w) != objectives.m:
        raise ValueError(
            f"weight vector has {len(w)} entries for {objectives.m} objectives"
        )
    return as_vector(x, objectives.dim), w.as_array()


def weighted_value(objectives: ObjectiveSet, w: WeightVector, x) -> float:
    """Scalarized objective sum_i w_i f_i(x); linear in w."""
    x, wa = _check_pair(objectives, w, x)
    return float(wa @ objectives.values(x))


def weighted_gradient(objectives: ObjectiveSet, w: WeightVector, x) -> Array:
    """Gradient of the scalarized objective, sum_i w_i grad f_i(x)."""
    x, wa = _check_pair(objectives, w, x)
    return wa @ objectives.gradients(x)


def residual(x, opt: OptimalInfo) -> float:
    """Euclidean distance from x to the recorded optimum."""
    if opt.x_star is None:
        raise UnsupportedQueryError("optimum location is not recorded")
    x = as_vector(x, len(opt.x_star))
    return float(np.linalg.norm(x - opt.x_star))
