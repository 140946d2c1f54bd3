"""Loss functions for probabilistic predictions over a finite outcome space.

The catalog covers logarithmic, Brier, randomized and hard 0-1 loss, their
matrix-valued generalizations, and a skewed logarithmic family.  Any loss may
be wrapped in an affine transformation ``a * L + b_x`` (payoff rescaling, as
in repeated betting with outcome-dependent odds), which changes the reported
numbers but not which predictions are optimal.

Every kind comes with a closed-form generalized entropy (the minimal expected
loss achievable against a known distribution) and an optimal-response rule.
``entropy_inner_min`` re-derives the entropy by direct numerical minimization
and is used by the test suite as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._simplex import refine_extremum, simplex_grid

LOGARITHMIC = "logarithmic"
BRIER = "brier"
RANDOMIZED01 = "randomized01"
HARD01 = "hard01"
MATRIX_HARD = "matrix_hard"
MATRIX_RANDOMIZED = "matrix_randomized"
SKEWED_LOG = "skewed_log"

KINDS = (
    LOGARITHMIC,
    BRIER,
    RANDOMIZED01,
    HARD01,
    MATRIX_HARD,
    MATRIX_RANDOMIZED,
    SKEWED_LOG,
)

_PROPER_KINDS = frozenset({LOGARITHMIC, BRIER, SKEWED_LOG})
_LINEAR_ENTROPY_KINDS = frozenset({RANDOMIZED01, HARD01, MATRIX_HARD, MATRIX_RANDOMIZED})
_HARD_KINDS = frozenset({HARD01, MATRIX_HARD})

# Predictions are treated as deterministic once the top probability is this
# close to 1; hard losses are finite only on such predictions.
_POINT_MASS_TOL = 1e-9


class NonPositiveScale(ValueError):
    """Affine transformation with scale a <= 0."""


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LossSpec:
    """A loss function: a kind plus kind-specific parameters.

    ``matrix`` is the nonnegative square penalty matrix of the matrix kinds
    (entry [x, x'] is the loss when x obtains and x' is predicted);
    ``weights`` is the nonnegative per-outcome weight vector of skewed_log;
    ``affine`` is an optional (scale, offsets) wrapper applied last.
    """

    kind: str
    matrix: np.ndarray | None = None
    weights: np.ndarray | None = None
    affine: tuple[float, np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind in (MATRIX_HARD, MATRIX_RANDOMIZED):
            if self.matrix is None:
                raise ValueError(f"{self.kind} requires a matrix")
            m = _readonly(self.matrix)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("loss matrix must be square")
            if np.any(m < 0) or not np.all(np.isfinite(m)):
                raise ValueError("loss matrix entries must be finite and >= 0")
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} does not take a matrix")
        if self.kind == SKEWED_LOG:
            if self.weights is None:
                raise ValueError("skewed_log requires a weight vector")
            w = _readonly(self.weights)
            if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("skewed_log weights must be finite and >= 0")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError(f"{self.kind} does not take weights")
        if self.affine is not None:
            a, b = self.affine
            a = float(a)
            if not a > 0:
                raise NonPositiveScale(f"affine scale must be > 0, got {a}")
            b = _readonly(b)
            if b.ndim != 1 or not np.all(np.isfinite(b)):
                raise ValueError("affine offsets must be a finite vector")
            object.__setattr__(self, "affine", (a, b))

    @property
    def n_params(self) -> int | None:
        """Outcome-space size implied by the parameters, if any."""
        if self.matrix is not None:
            return self.matrix.shape[0]
        if self.weights is not None:
            return len(self.weights)
        if self.affine is not None:
            return len(self.affine[1])
        return None


def logarithmic() -> LossSpec:
    return LossSpec(LOGARITHMIC)


def brier() -> LossSpec:
    return LossSpec(BRIER)


def randomized01() -> LossSpec:
    return LossSpec(RANDOMIZED01)


def hard01() -> LossSpec:
    return LossSpec(HARD01)


def matrix_loss(matrix, hard: bool = False) -> LossSpec:
    return LossSpec(MATRIX_HARD if hard else MATRIX_RANDOMIZED, matrix=matrix)


def skewed_log(weights) -> LossSpec:
    return LossSpec(SKEWED_LOG, weights=weights)


def affine_transform(spec: LossSpec, a: float, b) -> LossSpec:
    """Wrap ``spec`` in L' = a*L + b_x, composing with any existing wrapper."""
    a = float(a)
    if not a > 0:
        raise NonPositiveScale(f"affine scale must be > 0, got {a}")
    b = np.asarray(b, dtype=float)
    if spec.affine is not None:
        a0, b0 = spec.affine
        a, b = a * a0, a * b0 + b
    return LossSpec(spec.kind, matrix=spec.matrix, weights=spec.weights, affine=(a, b))


def affine_params(spec: LossSpec) -> tuple[float, np.ndarray | None]:
    if spec.affine is None:
        return 1.0, None
    return spec.affine


def is_proper(spec: LossSpec) -> bool:
    """True for losses whose optimal response to P is P itself."""
    return spec.kind in _PROPER_KINDS


def is_linear_entropy(spec: LossSpec) -> bool:
    """True when the entropy is piecewise linear (0-1 and matrix kinds)."""
    return spec.kind in _LINEAR_ENTROPY_KINDS


def is_hard(spec: LossSpec) -> bool:
    return spec.kind in _HARD_KINDS


def is_local(spec: LossSpec) -> bool:
    """True when L(x, Q) depends on Q only through Q(x)."""
    return spec.kind == LOGARITHMIC


def effective_response_matrix(spec: LossSpec, n: int) -> np.ndarray:
    """Penalty matrix of a linear-entropy loss with any affine wrapper folded in.

    Entry [x, x'] is the loss when x obtains and the pure response x' is
    played; the randomized variants are expectations over its columns.
    """
    if not is_linear_entropy(spec):
        raise ValueError(f"{spec.kind} has no pure-response matrix")
    if spec.matrix is not None:
        base = np.array(spec.matrix, dtype=float)
    else:
        base = 1.0 - np.eye(n)
    a, b = affine_params(spec)
    if b is not None:
        base = a * base + b[:, None]
    else:
        base = a * base
    return base


def _point_response(Q: np.ndarray) -> int | None:
    """Index of the outcome Q is (numerically) concentrated on, else None."""
    i = int(np.argmax(Q))
    if Q[i] >= 1.0 - _POINT_MASS_TOL:
        return i
    return None


def loss(spec: LossSpec, x: int, Q) -> float:
    """Loss of prediction Q when outcome x obtains.  May be +inf."""
    Q = np.asarray(Q, dtype=float)
    kind = spec.kind
    if kind == LOGARITHMIC:
        base = -np.log(Q[x]) if Q[x] > 0 else np.inf
    elif kind == BRIER:
        base = 1.0 - 2.0 * Q[x] + float(np.dot(Q, Q))
    elif kind == RANDOMIZED01:
        base = 1.0 - Q[x]
    elif kind in (HARD01, MATRIX_HARD):
        i = _point_response(Q)
        if i is None:
            base = np.inf
        elif kind == HARD01:
            base = 0.0 if i == x else 1.0
        else:
            base = float(spec.matrix[x, i])
    elif kind == MATRIX_RANDOMIZED:
        base = float(Q @ spec.matrix[x])
    elif kind == SKEWED_LOG:
        c = spec.weights
        mixed = float(c @ Q)
        if c[x] == 0.0:
            base = mixed
        elif Q[x] > 0:
            base = -c[x] * (1.0 + np.log(Q[x])) + mixed
        else:
            base = np.inf
    else:  # pragma: no cover
        raise ValueError(kind)
    a, b = affine_params(spec)
    if b is None:
        return float(base) if np.isfinite(base) else base
    return a * base + b[x] if np.isfinite(base) else np.inf


def entropy(spec: LossSpec, P) -> float:
    """Generalized entropy of P: the least expected loss against P."""
    P = np.asarray(P, dtype=float)
    kind = spec.kind
    if kind == LOGARITHMIC:
        pos = P > 0
        base = -float(np.sum(P[pos] * np.log(P[pos])))
    elif kind == BRIER:
        base = 1.0 - float(np.dot(P, P))
    elif kind in (RANDOMIZED01, HARD01):
        base = 1.0 - float(np.max(P))
    elif kind in (MATRIX_HARD, MATRIX_RANDOMIZED):
        base = float(np.min(P @ spec.matrix))
    elif kind == SKEWED_LOG:
        c = spec.weights
        pos = P > 0
        base = -float(np.sum(c[pos] * P[pos] * np.log(P[pos])))
    else:  # pragma: no cover
        raise ValueError(kind)
    a, b = affine_params(spec)
    if b is None:
        return base
    return a * base + float(b @ P)


def best_response(spec: LossSpec, P) -> np.ndarray:
    """A prediction attaining the entropy of P (ties: lowest outcome index)."""
    P = np.asarray(P, dtype=float)
    kind = spec.kind
    if kind in _PROPER_KINDS:
        return P.copy()
    out = np.zeros_like(P)
    if kind in (RANDOMIZED01, HARD01):
        out[int(np.argmax(P))] = 1.0
    else:
        out[int(np.argmin(P @ spec.matrix))] = 1.0
    return out


def is_symmetric_between(spec: LossSpec, x1: int, x2: int) -> bool:
    """Whether swapping outcomes x1 and x2 leaves the loss unchanged."""
    if x1 == x2:
        return True
    kind = spec.kind
    if kind in (MATRIX_HARD, MATRIX_RANDOMIZED):
        A = spec.matrix
        others = [i for i in range(A.shape[0]) if i not in (x1, x2)]
        sym = (
            A[x1, x1] == A[x2, x2]
            and A[x1, x2] == A[x2, x1]
            and all(A[i, x1] == A[i, x2] for i in others)
            and all(A[x1, i] == A[x2, i] for i in others)
        )
    elif kind == SKEWED_LOG:
        sym = spec.weights[x1] == spec.weights[x2]
    else:
        sym = True
    if sym and spec.affine is not None:
        _, b = spec.affine
        sym = b[x1] == b[x2]
    return bool(sym)


def _loss_rows(spec: LossSpec, x: int, rows: np.ndarray) -> np.ndarray:
    """Vectorized loss for fixed outcome x over prediction rows (n, |X|)."""
    kind = spec.kind
    if kind == LOGARITHMIC:
        with np.errstate(divide="ignore"):
            base = -np.log(rows[:, x])
    elif kind == BRIER:
        base = 1.0 - 2.0 * rows[:, x] + np.sum(rows * rows, axis=1)
    elif kind == RANDOMIZED01:
        base = 1.0 - rows[:, x]
    elif kind in (HARD01, MATRIX_HARD):
        A = spec.matrix if kind == MATRIX_HARD else 1.0 - np.eye(rows.shape[1])
        idx = np.argmax(rows, axis=1)
        pm = rows[np.arange(len(rows)), idx] >= 1.0 - _POINT_MASS_TOL
        base = np.where(pm, A[x, idx], np.inf)
    elif kind == MATRIX_RANDOMIZED:
        base = rows @ spec.matrix[x]
    elif kind == SKEWED_LOG:
        c = spec.weights
        mixed = rows @ c
        if c[x] == 0.0:
            base = mixed
        else:
            with np.errstate(divide="ignore"):
                base = -c[x] * (1.0 + np.log(rows[:, x])) + mixed
    else:  # pragma: no cover
        raise ValueError(kind)
    a, b = affine_params(spec)
    if b is None:
        return base
    return a * base + b[x]


def _entropy_rows(spec: LossSpec, rows: np.ndarray) -> np.ndarray:
    """Vectorized entropy over distribution rows (n, |X|)."""
    kind = spec.kind
    if kind == LOGARITHMIC:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rows > 0, rows * np.log(rows), 0.0)
        base = -np.sum(t, axis=1)
    elif kind == BRIER:
        base = 1.0 - np.sum(rows * rows, axis=1)
    elif kind in (RANDOMIZED01, HARD01):
        base = 1.0 - np.max(rows, axis=1)
    elif kind in (MATRIX_HARD, MATRIX_RANDOMIZED):
        base = np.min(rows @ spec.matrix, axis=1)
    elif kind == SKEWED_LOG:
        c = spec.weights
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rows > 0, rows * np.log(rows), 0.0)
        base = -(t @ c)
    else:  # pragma: no cover
        raise ValueError(kind)
    a, b = affine_params(spec)
    if b is None:
        return base
    return a * base + rows @ b


def _mass_entropy(spec: LossSpec, masses: np.ndarray, members: np.ndarray, n: int) -> np.ndarray:
    """Vectorized s * H(v / s) for unnormalized mass rows v on given outcomes.

    ``masses`` is (rows, k) with columns aligned to ``members`` (outcome
    indices); rows with total mass 0 contribute 0.
    """
    s = np.sum(masses, axis=1)
    kind = spec.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == LOGARITHMIC:
            t = np.where(masses > 0, masses * (np.log(s)[:, None] - np.log(masses)), 0.0)
            base = np.sum(t, axis=1)
        elif kind == BRIER:
            base = np.where(s > 0, s - np.sum(masses * masses, axis=1) / np.where(s > 0, s, 1.0), 0.0)
        elif kind in (RANDOMIZED01, HARD01):
            base = s - np.max(masses, axis=1)
        elif kind in (MATRIX_HARD, MATRIX_RANDOMIZED):
            base = np.min(masses @ spec.matrix[members, :], axis=1)
        elif kind == SKEWED_LOG:
            c = spec.weights[members]
            t = np.where(masses > 0, masses * (np.log(s)[:, None] - np.log(masses)), 0.0)
            base = t @ c
        else:  # pragma: no cover
            raise ValueError(kind)
    a, b = affine_params(spec)
    if b is None:
        return base
    return a * base + masses @ b[members]


def entropy_inner_min(spec: LossSpec, P, support) -> float:
    """Entropy of P by direct minimization of expected loss over predictions.

    The search runs over predictions supported on ``support`` (a set of
    outcome indices that must contain the support of P): a deterministic
    simplex grid followed by local pairwise-transfer refinement.  Intended as
    a slow cross-check of the closed forms in :func:`entropy`.
    """
    P = np.asarray(P, dtype=float)
    n = len(P)
    members = np.asarray(sorted(support), dtype=int)
    k = len(members)
    weights = P[members]

    def objective(rows_k: np.ndarray) -> np.ndarray:
        full = np.zeros((rows_k.shape[0], n))
        full[:, members] = rows_k
        total = np.zeros(rows_k.shape[0])
        for j, x in enumerate(members):
            if weights[j] > 0:
                total = total + weights[j] * _loss_rows(spec, int(x), full)
        return total

    if k == 1:
        return float(objective(np.ones((1, 1)))[0])
    levels = {2: 2000, 3: 120, 4: 40}.get(k, 12)
    grid = simplex_grid(k, levels)
    vals = objective(grid)
    best = int(np.argmin(vals))
    point, value = refine_extremum(
        objective, grid[best], rounds=30, step0=1.0 / levels, maximize=False
    )
    return float(value)
