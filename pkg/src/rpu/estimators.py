"""Scikit-learn style estimators exposing the update rules.

``fit`` takes a game (a :class:`~rpu.game.Game` or a mapping with outcomes,
messages, marginal, and optional loss) and solves it; ``predict_proba`` maps
messages to the fitted update distributions over outcomes, so the update
rule drops into pipelines and model-selection tooling like any estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import losses as _losses
from .game import Game, loss_from_dict, validate_game
from .solver import (
    SolverOptions,
    solve_contestant,
    solve_hard01_contestant,
    solve_quizmaster,
    solve_rcar,
)
from .verify import check_nash_gap


def _coerce_loss(loss):
    if loss is None or isinstance(loss, _losses.LossSpec):
        return loss
    if isinstance(loss, str):
        return loss_from_dict({"kind": loss})
    if isinstance(loss, dict):
        return loss_from_dict(loss)
    raise ValueError(f"cannot interpret loss {loss!r}")


class _MessageLookupMixin:
    def _require_fitted(self):
        if not hasattr(self, "game_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def _message_index(self, message) -> int:
        game: Game = self.game_
        members = frozenset(
            m if isinstance(m, (int, np.integer)) else game.outcome_position(str(m))
            for m in message
        )
        for i, s in enumerate(game.message_sets):
            if s == members:
                return i
        raise ValueError(f"message {sorted(members)} is not a message of the fitted game")

    def predict_proba(self, messages) -> np.ndarray:
        """Row-stochastic array of updated outcome distributions, one per message."""
        self._require_fitted()
        rows = [self._row(self._message_index(msg)) for msg in messages]
        return np.asarray(rows)

    def predict(self, messages) -> np.ndarray:
        """Most likely outcome name under the updated distribution per message."""
        proba = self.predict_proba(messages)
        names = np.asarray(self.game_.outcomes, dtype=object)
        return names[np.argmax(proba, axis=1)]


class RobustUpdater(BaseEstimator, _MessageLookupMixin):
    """Worst-case optimal probability updating for a fixed game.

    Fitting solves both sides of the game.  ``loss`` overrides the game's
    loss function when given (a kind name, mapping, or LossSpec).  Fitted
    attributes: ``game_``, ``report_``, ``strategy_`` (quizmaster joint),
    ``contestant_``, ``kt_vector_``, ``value_``, ``nash_gap_``.
    """

    def __init__(
        self,
        loss=None,
        restarts: int = 5,
        seed: int = 0,
        max_iterations: int = 200000,
        value_tolerance: float = 1e-10,
        certificate_tolerance: float = 1e-6,
    ):
        self.loss = loss
        self.restarts = restarts
        self.seed = seed
        self.max_iterations = max_iterations
        self.value_tolerance = value_tolerance
        self.certificate_tolerance = certificate_tolerance

    def _options(self) -> SolverOptions:
        return SolverOptions(
            max_iterations=self.max_iterations,
            value_tolerance=self.value_tolerance,
            certificate_tolerance=self.certificate_tolerance,
            seed=self.seed,
            restarts=self.restarts,
        )

    def fit(self, game, y=None):
        g = validate_game(game)
        override = _coerce_loss(self.loss)
        if override is not None:
            g = g.with_loss(override)
        report = solve_quizmaster(g, self._options())
        if _losses.is_hard(g.loss):
            contestant = solve_hard01_contestant(g).strategy
        else:
            contestant = solve_contestant(g, report)
        self.game_ = g
        self.report_ = report
        self.strategy_ = report.strategy
        self.contestant_ = contestant
        self.kt_vector_ = np.array(report.kt.values)
        self.value_ = report.value
        self.nash_gap_ = check_nash_gap(g, report.strategy, contestant)
        return self

    def _row(self, m: int) -> np.ndarray:
        return self.contestant_.per_message[m]


class RcarUpdater(BaseEstimator, _MessageLookupMixin):
    """Loss-free probability updating for a fixed message structure.

    Fitting computes the per-outcome conditional-probability vector q that
    certifies worst-case optimality for every local proper loss (and, on
    graph or matroid structures, for all sufficiently symmetric losses); any
    loss attached to the game is ignored.  The update for a message is q
    restricted to the message and normalized.  Fitted attributes: ``game_``,
    ``q_``, ``strategy_``, ``message_sums_``.
    """

    def __init__(self, restarts: int = 5, seed: int = 0, max_iterations: int = 200000):
        self.restarts = restarts
        self.seed = seed
        self.max_iterations = max_iterations

    def fit(self, game, y=None):
        g = validate_game(game)
        opts = SolverOptions(
            max_iterations=self.max_iterations, seed=self.seed, restarts=self.restarts
        )
        rcar, strategy = solve_rcar(g.outcomes, g.messages, g.marginal, opts)
        self.game_ = g
        self.q_ = np.array(rcar.q)
        self.strategy_ = strategy
        self.message_sums_ = np.array(
            [float(self.q_[list(members)].sum()) for members in g.messages]
        )
        return self

    def _row(self, m: int) -> np.ndarray:
        members = list(self.game_.messages[m])
        row = np.zeros(self.game_.n_outcomes)
        row[members] = self.q_[members] / self.q_[members].sum()
        return row
