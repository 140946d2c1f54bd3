"""Game data model: outcomes, messages, strategies, and the two objectives.

A game is a finite outcome space, a family of distinct covering messages
(subsets of outcomes that may be revealed), a strictly positive marginal on
outcomes, and a loss function.  The quizmaster picks a joint distribution on
(outcome, message) incidence pairs with fixed outcome marginals; the
contestant picks one prediction per message.  All types are immutable after
construction and every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import losses as _losses
from .losses import LossSpec


class GameValidationError(ValueError):
    """An input fails to describe a valid game."""


class ZeroMarginal(GameValidationError):
    """Some marginal entry is not strictly positive."""


class DuplicateMessage(GameValidationError):
    """Two messages coincide as sets."""


class UncoveredOutcome(GameValidationError):
    """Some outcome belongs to no message."""


class MarginalNotNormalized(GameValidationError):
    """Marginal entries do not sum to 1."""


class EmptyMessage(GameValidationError):
    """A message contains no outcomes."""


class ZeroMassMessage(ValueError):
    """Conditional requested for a message the strategy never sends."""


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used across the package.

    mass_sum bounds normalization checks of exact inputs, feasibility bounds
    strategy constraint residuals, certificate bounds optimality-certificate
    violations, and support is the mass threshold below which a message
    counts as unused.
    """

    mass_sum: float = 1e-12
    feasibility: float = 1e-9
    certificate: float = 1e-6
    support: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


def _readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IncidenceIndex:
    """Flat index of the admissible (outcome, message) pairs.

    Pairs are ordered message-major with outcomes ascending inside each
    message, so per-message slices are contiguous; ``outcome_pairs[x]`` lists
    the pair positions of outcome x across messages.
    """

    pair_outcome: np.ndarray
    pair_message: np.ndarray
    msg_start: np.ndarray
    outcome_pairs: tuple[np.ndarray, ...]

    @classmethod
    def build(cls, messages: Sequence[Sequence[int]], n_outcomes: int) -> "IncidenceIndex":
        po: list[int] = []
        pm: list[int] = []
        starts = [0]
        for m, members in enumerate(messages):
            po.extend(members)
            pm.extend([m] * len(members))
            starts.append(len(po))
        pair_outcome = _readonly(po, dtype=np.int64)
        pair_message = _readonly(pm, dtype=np.int64)
        msg_start = _readonly(starts, dtype=np.int64)
        outcome_pairs = tuple(
            _readonly(np.flatnonzero(pair_outcome == x), dtype=np.int64)
            for x in range(n_outcomes)
        )
        return cls(pair_outcome, pair_message, msg_start, outcome_pairs)

    @property
    def n_pairs(self) -> int:
        return len(self.pair_outcome)

    def message_slice(self, m: int) -> slice:
        return slice(int(self.msg_start[m]), int(self.msg_start[m + 1]))

    def message_members(self, m: int) -> np.ndarray:
        return self.pair_outcome[self.message_slice(m)]

    def pair_position(self, x: int, m: int) -> int:
        sl = self.message_slice(m)
        offset = int(np.searchsorted(self.pair_outcome[sl], x))
        return sl.start + offset


@dataclass(frozen=True, eq=False)
class Game:
    """A validated probability updating game.  Construct via validate_game."""

    outcomes: tuple[str, ...]
    messages: tuple[tuple[int, ...], ...]
    marginal: np.ndarray
    loss: LossSpec
    index: IncidenceIndex
    tol: Tolerances = DEFAULT_TOLERANCES

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    @property
    def n_messages(self) -> int:
        return len(self.messages)

    @property
    def n_pairs(self) -> int:
        return self.index.n_pairs

    @property
    def message_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(m) for m in self.messages)

    def outcome_position(self, name: str) -> int:
        try:
            return self.outcomes.index(name)
        except ValueError:
            raise KeyError(f"unknown outcome {name!r}") from None

    def degree(self, x: int) -> int:
        return len(self.index.outcome_pairs[x])

    def with_loss(self, spec: LossSpec) -> "Game":
        _check_loss_dims(spec, self.n_outcomes)
        return replace(self, loss=spec)

    def message_label(self, m: int) -> str:
        return "{" + ",".join(self.outcomes[x] for x in self.messages[m]) + "}"


def _check_loss_dims(spec: LossSpec, n: int) -> None:
    expected = spec.n_params
    if expected is not None and expected != n:
        raise GameValidationError(
            f"loss parameters sized for {expected} outcomes, game has {n}"
        )


def make_game(
    outcomes: Iterable[str],
    messages: Iterable[Iterable[object]],
    marginal: Iterable[float],
    loss: LossSpec | None = None,
    tol: Tolerances | None = None,
) -> Game:
    """Validate the parts of a game and assemble it.

    Message members may be outcome names or indices.  The marginal must be
    strictly positive and sum to one; it is checked, never renormalized.
    """
    tol = tol or DEFAULT_TOLERANCES
    names = tuple(str(o) for o in outcomes)
    if not names:
        raise GameValidationError("outcome space is empty")
    if len(set(names)) != len(names):
        raise GameValidationError("duplicate outcome names")
    lookup = {name: i for i, name in enumerate(names)}

    def to_index(member: object) -> int:
        if isinstance(member, (int, np.integer)) and not isinstance(member, bool):
            i = int(member)
            if not 0 <= i < len(names):
                raise GameValidationError(f"outcome index {i} out of range")
            return i
        key = str(member)
        if key not in lookup:
            raise GameValidationError(f"unknown outcome {key!r} in message")
        return lookup[key]

    msg_tuples: list[tuple[int, ...]] = []
    seen: set[frozenset[int]] = set()
    for raw in messages:
        members = tuple(sorted({to_index(m) for m in raw}))
        if not members:
            raise EmptyMessage("messages must be nonempty")
        fs = frozenset(members)
        if fs in seen:
            raise DuplicateMessage(
                "duplicate message {" + ",".join(names[i] for i in members) + "}"
            )
        seen.add(fs)
        msg_tuples.append(members)
    if not msg_tuples:
        raise GameValidationError("message family is empty")

    covered = set().union(*msg_tuples)
    if covered != set(range(len(names))):
        missing = sorted(set(range(len(names))) - covered)
        raise UncoveredOutcome(
            "outcomes not covered by any message: "
            + ", ".join(names[i] for i in missing)
        )

    p = np.array([float(v) for v in marginal], dtype=float)
    if p.shape != (len(names),):
        raise GameValidationError("marginal length does not match outcomes")
    if not np.all(np.isfinite(p)):
        raise GameValidationError("marginal entries must be finite")
    if np.any(p <= 0):
        raise ZeroMarginal("marginal entries must be strictly positive")
    if abs(float(p.sum()) - 1.0) > tol.mass_sum:
        raise MarginalNotNormalized(f"marginal sums to {p.sum()!r}, expected 1")

    spec = loss if loss is not None else _losses.logarithmic()
    if not isinstance(spec, LossSpec):
        raise GameValidationError("loss must be a LossSpec")
    _check_loss_dims(spec, len(names))

    index = IncidenceIndex.build(msg_tuples, len(names))
    return Game(names, tuple(msg_tuples), _readonly(p), spec, index, tol)


def validate_game(raw_game: Game | Mapping[str, object], tol: Tolerances | None = None) -> Game:
    """Validate a game given either as a Game or as a mapping.

    Mapping keys: ``outcomes`` (names), ``messages`` (lists of names or
    indices), ``marginal`` (numbers), optional ``loss`` (LossSpec or mapping
    with a ``kind`` plus parameters).  Extra keys are ignored.
    """
    if isinstance(raw_game, Game):
        return raw_game
    if not isinstance(raw_game, Mapping):
        raise GameValidationError("expected a Game or a mapping describing one")
    for key in ("outcomes", "messages", "marginal"):
        if key not in raw_game:
            raise GameValidationError(f"missing required field {key!r}")
    loss_field = raw_game.get("loss")
    if loss_field is None or isinstance(loss_field, LossSpec):
        spec = loss_field
    elif isinstance(loss_field, Mapping):
        spec = loss_from_dict(loss_field)
    else:
        raise GameValidationError("loss must be a LossSpec or a mapping")
    return make_game(
        raw_game["outcomes"], raw_game["messages"], raw_game["marginal"], spec, tol
    )


_LOSS_ALIASES = {
    "log": _losses.LOGARITHMIC,
    "logarithmic": _losses.LOGARITHMIC,
    "brier": _losses.BRIER,
    "rand01": _losses.RANDOMIZED01,
    "randomized01": _losses.RANDOMIZED01,
    "hard01": _losses.HARD01,
    "matrix_hard": _losses.MATRIX_HARD,
    "matrix_randomized": _losses.MATRIX_RANDOMIZED,
    "skewed_log": _losses.SKEWED_LOG,
}


def loss_from_dict(obj: Mapping[str, object]) -> LossSpec:
    """Build a LossSpec from the loss object of a game file."""
    kind = _LOSS_ALIASES.get(str(obj.get("kind", "")).lower())
    if kind is None:
        raise GameValidationError(f"unknown loss kind {obj.get('kind')!r}")
    try:
        spec = LossSpec(
            kind,
            matrix=obj.get("matrix"),
            weights=obj.get("weights"),
        )
        affine = obj.get("affine")
        if affine is not None:
            spec = _losses.affine_transform(
                spec, float(affine["scale"]), affine["offsets"]
            )
    except (ValueError, KeyError, TypeError) as exc:
        raise GameValidationError(f"invalid loss specification: {exc}") from exc
    return spec


def loss_to_dict(spec: LossSpec) -> dict:
    out: dict[str, object] = {"kind": spec.kind}
    if spec.matrix is not None:
        out["matrix"] = [list(map(float, row)) for row in spec.matrix]
    if spec.weights is not None:
        out["weights"] = [float(v) for v in spec.weights]
    if spec.affine is not None:
        a, b = spec.affine
        out["affine"] = {"scale": float(a), "offsets": [float(v) for v in b]}
    return out


@dataclass(frozen=True, eq=False)
class QuizStrategy:
    """Joint mass on incidence pairs with the game's outcome marginals."""

    game: Game
    joint: np.ndarray

    def __post_init__(self):
        v = np.array(self.joint, dtype=float)
        game = self.game
        if v.shape != (game.n_pairs,):
            raise GameValidationError(
                f"joint has shape {v.shape}, expected ({game.n_pairs},)"
            )
        if np.any(v < -game.tol.feasibility) or not np.all(np.isfinite(v)):
            raise GameValidationError("joint masses must be finite and >= 0")
        v = np.maximum(v, 0.0)
        for x in range(game.n_outcomes):
            row = float(v[game.index.outcome_pairs[x]].sum())
            if abs(row - game.marginal[x]) > game.tol.feasibility:
                raise GameValidationError(
                    f"outcome {game.outcomes[x]!r} mass {row} != marginal {game.marginal[x]}"
                )
        v.setflags(write=False)
        object.__setattr__(self, "joint", v)

    def message_mass(self) -> np.ndarray:
        return np.add.reduceat(self.joint, self.game.index.msg_start[:-1])

    def mass(self, x: int, m: int) -> float:
        return float(self.joint[self.game.index.pair_position(x, m)])

    def conditional(self, m: int) -> np.ndarray:
        """Distribution over outcomes given message m; zero off the message."""
        sl = self.game.index.message_slice(m)
        masses = self.joint[sl]
        total = float(masses.sum())
        if total <= 0.0:
            raise ZeroMassMessage(f"message {self.game.message_label(m)} has zero mass")
        out = np.zeros(self.game.n_outcomes)
        out[self.game.index.pair_outcome[sl]] = masses / total
        return out

    def used_messages(self, eps: float | None = None) -> np.ndarray:
        eps = self.game.tol.support if eps is None else eps
        return self.message_mass() > eps

    def to_dense(self) -> np.ndarray:
        """(n_messages, n_outcomes) table; entries off the incidence are 0."""
        out = np.zeros((self.game.n_messages, self.game.n_outcomes))
        out[self.game.index.pair_message, self.game.index.pair_outcome] = self.joint
        return out

    @classmethod
    def from_dense(cls, game: Game, table) -> "QuizStrategy":
        table = np.asarray(table, dtype=float)
        if table.shape != (game.n_messages, game.n_outcomes):
            raise GameValidationError("table shape does not match game")
        joint = table[game.index.pair_message, game.index.pair_outcome]
        return cls(game, joint)


@dataclass(frozen=True, eq=False)
class ContestantStrategy:
    """One prediction (distribution over all outcomes) per message."""

    game: Game
    per_message: np.ndarray

    def __post_init__(self):
        rows = np.array(self.per_message, dtype=float)
        game = self.game
        if rows.shape != (game.n_messages, game.n_outcomes):
            raise GameValidationError(
                f"per_message has shape {rows.shape}, expected "
                f"({game.n_messages}, {game.n_outcomes})"
            )
        if np.any(rows < -game.tol.mass_sum) or not np.all(np.isfinite(rows)):
            raise GameValidationError("predictions must be finite and >= 0")
        rows = np.maximum(rows, 0.0)
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise GameValidationError("each prediction must sum to 1")
        rows.setflags(write=False)
        object.__setattr__(self, "per_message", rows)

    def response(self, m: int) -> np.ndarray:
        return self.per_message[m]


@dataclass(frozen=True, eq=False)
class KtVector:
    """Per-outcome certificate heights for quizmaster optimality."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise GameValidationError("certificate vector must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class RcarVector:
    """Per-outcome conditional probabilities certifying an update rule.

    Entries lie in (0, 1]; for every message the entries of its members sum
    to at most 1 (with equality on messages the certified strategy uses).
    """

    q: np.ndarray

    def __post_init__(self):
        v = np.array(self.q, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "q", v)

    @classmethod
    def checked(cls, q, game: Game, tol: float = 1e-9) -> "RcarVector":
        v = np.asarray(q, dtype=float)
        if v.shape != (game.n_outcomes,):
            raise GameValidationError("vector length does not match outcomes")
        if np.any(v <= 0) or np.any(v > 1 + tol):
            raise GameValidationError("entries must lie in (0, 1]")
        for m, members in enumerate(game.messages):
            s = float(v[list(members)].sum())
            if s > 1 + tol:
                raise GameValidationError(
                    f"entries of message {game.message_label(m)} sum to {s} > 1"
                )
        return cls(v)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Solver output: strategy, certificate, value, and diagnostics."""

    strategy: QuizStrategy
    kt: KtVector
    value: float
    iterations: int
    converged: bool
    residuals: dict


def conditional(strategy: QuizStrategy, m: int) -> np.ndarray:
    """Normalized column of the joint for message m (error on zero mass)."""
    return strategy.conditional(m)


def expected_loss(game: Game, strategy: QuizStrategy, contestant: ContestantStrategy) -> float:
    """Expected loss of the contestant against the quizmaster's strategy.

    Terms with zero joint mass contribute exactly 0 even when the loss there
    is infinite; the result may be +inf.
    """
    total = 0.0
    for m in range(game.n_messages):
        sl = game.index.message_slice(m)
        masses = strategy.joint[sl]
        members = game.index.pair_outcome[sl]
        row = contestant.per_message[m]
        for x, mass in zip(members, masses):
            if mass > 0.0:
                val = _losses.loss(game.loss, int(x), row)
                if val == np.inf:
                    return float("inf")
                total += mass * val
    return float(total)


def expected_entropy(game: Game, strategy: QuizStrategy) -> float:
    """Expected generalized entropy of the quizmaster's strategy.

    Messages with zero mass contribute 0.
    """
    total = 0.0
    mass = strategy.message_mass()
    for m in range(game.n_messages):
        if mass[m] > 0.0:
            total += mass[m] * _losses.entropy(game.loss, strategy.conditional(m))
    return float(total)


def worst_case_loss(game: Game, contestant: ContestantStrategy) -> float:
    """Worst-case expected loss of the contestant over quizmaster strategies.

    The inner maximization is attained per outcome at a message maximizing
    the loss, so this is sum_x p_x * max_{y containing x} L(x, Q_y).
    """
    total = 0.0
    for x in range(game.n_outcomes):
        worst = -np.inf
        for pos in game.index.outcome_pairs[x]:
            m = int(game.index.pair_message[pos])
            worst = max(worst, _losses.loss(game.loss, x, contestant.per_message[m]))
        if worst == np.inf:
            return float("inf")
        total += game.marginal[x] * worst
    return float(total)
