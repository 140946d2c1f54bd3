"""Shared game constructors and random generators for the test suite."""

from __future__ import annotations

import numpy as np

from rpu import (
    ContestantStrategy,
    Game,
    QuizStrategy,
    brier,
    hard01,
    logarithmic,
    make_game,
    randomized01,
)

MONTY_JOINT = np.array([1 / 3, 1 / 6, 1 / 6, 1 / 3])


def monty(spec=None) -> Game:
    return make_game(
        ["x1", "x2", "x3"],
        [["x1", "x2"], ["x2", "x3"]],
        [1 / 3, 1 / 3, 1 / 3],
        spec or logarithmic(),
    )


def fairdie(spec=None) -> Game:
    return make_game(
        [str(i) for i in range(1, 7)],
        [["1", "2", "3", "4"], ["3", "4", "5", "6"]],
        [1 / 6] * 6,
        spec or logarithmic(),
    )


def example3(spec=None) -> Game:
    return make_game(
        ["x1", "x2", "x3", "x4"],
        [["x1", "x2"], ["x2", "x3", "x4"]],
        [1 / 3, 1 / 3, 1 / 6, 1 / 6],
        spec or logarithmic(),
    )


def message_discard(spec=None) -> Game:
    return make_game(
        ["x1", "x2", "x3", "x4"],
        [["x1", "x2"], ["x2", "x3"], ["x3", "x4"]],
        [0.2, 0.2, 0.2, 0.4],
        spec or logarithmic(),
    )


MESSAGE_DISCARD_JOINT = np.array([0.2, 0.2, 0.0, 0.0, 0.2, 0.4])


def outcome_discard() -> Game:
    return make_game(
        ["x1", "x2", "x3", "x4"],
        [["x1", "x2"], ["x2", "x3", "x4"]],
        [0.45, 0.05, 0.25, 0.25],
        brier(),
    )


def triangle_discard(spec=None) -> Game:
    return make_game(
        ["x1", "x2", "x3"],
        [["x1", "x2"], ["x2", "x3"], ["x1", "x3"]],
        [0.2, 0.6, 0.2],
        spec or logarithmic(),
    )


TRIANGLE_DISCARD_JOINT = np.array([0.2, 0.3, 0.3, 0.2, 0.0, 0.0])


def four_cycle(spec=None) -> Game:
    return make_game(
        ["x1", "x2", "x3", "x4"],
        [["x1", "x2"], ["x2", "x3"], ["x3", "x4"], ["x1", "x4"]],
        [0.25] * 4,
        spec or randomized01(),
    )


def hard01_triangle() -> Game:
    return make_game(
        ["x1", "x2", "x3"],
        [["x1", "x2"], ["x2", "x3"], ["x1", "x3"]],
        [1 / 3, 1 / 3, 1 / 3],
        hard01(),
    )


def negation4(spec=None) -> Game:
    outcomes = ["x1", "x2", "x3", "x4"]
    messages = [[o for o in outcomes if o != skip] for skip in outcomes]
    return make_game(outcomes, messages, [0.1, 0.2, 0.3, 0.4], spec or logarithmic())


def uniform_2of4(spec=None) -> Game:
    import itertools

    outcomes = ["x1", "x2", "x3", "x4"]
    messages = [list(c) for c in itertools.combinations(outcomes, 2)]
    return make_game(outcomes, messages, [0.1, 0.2, 0.3, 0.4], spec or logarithmic())


def random_structure(rng, n_min=2, n_max=5, max_messages=5, sizes=None):
    """A random covering family of distinct messages on n outcomes."""
    n = int(rng.integers(n_min, n_max + 1))
    cap = min(max_messages, 2**n - 1)
    while True:
        k = int(rng.integers(1, cap + 1))
        msgs: set[frozenset[int]] = set()
        guard = 0
        while len(msgs) < k and guard < 500:
            guard += 1
            if sizes is None:
                size = int(rng.integers(1, n + 1))
            else:
                size = int(rng.choice([s for s in sizes if s <= n]))
            msgs.add(frozenset(int(v) for v in rng.choice(n, size=size, replace=False)))
        family = sorted(tuple(sorted(m)) for m in msgs)
        if family and set().union(*map(set, family)) == set(range(n)):
            return n, family


def random_marginal(rng, n) -> np.ndarray:
    p = rng.dirichlet(np.ones(n)) * 0.8 + 0.2 / n
    return p / p.sum()


def random_game(rng, spec=None, **kwargs) -> Game:
    n, family = random_structure(rng, **kwargs)
    return make_game(
        [f"x{i}" for i in range(n)],
        family,
        random_marginal(rng, n),
        spec or logarithmic(),
    )


def random_graph_game(rng, spec=None, n_min=3, n_max=6) -> Game:
    """A random connected game whose messages are edges (size-2 sets)."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = {frozenset({i, int(rng.integers(0, i))}) for i in range(1, n)}
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        a, b = rng.choice(n, size=2, replace=False)
        edges.add(frozenset({int(a), int(b)}))
    family = sorted(tuple(sorted(e)) for e in edges)
    return make_game(
        [f"x{i}" for i in range(n)],
        family,
        random_marginal(rng, n),
        spec or logarithmic(),
    )


def random_quiz_strategy(rng, game: Game) -> QuizStrategy:
    joint = np.empty(game.n_pairs)
    for x in range(game.n_outcomes):
        pos = game.index.outcome_pairs[x]
        joint[pos] = game.marginal[x] * rng.dirichlet(np.ones(len(pos)))
    return QuizStrategy(game, joint)


def random_contestant(rng, game: Game) -> ContestantStrategy:
    rows = rng.dirichlet(np.ones(game.n_outcomes), size=game.n_messages)
    return ContestantStrategy(game, rows)
