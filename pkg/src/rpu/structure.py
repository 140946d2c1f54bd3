"""Message-structure analysis and transformations.

Covers removal of dominated messages, decomposition into connected
components, graph / matroid / partition classification, and a constructive
routine that, for connected structures that are neither graphs nor matroids,
produces a marginal on which the optimal coarsening mechanism genuinely
depends on the loss function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import Game, QuizStrategy, RcarVector, make_game


class NotApplicable(ValueError):
    """The operation's structural preconditions do not hold."""


class ConstructionFailed(RuntimeError):
    """The greedy construction could not certify its result."""


@dataclass(frozen=True)
class Classification:
    """Structural facts about a game's message family."""

    is_partition: bool
    is_graph: bool
    is_matroid: bool
    is_connected: bool
    has_dominated: bool
    components: tuple[tuple[int, ...], ...]


def remove_dominated(game: Game) -> tuple[Game, list[tuple[int, tuple[int, ...]]]]:
    """Drop every message that is a strict subset of another.

    Returns the reduced game and a log of (original index, members) for each
    removed message.  The marginal is unchanged; any strategy for the reduced
    game embeds into the original with zero mass on the removed messages.
    """
    sets = game.message_sets
    removed: list[tuple[int, tuple[int, ...]]] = []
    keep: list[int] = []
    for i, s in enumerate(sets):
        if any(i != j and s < sets[j] for j in range(len(sets))):
            removed.append((i, game.messages[i]))
        else:
            keep.append(i)
    if not removed:
        return game, []
    reduced = make_game(
        game.outcomes,
        [game.messages[i] for i in keep],
        game.marginal,
        game.loss,
        game.tol,
    )
    return reduced, removed


def _components(n_outcomes: int, messages) -> list[tuple[int, ...]]:
    """Connected components of the hypergraph, by union-find over incidence."""
    parent = list(range(n_outcomes))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for members in messages:
        members = list(members)
        for other in members[1:]:
            union(members[0], other)
    groups: dict[int, list[int]] = {}
    for x in range(n_outcomes):
        groups.setdefault(find(x), []).append(x)
    return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g[0])


def decompose(game: Game) -> list[tuple[Game, tuple[int, ...], float]]:
    """Split a game along connected components of its hypergraph.

    Returns one (sub_game, outcome_mapping, weight) triple per component,
    where the mapping sends sub-game outcome positions to original positions,
    the sub-marginal is the renormalized restriction, and the weight is the
    component's total marginal mass.
    """
    comps = _components(game.n_outcomes, game.messages)
    parts: list[tuple[Game, tuple[int, ...], float]] = []
    for comp in comps:
        comp_set = set(comp)
        local = {x: i for i, x in enumerate(comp)}
        sub_messages = [
            tuple(local[x] for x in members)
            for members in game.messages
            if set(members) <= comp_set
        ]
        weight = float(game.marginal[list(comp)].sum())
        sub_marginal = game.marginal[list(comp)] / weight
        sub = make_game(
            [game.outcomes[x] for x in comp],
            sub_messages,
            sub_marginal,
            game.loss,
            game.tol,
        )
        parts.append((sub, comp, weight))
    return parts


def recombine(game: Game, parts, strategies) -> QuizStrategy:
    """Assemble a strategy for ``game`` from per-component strategies.

    ``parts`` must come from :func:`decompose` on the same game; component
    masses are scaled by the component weights.
    """
    joint = np.zeros(game.n_pairs)
    for (sub, mapping, weight), strat in zip(parts, strategies):
        sub_local_messages = [
            tuple(sorted(mapping[x] for x in members)) for members in sub.messages
        ]
        orig_message = {
            members: m for m, members in enumerate(game.messages)
        }
        for sm, members in enumerate(sub_local_messages):
            m = orig_message[members]
            sl = sub.index.message_slice(sm)
            for pos, x_sub in zip(range(sl.start, sl.stop), sub.index.pair_outcome[sl]):
                x = mapping[int(x_sub)]
                joint[game.index.pair_position(x, m)] = weight * strat.joint[pos]
    return QuizStrategy(game, joint)


def is_graph_game(game: Game) -> bool:
    """True iff every message has at most two outcomes."""
    return all(len(m) <= 2 for m in game.messages)


def is_matroid(messages) -> bool:
    """Exhaustive basis-exchange check on a family of distinct sets.

    For every ordered pair of messages and every element x1 in the first but
    not the second, some x2 from the second must yield another message when
    swapped in for x1.
    """
    family = [frozenset(m) for m in messages]
    if not family or len(set(family)) != len(family):
        raise ValueError("messages must be a nonempty family of distinct sets")
    members = set(family)
    for y1 in family:
        for y2 in family:
            if y1 is y2:
                continue
            for x1 in y1 - y2:
                base = y1 - {x1}
                if not any(base | {x2} in members for x2 in y2 - y1):
                    return False
    return True


def classify(game: Game) -> Classification:
    """Compute all structural flags for a game."""
    sets = game.message_sets
    comps = _components(game.n_outcomes, game.messages)
    pairwise_disjoint = all(
        not (sets[i] & sets[j]) for i in range(len(sets)) for j in range(i + 1, len(sets))
    )
    has_dominated = any(
        i != j and sets[i] < sets[j] for i in range(len(sets)) for j in range(len(sets))
    )
    return Classification(
        is_partition=pairwise_disjoint,
        is_graph=is_graph_game(game),
        is_matroid=is_matroid(game.messages),
        is_connected=len(comps) == 1,
        has_dominated=has_dominated,
        components=tuple(comps),
    )


def _tight(q: np.ndarray, members, tol: float = 1e-12) -> bool:
    return float(q[list(members)].sum()) >= 1.0 - tol


def _is_uniform_on(q: np.ndarray, members, tol: float = 1e-12) -> bool:
    vals = q[list(members)]
    return float(vals.max() - vals.min()) < tol


def _greedy_fill(
    q: np.ndarray,
    messages,
    outcome_messages,
    priority: int | None = None,
    crossing_first: bool = False,
) -> None:
    """Raise entries of q until every outcome sits in some sum-1 message.

    Each round picks a raisable outcome (``priority`` first when set, else
    the lowest-index one, preferring outcomes in a message that already
    touches the maximized set when ``crossing_first``) and lifts it to the
    tightest constraint among its messages.
    """
    n = len(q)
    for _ in range(4 * n + 8):
        maximized = [
            any(_tight(q, messages[m]) for m in outcome_messages[x]) for x in range(n)
        ]
        open_outcomes = [x for x in range(n) if not maximized[x]]
        if not open_outcomes:
            return
        if priority is not None and not maximized[priority]:
            x = priority
        elif crossing_first:
            crossing = [
                x
                for x in open_outcomes
                if any(
                    any(maximized[o] for o in messages[m]) for m in outcome_messages[x]
                )
            ]
            x = crossing[0] if crossing else open_outcomes[0]
        else:
            x = open_outcomes[0]
        slack = min(
            1.0 - float(q[list(messages[m])].sum()) for m in outcome_messages[x]
        )
        if slack <= 0:
            continue
        q[x] += slack
    raise ConstructionFailed("greedy fill did not terminate")


def _nonuniform_seed(game: Game) -> tuple[np.ndarray, int, int]:
    """Initial vector for structures with messages of unequal sizes.

    Picks the largest message y2 of maximal size k2 that meets the largest
    smaller message y1 touching the size-k2 layer, and seeds a vector that is
    uniform on y1 and already tight on both.
    """
    sets = game.message_sets
    sizes = [len(s) for s in sets]
    k2 = max(sizes)
    big = [i for i, s in enumerate(sets) if sizes[i] == k2]
    candidates = [
        i
        for i, s in enumerate(sets)
        if sizes[i] < k2 and any(s & sets[j] for j in big)
    ]
    if not candidates:
        raise ConstructionFailed("no smaller message meets a largest message")
    k1 = max(sizes[i] for i in candidates)
    y1 = min(
        (i for i in candidates if sizes[i] == k1),
        key=lambda i: tuple(sorted(sets[i])),
    )
    y2 = min(
        (j for j in big if sets[j] & sets[y1]),
        key=lambda j: (-len(sets[j] & sets[y1]), tuple(sorted(sets[j]))),
    )
    only_y2 = sets[y2] - sets[y1]
    q = np.full(game.n_outcomes, 1.0 / (len(only_y2) * k1))
    q[list(only_y2)] = (len(sets[y1] - sets[y2]) / len(only_y2)) / k1
    q[list(sets[y1])] = 1.0 / k1
    return q, y1, y2


def _uniform_seed(game: Game) -> tuple[np.ndarray, int, int, int]:
    """Initial vector for structures whose messages all share one size k.

    Searches (in lexicographic order) for intersecting messages y1, y2 and an
    outcome x2 of y2 \\ y1 such that no single swap into y1 produces another
    message; seeds the uniform vector on y1 perturbed by +eps at x2 and -eps
    elsewhere outside y1.
    """
    sets = game.message_sets
    k = len(sets[0])
    # Large enough that squared-error optima visibly depart from the
    # constructed conditionals, while staying well inside (0, 1/k).
    eps = 1.0 / (2.0 * k)
    order = sorted(range(len(sets)), key=lambda i: tuple(sorted(sets[i])))
    members = set(sets)
    for i in order:
        for j in order:
            if j == i or not (sets[i] & sets[j]):
                continue
            for x2 in sorted(sets[j] - sets[i]):
                exchange_ok = any(
                    (sets[i] | {x2}) - {x1} in members for x1 in sets[i] - sets[j]
                )
                if exchange_ok:
                    continue
                q = np.full(game.n_outcomes, 1.0 / k - eps)
                q[list(sets[i])] = 1.0 / k
                q[x2] = 1.0 / k + eps
                sums = [float(q[list(s)].sum()) for s in sets]
                if max(sums) <= 1.0 + 1e-12:
                    return q, i, j, x2
    raise ConstructionFailed("no feasible intersecting witness triple found")


def counterexample_marginal(game: Game) -> tuple[np.ndarray, RcarVector, tuple[int, int]]:
    """Marginal on which no single strategy is optimal for every loss.

    Only defined for connected structures with no dominated messages that are
    neither graph games nor matroid games.  Builds a vector q with all
    message sums <= 1 and every outcome in some sum-1 message, such that two
    intersecting sum-1 messages exist with q uniform on one but not the
    other; the returned marginal makes the strategy that splits each outcome
    proportionally to q across the sum-1 messages optimal under any local
    proper loss, while squared-error optima must differ.

    Returns (marginal, q, (uniform message index, nonuniform message index)).
    """
    cls = classify(game)
    if cls.has_dominated:
        raise NotApplicable("structure has dominated messages")
    if not cls.is_connected:
        raise NotApplicable("structure is disconnected")
    if cls.is_graph:
        raise NotApplicable("structure is a graph game")
    if cls.is_matroid:
        raise NotApplicable("structure is a matroid game")

    sets = game.message_sets
    outcome_messages = [
        [m for m, s in enumerate(sets) if x in s] for x in range(game.n_outcomes)
    ]
    uniform_sizes = len({len(s) for s in sets}) == 1
    if uniform_sizes:
        q, y_uniform, _, x2 = _uniform_seed(game)
        _greedy_fill(q, game.messages, outcome_messages, priority=x2, crossing_first=True)
    else:
        q, y_uniform, _ = _nonuniform_seed(game)
        _greedy_fill(q, game.messages, outcome_messages)

    tight = [m for m in range(game.n_messages) if _tight(q, game.messages[m])]
    if max(float(q[list(s)].sum()) for s in sets) > 1.0 + 1e-12:
        raise ConstructionFailed("a message sum exceeds 1")
    if not all(any(m in tight for m in outcome_messages[x]) for x in range(game.n_outcomes)):
        raise ConstructionFailed("an outcome is in no sum-1 message")

    witness = None
    preferred = [y_uniform] + [m for m in tight if m != y_uniform]
    for a in preferred:
        if a not in tight or not _is_uniform_on(q, game.messages[a]):
            continue
        for b in tight:
            if b == a or not (sets[a] & sets[b]):
                continue
            vals = q[list(game.messages[b])]
            if float(vals.max() - vals.min()) > 1e-9:
                witness = (a, b)
                break
        if witness:
            break
    if witness is None:
        raise ConstructionFailed("no intersecting uniform/nonuniform sum-1 pair")

    marginal = np.zeros(game.n_outcomes)
    for m in tight:
        for x in game.messages[m]:
            marginal[x] += q[x] / len(tight)
    marginal /= marginal.sum()
    if np.any(marginal <= 0):
        raise ConstructionFailed("constructed marginal is not strictly positive")

    rcar = RcarVector.checked(q, game, tol=1e-9)
    return marginal, rcar, witness
