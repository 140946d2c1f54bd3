"""Independent certificate checking.

Everything here re-derives optimality claims from first principles: the
certificate hyperplane must dominate the entropy surface on every message's
simplex (checked on dense deterministic grids with local refinement) and
touch it at the conditionals of used messages; conditional-probability
certificates must match every used message's conditionals and respect the
per-message sum cap; duality gaps must close.  Failures are reported, never
thrown.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import losses as _losses
from ._simplex import refine_extremum, simplex_grid
from .game import (
    ContestantStrategy,
    Game,
    KtVector,
    QuizStrategy,
    RcarVector,
    expected_entropy,
    worst_case_loss,
)


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one certificate check."""

    passed: bool
    max_violation: float
    per_message: dict
    notes: tuple[str, ...] = ()


def _as_array(x) -> np.ndarray:
    if isinstance(x, (KtVector,)):
        return x.values
    if isinstance(x, RcarVector):
        return x.q
    return np.asarray(x, dtype=float)


def _grid_levels(k: int) -> int:
    # About 1e5 points through dimension 3, 50 levels in dimension 4,
    # coarser with refinement beyond.
    if k <= 2:
        return 100_000
    if k == 3:
        return 444
    if k == 4:
        return 49
    return {5: 20, 6: 12}.get(k, 8)


def _hyperplane_gap_rows(spec, lam_y: np.ndarray, members: np.ndarray, n: int):
    def rows_fn(rows_k: np.ndarray) -> np.ndarray:
        full = np.zeros((rows_k.shape[0], n))
        full[:, members] = rows_k
        return _losses._entropy_rows(spec, full) - rows_k @ lam_y

    return rows_fn


def check_kt(game: Game, strategy: QuizStrategy, kt, tol: float) -> CertificateReport:
    """Verify a certificate vector against a strategy.

    For every message the linear function with the certificate's heights must
    lie on or above the entropy surface over that message's simplex (checked
    on a dense grid plus 20 halving refinement steps around the worst point);
    for messages the strategy uses it must additionally touch the surface at
    the strategy's conditional.
    """
    lam = _as_array(kt)
    spec = game.loss
    n = game.n_outcomes
    mass = strategy.message_mass()
    per_message: dict[int, dict] = {}
    notes: list[str] = []
    worst = 0.0
    for m in range(game.n_messages):
        members = np.asarray(game.messages[m], dtype=int)
        k = len(members)
        rows_fn = _hyperplane_gap_rows(spec, lam[members], members, n)
        levels = _grid_levels(k)
        grid = simplex_grid(k, levels)
        vals = rows_fn(grid)
        hi = int(np.argmax(vals))
        high_point, dome = refine_extremum(rows_fn, grid[hi], rounds=20, step0=1.0 / levels)
        dome = max(float(dome), float(vals[hi]))  # signed: > 0 means surface pokes above
        clearance = max(-dome, 0.0)  # least height of the hyperplane over the surface

        used = mass[m] > game.tol.support
        violation = max(dome, 0.0)
        touch = None
        if used:
            cond = strategy.conditional(m)
            eq_gap = abs(
                _losses.entropy(spec, cond) - float(cond[members] @ lam[members])
            )
            violation = max(violation, eq_gap)
            mode = "supporting"
            touch = cond
        else:
            mode = "supporting" if clearance <= tol else "dominating"
            if mode == "supporting":
                touch = np.zeros(n)
                touch[members] = high_point
        per_message[m] = {
            "mode": mode,
            "violation": violation,
            "clearance": clearance,
            "touch_point": touch,
        }
        if mode == "dominating":
            notes.append(
                f"message {game.message_label(m)}: dominating, clearance {clearance:.3g}"
            )
        worst = max(worst, violation)
    return CertificateReport(
        passed=worst <= tol,
        max_violation=worst,
        per_message=per_message,
        notes=tuple(notes),
    )


def check_rcar(strategy: QuizStrategy, q, tol: float) -> CertificateReport:
    """Verify a conditional-probability certificate against a strategy.

    Both conditions are checked: every used message's conditional must equal
    q on its members, and every message's member entries must sum to at most
    one.
    """
    qv = _as_array(q)
    game = strategy.game
    mass = strategy.message_mass()
    per_message: dict[int, dict] = {}
    worst = 0.0
    for m in range(game.n_messages):
        members = list(game.messages[m])
        sum_excess = max(0.0, float(qv[members].sum()) - 1.0)
        cond_gap = 0.0
        if mass[m] > game.tol.support:
            cond = strategy.conditional(m)
            cond_gap = float(np.max(np.abs(cond[members] - qv[members])))
        violation = max(sum_excess, cond_gap)
        per_message[m] = {
            "mode": "supporting" if mass[m] > game.tol.support else "dominating",
            "violation": violation,
            "conditional_gap": cond_gap,
            "sum_excess": sum_excess,
        }
        worst = max(worst, violation)
    return CertificateReport(passed=worst <= tol, max_violation=worst, per_message=per_message)


def check_nash_gap(game: Game, strategy: QuizStrategy, contestant: ContestantStrategy) -> float:
    """Worst-case loss of the contestant minus entropy of the quizmaster.

    Nonnegative up to rounding for any pair; near zero exactly when the pair
    is a saddle point.
    """
    return worst_case_loss(game, contestant) - expected_entropy(game, strategy)


def check_equalizer(
    game: Game,
    strategy: QuizStrategy,
    kt,
    tol: float,
    contestant: ContestantStrategy | None = None,
) -> bool:
    """Whether losses equal the certificate heights on every covered pair.

    By default checks the quizmaster's conditionals on used messages; pass a
    contestant strategy to instead check its predictions on all messages.
    """
    lam = _as_array(kt)
    if contestant is not None:
        for m in range(game.n_messages):
            for x in game.messages[m]:
                if abs(_losses.loss(game.loss, x, contestant.per_message[m]) - lam[x]) > tol:
                    return False
        return True
    mass = strategy.message_mass()
    for m in range(game.n_messages):
        if mass[m] <= game.tol.support:
            continue
        cond = strategy.conditional(m)
        for x in game.messages[m]:
            if abs(_losses.loss(game.loss, x, cond) - lam[x]) > tol:
                return False
    return True


def check_loss_exchange(game: Game, strategy: QuizStrategy, kt, tol: float) -> CertificateReport:
    """Order check on certificate heights across one-outcome message swaps.

    For message pairs differing by exchanging x1 for x2, with the loss
    symmetric between the two and the strategy giving x1 positive mass on the
    first message, the certificate height at x1 may not exceed the height at
    x2.
    """
    lam = _as_array(kt)
    sets = game.message_sets
    per_message: dict = {}
    notes: list[str] = []
    worst = 0.0
    checked = 0
    for m1 in range(game.n_messages):
        for m2 in range(game.n_messages):
            if m1 == m2:
                continue
            d1 = sets[m1] - sets[m2]
            d2 = sets[m2] - sets[m1]
            if len(d1) != 1 or len(d2) != 1:
                continue
            x1, x2 = next(iter(d1)), next(iter(d2))
            if not _losses.is_symmetric_between(game.loss, x1, x2):
                continue
            if strategy.mass(x1, m1) <= game.tol.support:
                continue
            checked += 1
            violation = max(0.0, float(lam[x1] - lam[x2]))
            key = (m1, m2)
            per_message[key] = {
                "exchange": (x1, x2),
                "violation": violation,
            }
            if violation > tol:
                notes.append(
                    f"height at {game.outcomes[x1]} exceeds {game.outcomes[x2]} "
                    f"by {violation:.3g} across {game.message_label(m1)} / "
                    f"{game.message_label(m2)}"
                )
            worst = max(worst, violation)
    notes.insert(0, f"{checked} qualifying exchange pairs")
    return CertificateReport(
        passed=worst <= tol,
        max_violation=worst,
        per_message=per_message,
        notes=tuple(notes),
    )


def brute_force_value(game: Game, resolution: int) -> float:
    """Grid-oracle value of the game (see solver.oracle_grid)."""
    from .solver import oracle_grid

    value, _ = oracle_grid(game, resolution)
    return value
