"""Worst-case optimal strategy computation.

The quizmaster's problem is concave maximization of the expected generalized
entropy over a product of per-outcome simplices.  Smooth proper losses are
solved by conditional-gradient ascent (exact linear oracle on the product
polytope, away steps, seeded restarts) followed by an active-set Newton
polish that drives the first-order certificate residuals to solver
precision.  Piecewise-linear entropies (the 0-1 and matrix families) make
the problem a linear program, solved exactly; its equality duals are the
certificate vector.

Also here: certificate-vector extraction, the loss-free conditional-
probability solver, contestant strategy construction, the exact stable-set
strategy for hard 0-1 loss, and a brute-force grid oracle used to
cross-check solver output on small games.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linprog, minimize

from . import losses as _losses
from ._simplex import n_compositions, compositions, refine_extremum, simplex_grid
from .game import (
    ContestantStrategy,
    Game,
    KtVector,
    QuizStrategy,
    RcarVector,
    SolveReport,
    expected_entropy,
    make_game,
)


class DidNotConverge(RuntimeError):
    """Solver finished without a certificate-grade solution."""


class UnsupportedLoss(ValueError):
    """No solver route exists for this loss kind."""


class NoFeasibleResponse(RuntimeError):
    """No prediction realizes the certificate heights on some message."""


class TooLarge(ValueError):
    """Problem size exceeds the exhaustive-search bound."""


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200000
    value_tolerance: float = 1e-10
    certificate_tolerance: float = 1e-6
    seed: int = 0
    restarts: int = 5
    smoothing_epsilon: float = 1e-9

    def __post_init__(self):
        if min(self.value_tolerance, self.certificate_tolerance, self.smoothing_epsilon) <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class StableSetResult:
    """Exact contestant solution for hard 0-1 loss."""

    stable_set: frozenset[int]
    weight: float
    strategy: ContestantStrategy
    worst_case: float


_DROP_EPS = 1e-13


def _uniform_feasible(game: Game) -> np.ndarray:
    """The strategy splitting each outcome's mass evenly over its messages."""
    v = np.empty(game.n_pairs)
    for x in range(game.n_outcomes):
        pos = game.index.outcome_pairs[x]
        v[pos] = game.marginal[x] / len(pos)
    return v


def _message_sums(game: Game, v: np.ndarray) -> np.ndarray:
    return np.add.reduceat(v, game.index.msg_start[:-1])


def _value(game: Game, spec, v: np.ndarray) -> float:
    """Expected generalized entropy of a joint mass vector (smooth kinds)."""
    pm = game.index.pair_message
    s = _message_sums(game, v)
    sp = s[pm]
    kind = spec.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == _losses.LOGARITHMIC:
            base = float(np.sum(np.where(v > 0, v * (np.log(sp) - np.log(np.where(v > 0, v, 1.0))), 0.0)))
        elif kind == _losses.BRIER:
            base = float(s.sum() - np.sum(np.where(sp > 0, v * v / np.where(sp > 0, sp, 1.0), 0.0)))
        elif kind == _losses.SKEWED_LOG:
            c = spec.weights[game.index.pair_outcome]
            base = float(np.sum(np.where(v > 0, c * v * (np.log(sp) - np.log(np.where(v > 0, v, 1.0))), 0.0)))
        else:
            raise UnsupportedLoss(f"no smooth objective for {kind}")
    a, b = _losses.affine_params(spec)
    if b is None:
        return base
    return a * base + float(np.sum(b[game.index.pair_outcome] * v))


def _gradient(game: Game, spec, v: np.ndarray, smoothing: float) -> np.ndarray:
    """Supergradient of the objective: the loss at each message's conditional.

    Messages whose mass is below ``smoothing`` are evaluated on a mix of the
    strategy with the uniform-split feasible point, so conditionals stay
    defined everywhere.
    """
    pm = game.index.pair_message
    s = _message_sums(game, v)
    if np.any(s <= smoothing):
        mix = (1.0 - 1e-6) * v + 1e-6 * _uniform_feasible(game)
        s_mix = _message_sums(game, mix)
        use_mix = (s <= smoothing)[pm]
        v_eff = np.where(use_mix, mix, v)
        sp = np.where(use_mix, s_mix[pm], s[pm])
    else:
        v_eff = v
        sp = s[pm]
    cond = np.maximum(v_eff / np.maximum(sp, 1e-300), 1e-20)
    kind = spec.kind
    if kind == _losses.LOGARITHMIC:
        base = -np.log(cond)
    elif kind == _losses.BRIER:
        ssq = np.add.reduceat(cond * cond, game.index.msg_start[:-1])[pm]
        base = 1.0 - 2.0 * cond + ssq
    elif kind == _losses.SKEWED_LOG:
        c = spec.weights[game.index.pair_outcome]
        mixed = np.add.reduceat(c * cond, game.index.msg_start[:-1])[pm]
        base = -c * (1.0 + np.log(cond)) + mixed
    else:
        raise UnsupportedLoss(f"no smooth gradient for {kind}")
    a, b = _losses.affine_params(spec)
    if b is None:
        return base
    return a * base + b[game.index.pair_outcome]


def _renormalize_rows(game: Game, v: np.ndarray) -> np.ndarray:
    for x in range(game.n_outcomes):
        pos = game.index.outcome_pairs[x]
        total = float(v[pos].sum())
        if total > 0:
            v[pos] *= game.marginal[x] / total
        else:
            v[pos] = game.marginal[x] / len(pos)
    return v


def _vertex(game: Game, assignment: tuple[int, ...]) -> np.ndarray:
    v = np.zeros(game.n_pairs)
    for x, k in enumerate(assignment):
        v[game.index.outcome_pairs[x][k]] = game.marginal[x]
    return v


def _line_search(game, spec, v, d, hi: float) -> float:
    """Exact step along d by bisection on the directional derivative."""
    eps = 1e-12

    def slope(t: float) -> float:
        g = _gradient(game, spec, v + t * d, eps)
        val = float(g @ d)
        return val if np.isfinite(val) else -np.inf

    if slope(hi * (1.0 - 1e-9)) >= 0:
        return hi
    lo, up = 0.0, hi
    for _ in range(45):
        mid = 0.5 * (lo + up)
        if slope(mid) > 0:
            lo = mid
        else:
            up = mid
    return 0.5 * (lo + up)


def _frank_wolfe(
    game: Game,
    spec,
    v0: np.ndarray,
    opts: SolverOptions,
    budget: int,
    start_assignment: tuple[int, ...] | None = None,
    trace: list | None = None,
) -> tuple[np.ndarray, float, int]:
    """Away-step conditional gradient from v0; returns (iterate, gap, steps).

    Each step routes outcome mass toward the message with the largest
    supergradient entry; the nominal 2/(t+2) step is refined by an exact
    line search so the objective never decreases.
    """
    index = game.index
    v = v0.copy()
    weights: dict[tuple[int, ...], float] = {}
    positions: dict[tuple[int, ...], np.ndarray] = {}

    def register(key: tuple[int, ...]) -> np.ndarray:
        if key not in positions:
            positions[key] = np.array(
                [index.outcome_pairs[x][k] for x, k in enumerate(key)], dtype=np.int64
            )
        return positions[key]

    if start_assignment is not None:
        weights[start_assignment] = 1.0
        register(start_assignment)
    f_cur = _value(game, spec, v)
    gap = np.inf
    stall = 0
    it = 0
    while it < budget:
        it += 1
        g = _gradient(game, spec, v, opts.smoothing_epsilon)
        assignment = []
        for x in range(game.n_outcomes):
            pos = index.outcome_pairs[x]
            assignment.append(int(np.argmax(g[pos])))
        assignment = tuple(assignment)
        v_fw = _vertex(game, assignment)
        gap = float(g @ (v_fw - v))
        if trace is not None:
            trace.append(f_cur)
        if gap <= opts.value_tolerance:
            break

        d = v_fw - v
        hi = 1.0
        away_key = None
        if len(weights) > 1:
            away_key = min(
                weights,
                key=lambda k: (float(game.marginal @ g[register(k)]), k),
            )
            d_away = v - _vertex(game, away_key)
            w = weights[away_key]
            if float(g @ d_away) > gap and w < 1.0:
                d = d_away
                hi = w / (1.0 - w)
            else:
                away_key = None

        nominal = min(2.0 / (it + 2.0), hi)
        alpha = _line_search(game, spec, v, d, hi)
        if alpha <= 0:
            alpha = nominal * 1e-3
        v_new = np.maximum(v + alpha * d, 0.0)
        f_new = _value(game, spec, v_new)
        if f_new < f_cur - 1e-12:
            alpha = min(nominal, alpha)
            v_new = np.maximum(v + alpha * d, 0.0)
            f_new = _value(game, spec, v_new)
            if f_new < f_cur - 1e-12:
                stall += 1
                if stall >= 5:
                    break
                continue
        if f_new <= f_cur + 1e-15:
            stall += 1
        else:
            stall = 0
        f_cur = f_new
        v = v_new
        if away_key is not None:
            for k in list(weights):
                weights[k] *= 1.0 + alpha
            weights[away_key] -= alpha
            if weights[away_key] <= 1e-12:
                del weights[away_key]
        else:
            for k in list(weights):
                weights[k] *= 1.0 - alpha
                if weights[k] <= 1e-12:
                    del weights[k]
            weights[assignment] = weights.get(assignment, 0.0) + alpha
            register(assignment)
        if stall >= 10:
            break
    return _renormalize_rows(game, v), gap, it


def _hessian_block(spec, masses: np.ndarray, members: np.ndarray) -> np.ndarray:
    """Hessian of one message's mass-entropy term at strictly positive masses."""
    k = len(masses)
    s = float(masses.sum())
    kind = spec.kind
    if kind == _losses.LOGARITHMIC:
        block = np.full((k, k), 1.0 / s) - np.diag(1.0 / masses)
    elif kind == _losses.BRIER:
        c = masses / s
        ssq = float(c @ c)
        block = (2.0 * (c[:, None] + c[None, :]) - 2.0 * ssq) / s - np.diag(np.full(k, 2.0 / s))
    elif kind == _losses.SKEWED_LOG:
        cw = spec.weights[members]
        w = float(cw @ masses)
        block = (cw[:, None] + cw[None, :]) / s - w / s**2 - np.diag(cw / masses)
    else:
        raise UnsupportedLoss(kind)
    a, _ = _losses.affine_params(spec)
    return a * block


def _dome_violation(spec, lam: np.ndarray, members, n: int) -> tuple[float, np.ndarray]:
    """Largest entropy excess over the certificate hyperplane on a message."""
    members = np.asarray(members, dtype=int)
    k = len(members)
    lam_y = lam[members]

    def rows_fn(rows_k: np.ndarray) -> np.ndarray:
        full = np.zeros((rows_k.shape[0], n))
        full[:, members] = rows_k
        return _losses._entropy_rows(spec, full) - rows_k @ lam_y

    levels = {1: 1, 2: 400, 3: 40, 4: 16}.get(k, 8)
    grid = simplex_grid(k, levels)
    vals = rows_fn(grid)
    best = int(np.argmax(vals))
    point, val = refine_extremum(rows_fn, grid[best], rounds=25, step0=1.0 / levels)
    full_point = np.zeros(n)
    full_point[members] = point
    return float(val), full_point


def _extract_kt(game: Game, spec, v: np.ndarray) -> np.ndarray:
    """Certificate heights: max loss at the conditional over used messages."""
    s = _message_sums(game, v)
    lam = np.full(game.n_outcomes, -np.inf)
    for m in range(game.n_messages):
        if s[m] <= game.tol.support:
            continue
        sl = game.index.message_slice(m)
        cond = np.zeros(game.n_outcomes)
        cond[game.index.pair_outcome[sl]] = v[sl] / s[m]
        for x in game.index.pair_outcome[sl]:
            lam[x] = max(lam[x], _losses.loss(spec, int(x), cond))
    if not np.all(np.isfinite(lam)):
        raise DidNotConverge("an outcome occurs only in unused messages")
    return lam


def _certificate_residuals(game: Game, spec, v: np.ndarray, lam: np.ndarray) -> dict:
    """First-order optimality residuals of (strategy, certificate)."""
    s = _message_sums(game, v)
    station = 0.0
    off_support = 0.0
    dome = 0.0
    for m in range(game.n_messages):
        sl = game.index.message_slice(m)
        members = game.index.pair_outcome[sl]
        if s[m] > game.tol.support:
            cond = np.zeros(game.n_outcomes)
            cond[members] = v[sl] / s[m]
            for pos, x in zip(range(sl.start, sl.stop), members):
                val = _losses.loss(spec, int(x), cond)
                if v[pos] > game.tol.support:
                    station = max(station, abs(val - lam[x]))
                else:
                    off_support = max(off_support, val - lam[x])
        else:
            excess, _ = _dome_violation(spec, lam, members, game.n_outcomes)
            dome = max(dome, excess)
    marg = 0.0
    for x in range(game.n_outcomes):
        marg = max(marg, abs(float(v[game.index.outcome_pairs[x]].sum()) - game.marginal[x]))
    kt_residual = max(station, max(off_support, 0.0), max(dome, 0.0), marg)
    return {
        "stationarity": station,
        "off_support_excess": max(off_support, 0.0),
        "unused_dome_excess": max(dome, 0.0),
        "marginal_residual": marg,
        "kt_residual": kt_residual,
    }


def _polish(game: Game, spec, v0: np.ndarray, opts: SolverOptions) -> np.ndarray:
    """Active-set Newton refinement of a conditional-gradient iterate.

    Maximizes the objective restricted to the current support subject to the
    marginal constraints, dropping pairs driven to zero, re-adding pairs of
    used messages whose gradient exceeds the outcome's multiplier, and
    reopening unused messages whose entropy pokes above the certificate
    hyperplane.
    """
    index = game.index
    n_pairs = game.n_pairs
    v = v0.copy()
    v[v < _DROP_EPS] = 0.0
    _renormalize_rows(game, v)
    support = v > 0
    for x in range(game.n_outcomes):
        pos = index.outcome_pairs[x]
        if not support[pos].any():
            support[pos[0]] = True
            v[pos[0]] = game.marginal[x]
    reopened: dict[int, int] = {}

    def shift_into(pair_weights: dict[int, float]) -> bool:
        """Move mass toward the given pairs along a marginal-preserving ray.

        Each target pair gains its weight's worth of mass withdrawn
        proportionally from the rest of its outcome's row; the step length
        comes from an exact line search, so this only returns True when the
        objective strictly improved.
        """
        d = np.zeros(n_pairs)
        for p, w in pair_weights.items():
            if w <= 0:
                continue
            x = int(index.pair_outcome[p])
            row = index.outcome_pairs[x]
            d[p] += w
            d[row] -= w * v[row] / float(v[row].sum())
        neg = d < 0
        if not neg.any():
            return False
        hi = 0.999999 * float(np.min(-v[neg] / d[neg]))
        if hi <= 0:
            return False
        alpha = _line_search(game, spec, v, d, hi)
        trial = np.maximum(v + alpha * d, 0.0)
        if _value(game, spec, trial) <= _value(game, spec, v) + 1e-15:
            return False
        v[:] = trial
        support[:] |= v > _DROP_EPS
        _renormalize_rows(game, v)
        return True

    for _ in range(120):
        s_idx = np.flatnonzero(support)
        g = _gradient(game, spec, v, 1e-300)
        sums = _message_sums(game, v)

        # Multiplier estimate and Newton KKT system on the support.
        local = {int(p): i for i, p in enumerate(s_idx)}
        ns = len(s_idx)
        H = np.zeros((ns, ns))
        for m in range(game.n_messages):
            sl = index.message_slice(m)
            pos = [p for p in range(sl.start, sl.stop) if support[p]]
            if not pos or sums[m] <= 0:
                continue
            block = _hessian_block(spec, v[pos], index.pair_outcome[pos])
            ii = [local[p] for p in pos]
            H[np.ix_(ii, ii)] += block
        A = np.zeros((game.n_outcomes, ns))
        for x in range(game.n_outcomes):
            for p in index.outcome_pairs[x]:
                if support[p]:
                    A[x, local[int(p)]] = 1.0
        kkt = np.block([[H, A.T], [A, np.zeros((game.n_outcomes, game.n_outcomes))]])
        rhs = np.concatenate([-g[s_idx], np.zeros(game.n_outcomes)])
        try:
            sol = np.linalg.solve(kkt, rhs)
            if not np.all(np.isfinite(sol)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        d = sol[:ns]
        if not np.all(np.isfinite(d)):
            d = np.zeros(ns)

        if float(np.max(np.abs(d), initial=0.0)) < 1e-13:
            # Stationary on the current support: revisit the active set.
            lam = np.empty(game.n_outcomes)
            for x in range(game.n_outcomes):
                pos = [p for p in index.outcome_pairs[x] if support[p]]
                mass = v[pos]
                lam[x] = float(g[pos] @ mass / mass.sum()) if mass.sum() > 0 else float(np.max(g[pos]))
            targets = {
                p: g[p] - lam[int(index.pair_outcome[p])]
                for p in range(n_pairs)
                if not support[p]
                and sums[int(index.pair_message[p])] > game.tol.support
                and g[p] > lam[int(index.pair_outcome[p])] + 1e-10
            }
            changed = bool(targets) and shift_into(targets)
            if not changed:
                for m in range(game.n_messages):
                    if sums[m] > game.tol.support or reopened.get(m, 0) >= 4:
                        continue
                    excess, point = _dome_violation(spec, lam, index.message_members(m), game.n_outcomes)
                    if excess > 1e-10:
                        reopened[m] = reopened.get(m, 0) + 1
                        sl = index.message_slice(m)
                        weights = {
                            p: float(point[int(index.pair_outcome[p])])
                            for p in range(sl.start, sl.stop)
                        }
                        if shift_into(weights):
                            changed = True
                            break
            if not changed:
                break
            continue

        slope = float(g[s_idx] @ d)
        if slope <= 0:
            # Fall back to the projected gradient when curvature misleads.
            d = g[s_idx].copy()
            for x in range(game.n_outcomes):
                ii = [local[int(p)] for p in index.outcome_pairs[x] if support[p]]
                d[ii] -= np.mean(d[ii])
            slope = float(g[s_idx] @ d)
            if slope <= 1e-15:
                break
        neg = d < 0
        alpha_max = float(np.min(-v[s_idx][neg] / d[neg])) if neg.any() else 1.0
        alpha = min(1.0, alpha_max)
        f0 = _value(game, spec, v)
        accepted = False
        for _ in range(40):
            trial = v.copy()
            trial[s_idx] = np.maximum(trial[s_idx] + alpha * d, 0.0)
            f1 = _value(game, spec, trial)
            if f1 >= f0 + 1e-4 * alpha * slope or f1 >= f0:
                v = trial
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        dropped = support & (v < _DROP_EPS)
        if dropped.any():
            v[dropped] = 0.0
            support &= ~dropped
            for x in range(game.n_outcomes):
                pos = index.outcome_pairs[x]
                if not support[pos].any():
                    best = pos[int(np.argmax(v0[pos]))]
                    support[best] = True
                    v[best] = game.marginal[x]
        _renormalize_rows(game, v)

    return _renormalize_rows(game, v)


def _solve_concave(game: Game, opts: SolverOptions) -> SolveReport:
    spec = game.loss
    best = None
    total_iters = 0
    remaining = opts.max_iterations
    for r in range(opts.restarts):
        if r == 0:
            assignment = tuple(0 for _ in range(game.n_outcomes))
        else:
            rng = np.random.default_rng([opts.seed, r])
            assignment = tuple(int(rng.integers(game.degree(x))) for x in range(game.n_outcomes))
        v = _vertex(game, assignment)
        gap = np.inf
        residuals: dict = {}
        budget = min(remaining, 150)
        for round_ in range(4):
            if budget > 0:
                v, gap, used = _frank_wolfe(game, spec, v, opts, budget, assignment if round_ == 0 else None)
                total_iters += used
                remaining -= used
            v = _polish(game, spec, v, opts)
            lam = _extract_kt(game, spec, v)
            residuals = _certificate_residuals(game, spec, v, lam)
            if residuals["kt_residual"] <= opts.certificate_tolerance or gap <= opts.value_tolerance:
                break
            budget = min(remaining, 600 * (round_ + 1))
            if budget <= 0:
                break
        value = _value(game, spec, v)
        if best is None or value > best[0]:
            best = (value, v, lam, residuals, gap)
    value, v, lam, residuals, gap = best
    residuals = dict(residuals)
    residuals["fw_gap"] = gap if np.isfinite(gap) else float("inf")
    converged = (
        residuals["kt_residual"] <= opts.certificate_tolerance
        or gap <= opts.value_tolerance
    )
    strategy = QuizStrategy(game, v)
    return SolveReport(
        strategy=strategy,
        kt=KtVector(lam),
        value=expected_entropy(game, strategy),
        iterations=total_iters,
        converged=bool(converged),
        residuals=residuals,
    )


def _solve_linear_entropy(game: Game, opts: SolverOptions) -> SolveReport:
    """Exact LP for losses whose entropy is a minimum of linear functions.

    Variables are the joint masses plus one height per message equal to the
    cheapest pure-response cost against that message's column; the duals of
    the marginal constraints are a certificate vector.
    """
    spec = game.loss
    n, n_pairs, n_msgs = game.n_outcomes, game.n_pairs, game.n_messages
    A = _losses.effective_response_matrix(spec, n)
    n_var = n_pairs + n_msgs
    c = np.zeros(n_var)
    c[n_pairs:] = -1.0
    a_ub = np.zeros((n_msgs * n, n_var))
    for m in range(n_msgs):
        sl = game.index.message_slice(m)
        members = game.index.pair_outcome[sl]
        for xp in range(n):
            row = m * n + xp
            a_ub[row, n_pairs + m] = 1.0
            a_ub[row, sl.start : sl.stop] = -A[members, xp]
    a_eq = np.zeros((n, n_var))
    for x in range(n):
        a_eq[x, game.index.outcome_pairs[x]] = 1.0
    bounds = [(0, None)] * n_pairs + [(None, None)] * n_msgs
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(n_msgs * n),
        A_eq=a_eq,
        b_eq=game.marginal,
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        raise DidNotConverge(f"linear program failed: {res.message}")
    v = np.maximum(res.x[:n_pairs], 0.0)
    _renormalize_rows(game, v)
    lam = -np.asarray(res.eqlin.marginals, dtype=float)
    strategy = QuizStrategy(game, v)
    value = expected_entropy(game, strategy)
    marg = float(np.max(np.abs(a_eq[:, :n_pairs] @ v - game.marginal)))
    residuals = {
        "marginal_residual": marg,
        "lp_objective_gap": abs(value - (-float(res.fun))),
        "kt_residual": abs(float(game.marginal @ lam) - value),
    }
    return SolveReport(
        strategy=strategy,
        kt=KtVector(lam),
        value=value,
        iterations=int(getattr(res, "nit", 0) or 0),
        converged=True,
        residuals=residuals,
    )


def solve_quizmaster(game: Game, opts: SolverOptions | None = None) -> SolveReport:
    """Maximize expected generalized entropy over the quizmaster's polytope.

    Returns the best strategy found with a candidate certificate vector and
    convergence diagnostics; ``converged`` is False when neither the
    conditional-gradient gap nor the certificate residual reached tolerance
    within the iteration budget.
    """
    opts = opts or SolverOptions()
    spec = game.loss
    if _losses.is_linear_entropy(spec):
        return _solve_linear_entropy(game, opts)
    if _losses.is_proper(spec):
        return _solve_concave(game, opts)
    raise UnsupportedLoss(f"no solver route for loss kind {spec.kind!r}")


def solve_rcar(
    outcomes: Iterable[str],
    messages: Iterable[Iterable[object]],
    marginal: Iterable[float],
    opts: SolverOptions | None = None,
) -> tuple[RcarVector, QuizStrategy]:
    """Loss-free conditional-probability vector for a message structure.

    Solves the logarithmic-loss instance and reads off, per outcome, the
    shared conditional probability across all messages the optimal strategy
    uses; every message's entries then sum to at most 1.
    """
    opts = opts or SolverOptions()
    game = make_game(outcomes, messages, marginal, _losses.logarithmic())
    report = solve_quizmaster(game, opts)
    if not report.converged:
        raise DidNotConverge("logarithmic-loss solve did not converge")
    mass = report.strategy.message_mass()
    used = mass > game.tol.support
    q = np.empty(game.n_outcomes)
    for x in range(game.n_outcomes):
        covering = [int(game.index.pair_message[p]) for p in game.index.outcome_pairs[x]]
        total = float(sum(mass[m] for m in covering if used[m]))
        if total <= 0:
            raise DidNotConverge(f"outcome {game.outcomes[x]!r} has no used message")
        q[x] = game.marginal[x] / total
    excess = max(
        (float(q[list(members)].sum()) - 1.0 for members in game.messages), default=0.0
    )
    if excess > opts.certificate_tolerance:
        raise DidNotConverge(f"message sums exceed 1 by {excess}")
    if excess > 0:
        q /= 1.0 + excess
    return RcarVector.checked(q, game, tol=1e-9), report.strategy


def _min_slack_linear(game: Game, members, lam: np.ndarray) -> tuple[np.ndarray, float]:
    """Min-slack prediction for 0-1/matrix kinds via a small LP."""
    n = game.n_outcomes
    A = _losses.effective_response_matrix(game.loss, n)
    members = list(members)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.zeros((len(members), n + 1))
    b_ub = np.zeros(len(members))
    for i, x in enumerate(members):
        a_ub[i, :n] = A[x]
        a_ub[i, -1] = -1.0
        b_ub[i] = lam[x]
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise NoFeasibleResponse(f"response LP failed: {res.message}")
    return np.maximum(res.x[:n], 0.0), float(res.x[-1])


def _min_slack_proper(game: Game, members, lam: np.ndarray) -> tuple[np.ndarray, float]:
    """Prediction minimizing the worst certificate excess on a message."""
    spec = game.loss
    n = game.n_outcomes
    members = np.asarray(sorted(members), dtype=int)
    k = len(members)
    if spec.kind == _losses.LOGARITHMIC:
        a, b = _losses.affine_params(spec)
        adj = lam[members] - (b[members] if b is not None else 0.0)
        weights = np.exp(-adj / a)
        total = float(weights.sum())
        Q = np.zeros(n)
        Q[members] = weights / total
        return Q, a * float(np.log(total))

    def slack_rows(rows_k: np.ndarray) -> np.ndarray:
        full = np.zeros((rows_k.shape[0], n))
        full[:, members] = rows_k
        worst = np.full(rows_k.shape[0], -np.inf)
        for x in members:
            worst = np.maximum(worst, _losses._loss_rows(spec, int(x), full) - lam[x])
        return worst

    if k == 1:
        Q = np.zeros(n)
        Q[members[0]] = 1.0
        return Q, float(slack_rows(np.ones((1, 1)))[0])

    def epigraph(z: np.ndarray) -> float:
        return z[-1]

    cons = [{"type": "eq", "fun": lambda z: float(np.sum(z[:-1]) - 1.0)}]
    for x in members:
        def excess(z, x=int(x)):
            full = np.zeros(n)
            full[members] = np.maximum(z[:-1], 0.0)
            return float(lam[x] + z[-1] - _losses.loss(spec, x, full))

        cons.append({"type": "ineq", "fun": excess})
    z0 = np.concatenate([np.full(k, 1.0 / k), [1.0]])
    best_Q, best_slack = None, np.inf
    res = minimize(
        epigraph,
        z0,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * k + [(-50.0, 50.0)],
        constraints=cons,
        options={"maxiter": 200, "ftol": 1e-12},
    )
    if res.success:
        zq = np.maximum(res.x[:-1], 0.0)
        zq /= zq.sum()
        cand = float(slack_rows(zq[None, :])[0])
        best_Q, best_slack = zq, cand
    levels = {2: 800, 3: 60, 4: 25}.get(k, 10)
    grid = simplex_grid(k, levels)
    vals = slack_rows(grid)
    gbest = int(np.argmin(vals))
    point, val = refine_extremum(slack_rows, grid[gbest], rounds=35, step0=1.0 / levels, maximize=False)
    if val < best_slack:
        best_Q, best_slack = point, float(val)
    Q = np.zeros(n)
    Q[members] = best_Q
    return Q, best_slack


def solve_contestant(game: Game, report: SolveReport) -> ContestantStrategy:
    """Worst-case optimal predictions, one per message, from a solved game.

    Proper losses answer used messages with the quizmaster's conditional; all
    other responses realize the certificate heights, found per message by
    minimizing the worst excess over the message's outcomes.
    """
    spec = game.loss
    if _losses.is_hard(spec):
        raise NoFeasibleResponse(
            "hard losses cannot realize their certificates; use solve_hard01_contestant"
        )
    lam = report.kt.values
    tol = max(game.tol.certificate, 10 * report.residuals.get("kt_residual", 0.0))
    used = report.strategy.used_messages()
    rows = np.zeros((game.n_messages, game.n_outcomes))
    for m in range(game.n_messages):
        members = game.messages[m]
        if _losses.is_linear_entropy(spec):
            Q, slack = _min_slack_linear(game, members, lam)
        elif used[m]:
            rows[m] = report.strategy.conditional(m)
            continue
        else:
            Q, slack = _min_slack_proper(game, members, lam)
        if slack > tol:
            raise NoFeasibleResponse(
                f"cannot realize certificate on message {game.message_label(m)}"
                f" (slack {slack:.3g})"
            )
        rows[m] = Q
    return ContestantStrategy(game, rows)


def solve_hard01_contestant(game: Game) -> StableSetResult:
    """Exact max-weight stable set strategy for hard 0-1 loss.

    Two outcomes conflict when they share a message; a branch-and-bound
    search finds the heaviest conflict-free set S, and the strategy answers
    every message containing a member of S with that member.
    """
    if game.loss.kind != _losses.HARD01:
        raise UnsupportedLoss("stable-set strategy applies to hard 0-1 loss")
    n = game.n_outcomes
    if n > 30:
        raise TooLarge(f"{n} outcomes exceeds the exhaustive bound of 30")
    adj = [0] * n
    for members in game.messages:
        for x in members:
            for x2 in members:
                if x2 != x:
                    adj[x] |= 1 << x2
    weights = game.marginal
    order = sorted(range(n), key=lambda x: -weights[x])
    best_weight = -1.0
    best_set = 0

    def dfs(avail: int, current: int, cur_w: float, rest_w: float) -> None:
        nonlocal best_weight, best_set
        if cur_w > best_weight:
            best_weight = cur_w
            best_set = current
        if cur_w + rest_w <= best_weight:
            return
        for x in order:
            bit = 1 << x
            if avail & bit:
                avail &= ~bit
                dfs(avail & ~adj[x], current | bit, cur_w + weights[x], rest_w - weights[x])
                rest_w -= weights[x]
                if cur_w + rest_w <= best_weight:
                    return

    dfs((1 << n) - 1, 0, 0.0, float(weights.sum()))
    stable = frozenset(x for x in range(n) if best_set & (1 << x))
    rows = np.zeros((game.n_messages, n))
    for m, members in enumerate(game.messages):
        inside = sorted(stable.intersection(members))
        rows[m, inside[0] if inside else members[0]] = 1.0
    weight = float(sum(weights[x] for x in stable))
    return StableSetResult(
        stable_set=stable,
        weight=weight,
        strategy=ContestantStrategy(game, rows),
        worst_case=1.0 - weight,
    )


def oracle_grid(game: Game, resolution: int) -> tuple[float, QuizStrategy]:
    """Exhaustive grid search over quizmaster strategies.

    Each outcome's mass split is quantized to multiples of p_x / resolution;
    all combinations are enumerated and scored.  Ground-truth oracle for
    small games; raises TooLarge beyond 10^7 grid points.
    """
    spec = game.loss
    counts = [n_compositions(resolution, game.degree(x)) for x in range(game.n_outcomes)]
    total = 1
    for cnt in counts:
        total *= cnt
        if total > 10**7:
            raise TooLarge(f"grid would need {total}+ points (limit 10^7)")
    tables = [
        compositions(resolution, game.degree(x)) * (game.marginal[x] / resolution)
        for x in range(game.n_outcomes)
    ]
    best_val = -np.inf
    best_row: np.ndarray | None = None
    batch = 200_000
    slices = [game.index.message_slice(m) for m in range(game.n_messages)]
    members = [game.index.message_members(m) for m in range(game.n_messages)]
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total))
        multi = np.unravel_index(idx, counts)
        V = np.empty((len(idx), game.n_pairs))
        for x in range(game.n_outcomes):
            V[:, game.index.outcome_pairs[x]] = tables[x][multi[x]]
        F = np.zeros(len(idx))
        for m in range(game.n_messages):
            F += _losses._mass_entropy(spec, V[:, slices[m]], members[m], game.n_outcomes)
        arg = int(np.argmax(F))
        if F[arg] > best_val:
            best_val = float(F[arg])
            best_row = V[arg].copy()
    strategy = QuizStrategy(game, _renormalize_rows(game, best_row))
    return best_val, strategy
