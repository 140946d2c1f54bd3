import itertools
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import (
    MONTY_JOINT,
    example3,
    fairdie,
    four_cycle,
    hard01_triangle,
    message_discard,
    monty,
    outcome_discard,
    random_game,
    triangle_discard,
)
from rpu import (
    NoFeasibleResponse,
    SolverOptions,
    TooLarge,
    brier,
    check_kt,
    check_nash_gap,
    expected_entropy,
    hard01,
    logarithmic,
    loss,
    make_game,
    oracle_grid,
    randomized01,
    solve_contestant,
    solve_hard01_contestant,
    solve_quizmaster,
    solve_rcar,
    worst_case_loss,
)

FAST = SolverOptions(restarts=2)
LOG23 = -math.log(2 / 3)
LOG13 = -math.log(1 / 3)


class TestQuizmasterGolden:
    def test_monty_log(self):
        rep = solve_quizmaster(monty(), FAST)
        assert rep.converged
        assert np.allclose(rep.strategy.joint, MONTY_JOINT, atol=1e-8)
        assert np.allclose(rep.kt.values, [LOG23, LOG13, LOG23], atol=1e-8)
        assert rep.value == pytest.approx(math.log(3) - (2 / 3) * math.log(2), abs=1e-9)

    def test_monty_brier(self):
        rep = solve_quizmaster(monty(brier()), FAST)
        assert np.allclose(rep.strategy.joint, MONTY_JOINT, atol=1e-8)
        assert np.allclose(rep.kt.values, [2 / 9, 8 / 9, 2 / 9], atol=1e-8)

    def test_monty_randomized01(self):
        rep = solve_quizmaster(monty(randomized01()), FAST)
        assert rep.value == pytest.approx(1 / 3, abs=1e-9)
        assert np.allclose(rep.kt.values, [0.0, 1.0, 0.0], atol=1e-8)

    def test_example3_log(self):
        rep = solve_quizmaster(example3(), FAST)
        assert rep.strategy.mass(1, 0) == pytest.approx(1 / 6, abs=1e-8)
        dense = rep.strategy.to_dense()
        assert np.allclose(dense[0], [1 / 3, 1 / 6, 0, 0], atol=1e-8)
        assert np.allclose(dense[1], [0, 1 / 6, 1 / 6, 1 / 6], atol=1e-8)

    def test_example3_brier_matches_equalization_root(self):
        # Independent oracle: with t = P(x2, y1), optimality forces the
        # squared-error loss of x2 to agree across the two conditionals.
        def gap(t):
            c1 = np.array([1 / 3, t, 0, 0]) / (1 / 3 + t)
            c2 = np.array([0, 1 / 3 - t, 1 / 6, 1 / 6]) / (2 / 3 - t)
            return loss(brier(), 1, c1) - loss(brier(), 1, c2)

        root = brentq(gap, 1e-6, 1 / 3 - 1e-6, xtol=1e-14)
        assert root == pytest.approx(11 / 3 - 2 * math.sqrt(3), abs=1e-10)
        rep = solve_quizmaster(example3(brier()), FAST)
        assert rep.strategy.mass(1, 0) == pytest.approx(root, abs=1e-7)
        assert rep.strategy.mass(1, 0) == pytest.approx(11 / 3 - 2 * math.sqrt(3), abs=1e-5)

    def test_message_discard_log(self):
        rep = solve_quizmaster(message_discard(), FAST)
        assert rep.strategy.message_mass()[1] <= 1e-8
        expect = [math.log(2), math.log(2), math.log(3), math.log(1.5)]
        assert np.allclose(rep.kt.values, expect, atol=1e-8)

    def test_outcome_discard_brier(self):
        rep = solve_quizmaster(outcome_discard(), FAST)
        dense = rep.strategy.to_dense()
        assert np.allclose(dense[0], [0.45, 0.05, 0, 0], atol=1e-8)
        assert np.allclose(dense[1], [0, 0.0, 0.25, 0.25], atol=1e-8)
        assert np.allclose(rep.kt.values, [0.02, 1.62, 0.5, 0.5], atol=1e-8)

    def test_hard01_triangle_value(self):
        rep = solve_quizmaster(hard01_triangle(), FAST)
        assert rep.value == pytest.approx(0.5, abs=1e-9)
        assert np.allclose(rep.kt.values, [0.5, 0.5, 0.5], atol=1e-8)

    def test_four_cycle_randomized01(self):
        rep = solve_quizmaster(four_cycle(), FAST)
        assert rep.value == pytest.approx(0.5, abs=1e-9)
        lam = rep.kt.values
        assert lam[0] == pytest.approx(lam[2], abs=1e-8)
        assert lam[1] == pytest.approx(lam[3], abs=1e-8)
        assert lam[0] + lam[1] == pytest.approx(1.0, abs=1e-8)

    def test_skewed_log_certificate(self):
        from rpu import skewed_log

        g = monty(skewed_log([1.0, 2.0, 1.0]))
        rep = solve_quizmaster(g, FAST)
        assert rep.converged
        assert check_kt(g, rep.strategy, rep.kt, 1e-6).passed

    def test_value_matches_entropy_of_strategy(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            g = random_game(rng, spec=brier())
            rep = solve_quizmaster(g, SolverOptions(restarts=1))
            assert rep.value == pytest.approx(
                expected_entropy(g, rep.strategy), abs=1e-9
            )


class TestMonotoneAscent:
    def test_objective_never_decreases(self):
        from rpu.solver import _frank_wolfe, _vertex

        rng = np.random.default_rng(1)
        for spec in (logarithmic(), brier()):
            g = random_game(rng, spec=spec, n_min=4, n_max=5)
            assignment = tuple(int(rng.integers(g.degree(x))) for x in range(g.n_outcomes))
            trace: list[float] = []
            _frank_wolfe(g, spec, _vertex(g, assignment), FAST, 80, assignment, trace=trace)
            diffs = np.diff(np.array(trace))
            assert np.all(diffs >= -1e-12)


class TestRcar:
    def test_fairdie(self):
        g = fairdie()
        q, strat = solve_rcar(g.outcomes, g.messages, g.marginal, FAST)
        assert np.allclose(q.q, [1 / 3, 1 / 3, 1 / 6, 1 / 6, 1 / 3, 1 / 3], atol=1e-9)

    def test_triangle_discard(self):
        g = triangle_discard()
        q, strat = solve_rcar(g.outcomes, g.messages, g.marginal, FAST)
        assert np.allclose(q.q, [0.4, 0.6, 0.4], atol=1e-9)
        assert q.q[0] + q.q[2] == pytest.approx(0.8, abs=1e-9)

    def test_strong_rcar_when_messages_have_private_outcomes(self):
        g = monty()
        q, _ = solve_rcar(g.outcomes, g.messages, g.marginal, FAST)
        for members in g.messages:
            assert q.q[list(members)].sum() == pytest.approx(1.0, abs=1e-8)

    def test_seed_independence(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            g = random_game(rng)
            qs = [
                solve_rcar(
                    g.outcomes, g.messages, g.marginal, SolverOptions(seed=s, restarts=1)
                )[0].q
                for s in range(5)
            ]
            for a, b in itertools.combinations(qs, 2):
                assert np.max(np.abs(a - b)) <= 1e-6


class TestContestant:
    def test_monty_log(self):
        g = monty()
        rep = solve_quizmaster(g, FAST)
        q = solve_contestant(g, rep)
        assert np.allclose(q.per_message[0], [2 / 3, 1 / 3, 0], atol=1e-8)
        assert np.allclose(q.per_message[1], [0, 1 / 3, 2 / 3], atol=1e-8)
        assert worst_case_loss(g, q) == pytest.approx(rep.value, abs=1e-8)

    def test_triangle_discard_unused_message(self):
        g = triangle_discard()
        rep = solve_quizmaster(g, FAST)
        q = solve_contestant(g, rep)
        resp = q.per_message[2]
        assert resp[1] == pytest.approx(0.0, abs=1e-9)
        assert 0.4 - 1e-6 <= resp[0] <= 0.6 + 1e-6
        lam = np.array(
            [max(loss(g.loss, x, q.per_message[m]) for m in range(3) if x in g.message_sets[m]) for x in range(3)]
        )
        assert check_kt(g, rep.strategy, lam, 1e-6).passed

    def test_four_cycle_randomized01(self):
        g = four_cycle()
        rep = solve_quizmaster(g, FAST)
        q = solve_contestant(g, rep)
        a = q.per_message[0][1]
        assert 0 - 1e-9 <= a <= 1 + 1e-9
        for m, members in enumerate(g.messages):
            row = q.per_message[m]
            assert row[list(members)].sum() == pytest.approx(1.0, abs=1e-8)
        lam = np.array(
            [
                max(loss(g.loss, x, q.per_message[m]) for m in range(4) if x in g.message_sets[m])
                for x in range(4)
            ]
        )
        assert check_kt(g, rep.strategy, lam, 1e-6).passed

    def test_hard_loss_refused(self):
        g = hard01_triangle()
        rep = solve_quizmaster(g, FAST)
        with pytest.raises(NoFeasibleResponse):
            solve_contestant(g, rep)


class TestHard01Contestant:
    def test_triangle(self):
        res = solve_hard01_contestant(hard01_triangle())
        assert len(res.stable_set) == 1
        assert res.weight == pytest.approx(1 / 3, abs=1e-12)
        assert res.worst_case == pytest.approx(2 / 3, abs=1e-12)
        assert worst_case_loss(hard01_triangle(), res.strategy) == pytest.approx(
            2 / 3, abs=1e-12
        )

    def test_singleton_partition(self):
        g = make_game(["a", "b", "c"], [["a"], ["b"], ["c"]], [0.2, 0.3, 0.5], hard01())
        res = solve_hard01_contestant(g)
        assert res.stable_set == frozenset({0, 1, 2})
        assert res.worst_case == pytest.approx(0.0, abs=1e-12)

    def test_four_cycle_against_bruteforce(self):
        g = four_cycle(hard01())
        res = solve_hard01_contestant(g)
        # independent enumeration of all stable sets
        adjacent = {
            (x1, x2)
            for members in g.messages
            for x1 in members
            for x2 in members
            if x1 != x2
        }
        best = 0.0
        for size in range(g.n_outcomes + 1):
            for combo in itertools.combinations(range(g.n_outcomes), size):
                if all((a, b) not in adjacent for a, b in itertools.combinations(combo, 2)):
                    best = max(best, sum(g.marginal[x] for x in combo))
        assert best == pytest.approx(0.5)
        assert res.weight == pytest.approx(best, abs=1e-12)
        assert res.stable_set in ({0, 2}, {1, 3})

    def test_too_large(self):
        n = 31
        g = make_game(
            [f"x{i}" for i in range(n)],
            [[f"x{i}"] for i in range(n)],
            np.full(n, 1.0 / n),
            hard01(),
        )
        with pytest.raises(TooLarge):
            solve_hard01_contestant(g)


class TestOracleGrid:
    def test_monty_log(self):
        val, strat = oracle_grid(monty(), 200)
        assert val == pytest.approx(math.log(3) - (2 / 3) * math.log(2), abs=1e-3)

    def test_partition_exact(self):
        g = make_game(["a", "b", "c"], [["a", "b"], ["c"]], [0.25, 0.25, 0.5])
        val, strat = oracle_grid(g, 10)
        assert val == pytest.approx(0.5 * math.log(2), abs=1e-12)
        assert np.allclose(strat.joint, [0.25, 0.25, 0.5])

    def test_example3_brier_near_table_value(self):
        val, strat = oracle_grid(example3(brier()), 400)
        assert strat.mass(1, 0) == pytest.approx(11 / 3 - 2 * math.sqrt(3), abs=5e-3)

    def test_too_large(self):
        g = fairdie()
        with pytest.raises(TooLarge):
            oracle_grid(g, 10000)

    def test_solver_matches_oracle(self):
        rng = np.random.default_rng(3)
        for spec in (logarithmic(), brier(), randomized01()):
            g = random_game(rng, spec=spec, n_min=3, n_max=4, max_messages=4)
            rep = solve_quizmaster(g, SolverOptions(restarts=1))
            dim = sum(g.degree(x) - 1 for x in range(g.n_outcomes))
            if dim <= 3:
                val, _ = oracle_grid(g, 120)
                assert rep.value >= val - 1e-9
                assert rep.value - val <= 1e-2


class TestDuality:
    def test_named_games_close_gap(self):
        for g in (monty(), monty(brier()), example3(), triangle_discard(), message_discard()):
            rep = solve_quizmaster(g, FAST)
            q = solve_contestant(g, rep)
            gap = check_nash_gap(g, rep.strategy, q)
            assert -1e-9 <= gap <= 1e-8

    def test_bundled_games_close_gap_under_each_loss(self):
        from rpu.cli import bundled_games, load_game_file, bundled_game_path

        opts = SolverOptions(restarts=1)
        for name in bundled_games():
            game, _ = load_game_file(bundled_game_path(name))
            for spec in (logarithmic(), brier(), randomized01()):
                g = game.with_loss(spec)
                rep = solve_quizmaster(g, opts)
                q = solve_contestant(g, rep)
                gap = check_nash_gap(g, rep.strategy, q)
                assert -1e-9 <= gap <= 1e-5, (name, spec.kind, gap)

    def test_decomposition_consistency(self):
        from rpu import decompose

        rng = np.random.default_rng(4)
        for _ in range(5):
            a = random_game(rng, n_min=2, n_max=3)
            b = random_game(rng, n_min=2, n_max=3)
            names = [f"a{o}" for o in a.outcomes] + [f"b{o}" for o in b.outcomes]
            msgs = [[f"a{a.outcomes[x]}" for x in m] for m in a.messages]
            msgs += [[f"b{b.outcomes[x]}" for x in m] for m in b.messages]
            marg = np.concatenate([0.4 * a.marginal, 0.6 * b.marginal])
            g = make_game(names, msgs, marg, brier())
            direct = solve_quizmaster(g, SolverOptions(restarts=1)).value
            combined = sum(
                w * solve_quizmaster(sub, SolverOptions(restarts=1)).value
                for sub, _, w in decompose(g)
            )
            assert direct == pytest.approx(combined, abs=1e-6)
