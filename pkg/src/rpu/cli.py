"""Command line front end.

Game files are JSON objects with ``outcomes`` (names), ``messages`` (lists
of outcome names), ``marginal`` (numbers; fraction strings like "1/3" are
parsed exactly), and an optional ``loss`` object ``{"kind": ..., "matrix":
..., "weights": ..., "affine": {"scale": ..., "offsets": ...}}``.

Exit codes: 0 success, 2 file/validation errors, 3 solver or verification
failures.  The default seed is 0, overridden by the RPU_SEED environment
variable, overridden by --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources

import numpy as np

from . import losses as _losses
from .game import (
    ContestantStrategy,
    Game,
    GameValidationError,
    QuizStrategy,
    loss_from_dict,
    loss_to_dict,
    make_game,
)
from .solver import (
    DidNotConverge,
    NoFeasibleResponse,
    SolverOptions,
    TooLarge,
    UnsupportedLoss,
    oracle_grid,
    solve_contestant,
    solve_hard01_contestant,
    solve_quizmaster,
    solve_rcar,
)
from .structure import (
    ConstructionFailed,
    NotApplicable,
    classify,
    counterexample_marginal,
    decompose,
)
from .verify import check_kt, check_nash_gap, check_rcar

_SOLVER_ERRORS = (
    DidNotConverge,
    UnsupportedLoss,
    NoFeasibleResponse,
    TooLarge,
    NotApplicable,
    ConstructionFailed,
)


class VerificationFailed(RuntimeError):
    pass


def bundled_game_path(name: str) -> str:
    """Filesystem path of a bundled example game file."""
    ref = resources.files("rpu") / "games" / f"{name}.json"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled game named {name!r}")
    return str(ref)


def bundled_games() -> list[str]:
    ref = resources.files("rpu") / "games"
    return sorted(p.name[:-5] for p in ref.iterdir() if p.name.endswith(".json"))


def _parse_number(value) -> float:
    if isinstance(value, str):
        return float(Fraction(value))
    if isinstance(value, (int, float)):
        return float(value)
    raise GameValidationError(f"cannot parse number {value!r}")


def load_game_file(path: str) -> tuple[Game, dict]:
    """Parse and validate a game file, returning (game, normalized dict)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise GameValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GameValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise GameValidationError(f"{path}: expected a JSON object")
    for key in ("outcomes", "messages", "marginal"):
        if key not in raw:
            raise GameValidationError(f"{path}: missing field {key!r}")
    marginal = [_parse_number(v) for v in raw["marginal"]]
    loss = loss_from_dict(raw["loss"]) if raw.get("loss") else _losses.logarithmic()
    game = make_game(raw["outcomes"], raw["messages"], marginal, loss)
    normal = {
        "outcomes": list(game.outcomes),
        "messages": [[game.outcomes[x] for x in m] for m in game.messages],
        "marginal": [float(v) for v in game.marginal],
        "loss": loss_to_dict(game.loss),
    }
    return game, normal


def _apply_loss_flag(game: Game, flag: str | None) -> Game:
    if flag is None:
        return game
    return game.with_loss(loss_from_dict({"kind": flag}))


def _options(args) -> SolverOptions:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("RPU_SEED", "0"))
    return SolverOptions(
        seed=seed,
        restarts=args.restarts,
        certificate_tolerance=args.tol,
    )


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def format_strategy_table(game: Game, strategy: QuizStrategy, corner: str = "P*") -> str:
    """Render a strategy as a table: message rows, outcome columns, marginal footer."""
    dense = strategy.to_dense()
    incident = np.zeros_like(dense, dtype=bool)
    incident[game.index.pair_message, game.index.pair_outcome] = True
    header = [corner] + list(game.outcomes)
    rows = [header]
    for m in range(game.n_messages):
        cells = [f"y{m + 1}"]
        for x in range(game.n_outcomes):
            cells.append(_fmt(dense[m, x]) if incident[m, x] else "-")
        rows.append(cells)
    rows.append(["p_x"] + [_fmt(v) for v in game.marginal])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
    legend = "; ".join(f"y{m + 1} = {game.message_label(m)}" for m in range(game.n_messages))
    return "\n".join(lines) + "\n" + legend


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            if not args.quiet or line.startswith(("value", "q =", "PASS", "FAIL")):
                print(line)


def _structure_summary(game: Game) -> str:
    cls = classify(game)
    parts = [
        f"{game.n_outcomes} outcomes",
        f"{game.n_messages} messages",
        "connected" if cls.is_connected else f"{len(cls.components)} components",
        "graph" if cls.is_graph else "not a graph",
        "matroid" if cls.is_matroid else "not a matroid",
    ]
    if cls.is_partition:
        parts.append("partition")
    if cls.has_dominated:
        parts.append("has dominated messages")
    return ", ".join(parts)


def cmd_validate(args) -> int:
    game, normal = load_game_file(args.path)
    payload = {"command": "validate", "game": normal, "summary": _structure_summary(game)}
    _emit(args, payload, [f"{args.path}: valid game", _structure_summary(game)])
    return 0


def _contestant_rows(contestant: ContestantStrategy) -> list[list[float]]:
    return [[float(v) for v in row] for row in contestant.per_message]


def cmd_solve(args) -> int:
    game, normal = load_game_file(args.path)
    game = _apply_loss_flag(game, args.loss)
    normal["loss"] = loss_to_dict(game.loss)
    opts = _options(args)
    report = solve_quizmaster(game, opts)
    lines = [f"value = {report.value!r}"]
    lines.append(format_strategy_table(game, report.strategy))
    lines.append("kt = [" + ", ".join(_fmt(v) for v in report.kt.values) + "]")
    cert = check_kt(game, report.strategy, report.kt, args.tol)
    payload = {
        "command": "solve",
        "game": normal,
        "options": {"seed": opts.seed, "restarts": opts.restarts, "tol": opts.certificate_tolerance},
        "value": report.value,
        "iterations": report.iterations,
        "converged": report.converged,
        "residuals": {k: float(v) for k, v in report.residuals.items()},
        "strategy": [[float(v) for v in row] for row in report.strategy.to_dense()],
        "kt": [float(v) for v in report.kt.values],
        "certificate": {"passed": cert.passed, "max_violation": cert.max_violation},
    }
    if _losses.is_hard(game.loss):
        stable = solve_hard01_contestant(game)
        gap = check_nash_gap(game, report.strategy, stable.strategy)
        lines.append(f"maximin value = {report.value!r}")
        lines.append(
            "stable set = {"
            + ", ".join(game.outcomes[x] for x in sorted(stable.stable_set))
            + f"}}, minimax worst-case = {stable.worst_case!r}"
        )
        lines.append(f"nash gap = {gap!r}" + (" (no Nash equilibrium)" if gap > args.tol else ""))
        payload["stable_set"] = sorted(game.outcomes[x] for x in stable.stable_set)
        payload["minimax"] = stable.worst_case
        payload["nash_gap"] = gap
        payload["contestant"] = _contestant_rows(stable.strategy)
    else:
        contestant = solve_contestant(game, report)
        gap = check_nash_gap(game, report.strategy, contestant)
        lines.append("contestant responses:")
        for m in range(game.n_messages):
            lines.append(
                f"  y{m + 1}: " + " ".join(_fmt(v) for v in contestant.per_message[m])
            )
        lines.append(f"nash gap = {gap!r}")
        payload["nash_gap"] = gap
        payload["contestant"] = _contestant_rows(contestant)
    lines.append(
        ("PASS" if cert.passed else "FAIL")
        + f" certificate check (max violation {cert.max_violation:.3g})"
    )
    if not report.converged:
        lines.append("warning: solver did not converge")
    _emit(args, payload, lines)
    if not report.converged:
        return 3
    return 0


def cmd_rcar(args) -> int:
    game, normal = load_game_file(args.path)
    opts = _options(args)
    rcar, strategy = solve_rcar(game.outcomes, game.messages, game.marginal, opts)
    sums = [float(rcar.q[list(m)].sum()) for m in game.messages]
    slack = [m for m, s in enumerate(sums) if s < 1 - 1e-9]
    lines = ["q = [" + ", ".join(_fmt(v) for v in rcar.q) + "]"]
    for m, s in enumerate(sums):
        lines.append(f"  y{m + 1} = {game.message_label(m)}: sum = {_fmt(s)}")
    if slack:
        lines.append(
            "messages with sum < 1 (an optimal strategy can leave them unused): "
            + ", ".join(f"y{m + 1}" for m in slack)
        )
    lines.append(format_strategy_table(game, strategy, corner="P"))
    payload = {
        "command": "rcar",
        "game": normal,
        "q": [float(v) for v in rcar.q],
        "message_sums": sums,
        "strategy": [[float(v) for v in row] for row in strategy.to_dense()],
    }
    _emit(args, payload, lines)
    return 0


def cmd_classify(args) -> int:
    game, normal = load_game_file(args.path)
    cls = classify(game)
    payload = {
        "command": "classify",
        "game": normal,
        "is_partition": cls.is_partition,
        "is_graph": cls.is_graph,
        "is_matroid": cls.is_matroid,
        "is_connected": cls.is_connected,
        "has_dominated": cls.has_dominated,
        "components": [[game.outcomes[x] for x in comp] for comp in cls.components],
    }
    lines = [
        f"graph: {'yes' if cls.is_graph else 'no'}",
        f"matroid: {'yes' if cls.is_matroid else 'no'}",
        f"partition: {'yes' if cls.is_partition else 'no'}",
        f"connected: {'yes' if cls.is_connected else 'no'}",
        f"dominated messages: {'yes' if cls.has_dominated else 'no'}",
    ]
    _emit(args, payload, lines)
    return 0


def cmd_decompose(args) -> int:
    game, normal = load_game_file(args.path)
    parts = decompose(game)
    lines = [f"{len(parts)} component(s)"]
    comp_payload = []
    for i, (sub, mapping, weight) in enumerate(parts):
        names = [game.outcomes[x] for x in mapping]
        lines.append(
            f"  component {i + 1}: outcomes {{{', '.join(names)}}}, weight {_fmt(weight)}"
        )
        comp_payload.append(
            {
                "outcomes": names,
                "weight": weight,
                "marginal": [float(v) for v in sub.marginal],
                "messages": [[sub.outcomes[x] for x in m] for m in sub.messages],
            }
        )
    payload = {"command": "decompose", "game": normal, "components": comp_payload}
    _emit(args, payload, lines)
    return 0


def cmd_counterexample(args) -> int:
    game, normal = load_game_file(args.path)
    opts = _options(args)
    marginal, rcar, (m_uni, m_non) = counterexample_marginal(game)
    log_game = make_game(game.outcomes, game.messages, marginal, _losses.logarithmic())
    brier_game = make_game(game.outcomes, game.messages, marginal, _losses.brier())
    log_rep = solve_quizmaster(log_game, opts)
    brier_rep = solve_quizmaster(brier_game, opts)
    log_check = check_rcar(log_rep.strategy, rcar, args.tol)
    brier_check = check_rcar(brier_rep.strategy, rcar, args.tol)
    lines = [
        "marginal = [" + ", ".join(_fmt(v) for v in marginal) + "]",
        "q = [" + ", ".join(_fmt(v) for v in rcar.q) + "]",
        f"witness messages: y{m_uni + 1} = {game.message_label(m_uni)} (uniform), "
        f"y{m_non + 1} = {game.message_label(m_non)} (not uniform)",
        f"logarithmic optimum passes certificate: {log_check.passed}",
        f"squared-error optimum violates it by {brier_check.max_violation:.3g}"
        + (" (loss dependence confirmed)" if not brier_check.passed else ""),
    ]
    payload = {
        "command": "counterexample",
        "game": normal,
        "marginal": [float(v) for v in marginal],
        "q": [float(v) for v in rcar.q],
        "witness": [m_uni, m_non],
        "log_rcar_passed": log_check.passed,
        "brier_rcar_violation": brier_check.max_violation,
    }
    _emit(args, payload, lines)
    if not log_check.passed or brier_check.passed:
        raise VerificationFailed("counterexample did not separate the two losses")
    return 0


def cmd_oracle(args) -> int:
    game, normal = load_game_file(args.path)
    game = _apply_loss_flag(game, args.loss)
    opts = _options(args)
    value, _ = oracle_grid(game, args.resolution)
    report = solve_quizmaster(game, opts)
    lines = [
        f"oracle value = {value!r} (resolution {args.resolution})",
        f"solver value = {report.value!r}",
        f"difference = {report.value - value!r}",
    ]
    payload = {
        "command": "oracle",
        "game": normal,
        "resolution": args.resolution,
        "oracle_value": value,
        "solver_value": report.value,
        "difference": report.value - value,
    }
    _emit(args, payload, lines)
    return 0


def cmd_verify(args) -> int:
    game, normal = load_game_file(args.path)
    game = _apply_loss_flag(game, args.loss)
    opts = _options(args)
    report = solve_quizmaster(game, opts)
    cert = check_kt(game, report.strategy, report.kt, args.tol)
    checks = {"kt_certificate": cert.passed}
    lines = [
        f"value = {report.value!r}",
        ("PASS" if cert.passed else "FAIL")
        + f" certificate check (max violation {cert.max_violation:.3g})",
    ]
    gap = None
    if not _losses.is_hard(game.loss):
        contestant = solve_contestant(game, report)
        gap = check_nash_gap(game, report.strategy, contestant)
        ok = -1e-9 <= gap <= max(args.tol, 1e-5)
        checks["nash_gap"] = ok
        lines.append(("PASS" if ok else "FAIL") + f" nash gap = {gap!r}")
    payload = {
        "command": "verify",
        "game": normal,
        "value": report.value,
        "certificate": {"passed": cert.passed, "max_violation": cert.max_violation},
        "nash_gap": gap,
        "checks": checks,
    }
    _emit(args, payload, lines)
    if not all(checks.values()) or not report.converged:
        raise VerificationFailed("verification failed")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpu", description="Robust probability updating under coarse data"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path", help="game file (JSON)")
        p.add_argument("--loss", help="override the file's loss kind")
        p.add_argument("--tol", type=float, default=1e-6, help="certificate tolerance")
        p.add_argument("--restarts", type=int, default=5)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--resolution", type=int, default=100, help="oracle grid levels")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--quiet", action="store_true", help="essential output only")
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, "check a game file")
    add("solve", cmd_solve, "worst-case optimal strategies and certificates")
    add("rcar", cmd_rcar, "loss-free conditional-probability vector")
    add("classify", cmd_classify, "structural classification")
    add("decompose", cmd_decompose, "connected components")
    add("counterexample", cmd_counterexample, "loss-dependent marginal construction")
    add("oracle", cmd_oracle, "brute-force grid value vs solver value")
    add("verify", cmd_verify, "solve and check all certificates")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GameValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (*_SOLVER_ERRORS, VerificationFailed) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
