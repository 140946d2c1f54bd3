"""Robust probability updating under coarse data.

Solve the zero-sum game between a quizmaster who reveals a set of outcomes
and a contestant who must predict the true outcome from it: compute
worst-case optimal strategies for both sides, extract and independently
verify optimality certificates, analyze message structures, and expose the
update rule through scikit-learn style estimators and a CLI.
"""

from .game import (
    ContestantStrategy,
    DuplicateMessage,
    EmptyMessage,
    Game,
    GameValidationError,
    KtVector,
    MarginalNotNormalized,
    QuizStrategy,
    RcarVector,
    SolveReport,
    Tolerances,
    UncoveredOutcome,
    ZeroMarginal,
    ZeroMassMessage,
    conditional,
    expected_entropy,
    expected_loss,
    make_game,
    validate_game,
    worst_case_loss,
)
from .losses import (
    LossSpec,
    NonPositiveScale,
    affine_transform,
    best_response,
    brier,
    entropy,
    entropy_inner_min,
    hard01,
    is_symmetric_between,
    logarithmic,
    loss,
    matrix_loss,
    randomized01,
    skewed_log,
)
from .solver import (
    DidNotConverge,
    NoFeasibleResponse,
    SolverOptions,
    StableSetResult,
    TooLarge,
    UnsupportedLoss,
    oracle_grid,
    solve_contestant,
    solve_hard01_contestant,
    solve_quizmaster,
    solve_rcar,
)
from .structure import (
    Classification,
    ConstructionFailed,
    NotApplicable,
    classify,
    counterexample_marginal,
    decompose,
    is_graph_game,
    is_matroid,
    recombine,
    remove_dominated,
)
from .verify import (
    CertificateReport,
    brute_force_value,
    check_equalizer,
    check_kt,
    check_loss_exchange,
    check_nash_gap,
    check_rcar,
)
from .estimators import RcarUpdater, RobustUpdater

__version__ = "0.1.0"
