"""Exact solvers for two-player zero-sum matrix games.

Payoff matrices are plain float arrays holding the row player's payoff; the
column player receives the negation. The LP route (solve_game) is the
production path; oracle_solve_game is an independent enumeration-based
checker kept for cross-validation and must stay free of the LP machinery.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError
from .linprog import LinearProgram, LpStatus, solve_lp

ORACLE_MAX_SIDE = 5
_ORACLE_TOL = 1e-9
_STRATEGY_SUM_TOL = 1e-9


def as_payoff_matrix(game) -> np.ndarray:
    """Validate and return game as a float matrix (copy only when needed)."""
    A = np.asarray(game, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"payoff matrix must be 2-d and nonempty, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise InputError("payoff matrix contains non-finite entries")
    return A


def check_strategy(strategy, n_actions: int) -> np.ndarray:
    """Validate a mixed strategy over n_actions pure actions."""
    x = np.asarray(strategy, dtype=float)
    if x.shape != (n_actions,):
        raise DimensionError(f"strategy has shape {x.shape}, expected ({n_actions},)")
    if not np.isfinite(x).all() or (x < -_STRATEGY_SUM_TOL).any():
        raise InputError("strategy entries must be finite and nonnegative")
    if abs(float(x.sum()) - 1.0) > _STRATEGY_SUM_TOL:
        raise InputError(f"strategy entries sum to {x.sum()!r}, not 1")
    return x


def _normalized(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum()


@dataclass(frozen=True)
class GameSolution:
    """Game value plus a maximin row strategy and minimax column strategy."""

    value: float
    row_strategy: np.ndarray
    column_strategy: np.ndarray


def maximin(game) -> tuple[float, np.ndarray]:
    """Value and one optimal mixed strategy for the row player.

    Solves: maximize v subject to A^T x >= v*1, sum(x) = 1, x >= 0, with the
    guarantee level v unbounded below.
    """
    A = as_payoff_matrix(game)
    m, k = A.shape
    if m == 1 and k == 1:
        # the LP would only add rounding noise to the lone payoff entry
        return float(A[0, 0]), np.array([1.0])
    c = np.zeros(m + 1)
    c[m] = -1.0
    rows = np.zeros((k + 1, m + 1))
    rows[:k, :m] = A.T
    rows[:k, m] = -1.0
    rows[k, :m] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    nonneg = np.ones(m + 1, dtype=bool)
    nonneg[m] = False
    sol = solve_lp(LinearProgram(c, rows, rhs, (">=",) * k + ("=",), nonneg))
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"game LP reported {sol.status.value}; finite payoffs cannot reach this")
    return -sol.objective_value + 0.0, _normalized(sol.x[:m])


def game_value(game) -> float:
    """Minimax value of the game (row player's guarantee)."""
    return maximin(game)[0]


def solve_game(game) -> GameSolution:
    """Solve the game for both players.

    The column strategy comes from the mirrored game -A^T, where the column
    player is the maximizing row player.
    """
    A = as_payoff_matrix(game)
    value, x = maximin(A)
    _, y = maximin(-A.T)
    return GameSolution(value=value, row_strategy=x, column_strategy=y)


def best_response(game, opponent_strategy) -> np.ndarray:
    """Pure best response of the row player to a mixed column strategy.

    Ties break toward the lowest action index; the result is one-hot.
    """
    A = as_payoff_matrix(game)
    y = check_strategy(opponent_strategy, A.shape[1])
    response = np.zeros(A.shape[0])
    response[int(np.argmax(A @ y))] = 1.0
    return response


def oracle_solve_game(game) -> GameSolution:
    """Solve by enumerating square support pairs; independent of the LP path.

    For each pair of equal-size supports, solve the bordered linear systems
    that equalize payoffs on the support, then verify the candidate against
    the full matrix. Every matrix game has at least one such square kernel.
    Refuses games larger than ORACLE_MAX_SIDE per side.
    """
    A = as_payoff_matrix(game)
    m, k = A.shape
    if m > ORACLE_MAX_SIDE or k > ORACLE_MAX_SIDE:
        raise InputError(f"oracle accepts at most {ORACLE_MAX_SIDE} actions per side, got {m}x{k}")
    for size in range(1, min(m, k) + 1):
        bordered = np.zeros((size + 1, size + 1))
        bordered[size, :size] = 1.0
        rhs = np.zeros(size + 1)
        rhs[size] = 1.0
        for I in itertools.combinations(range(m), size):
            for J in itertools.combinations(range(k), size):
                B = A[np.ix_(I, J)]
                bordered[:size, :size] = B.T
                bordered[:size, size] = -1.0
                try:
                    x_sys = np.linalg.solve(bordered, rhs)
                    bordered[:size, :size] = B
                    y_sys = np.linalg.solve(bordered, rhs)
                except np.linalg.LinAlgError:
                    continue
                if (x_sys[:size] < -_ORACLE_TOL).any() or (y_sys[:size] < -_ORACLE_TOL).any():
                    continue
                x = np.zeros(m)
                x[list(I)] = np.clip(x_sys[:size], 0.0, None)
                y = np.zeros(k)
                y[list(J)] = np.clip(y_sys[:size], 0.0, None)
                x /= x.sum()
                y /= y.sum()
                value = float(x @ A @ y)
                if (A.T @ x >= value - _ORACLE_TOL).all() and (A @ y <= value + _ORACLE_TOL).all():
                    return GameSolution(value=value, row_strategy=x, column_strategy=y)
    raise RuntimeError("support enumeration found no verified kernel")
