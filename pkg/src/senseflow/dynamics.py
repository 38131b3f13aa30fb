"""Discrete replicator dynamics over the word graph and payoff matrix.

Every player repeatedly plays a two-player game with each graph neighbor;
the payoff of pure strategy h is the weighted sum over neighbors of the
payoff-matrix slice applied to the neighbor's mixed strategy. Strategies
earning more than the player's average grow multiplicatively until the
state stops moving, and by the folk result for these dynamics the limits
reached from interior starts are Nash equilibria.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import Occurrence, WordGraph
from .senses import StrategyState


@dataclass(frozen=True)
class GameConfig:
    max_iterations: int = 1000
    epsilon: float = 1e-6
    tie_break: str = "lowest_rank"
    fallback: str = "none"  # none | first_sense
    workers: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.tie_break != "lowest_rank":
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.fallback not in ("none", "first_sense"):
            raise ValueError(f"unknown fallback {self.fallback!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class Assignment:
    player: Occurrence | None
    concept: str | None  # None = unassigned
    probability: float
    updated: bool  # False when the player's payoffs stayed identically zero


@dataclass
class GameOutcome:
    assignments: list[Assignment]
    iterations: int
    converged: bool
    final: np.ndarray | None = field(default=None, repr=False)
    trajectory: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def choices(self) -> list[str | None]:
        return [a.concept for a in self.assignments]


def _payoff_matrix(
    matrix: np.ndarray, weights: np.ndarray, z: np.ndarray, workers: int = 1
) -> np.ndarray:
    """U[i, h] = sum_j w_ij * sum_k z[h, k] * matrix[j, k].

    Each row is computed as its own vector product so the result is
    bit-identical for any worker count: threads only partition players.
    """
    pushed = matrix @ z.T  # pushed[j, h] = sum_k z[h, k] * x_jk
    n = matrix.shape[0]
    u = np.empty_like(pushed)

    def fill(i: int) -> None:
        u[i, :] = weights[i, :] @ pushed

    if workers == 1 or n < 2:
        for i in range(n):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(n)))
    return u


def strategy_payoff(
    i: int, h: int, state: StrategyState, graph: WordGraph, z: np.ndarray
) -> float:
    """Payoff of player i's pure strategy at global concept column h."""
    pushed = state.matrix @ z.T
    return float(graph.weights[i, :] @ pushed[:, h])


def average_payoff(
    i: int, state: StrategyState, graph: WordGraph, z: np.ndarray
) -> float:
    """Expected payoff of player i's current mixed strategy."""
    u = _payoff_matrix(state.matrix, graph.weights, z)
    return float(state.matrix[i, :] @ u[i, :])


def _advance(
    matrix: np.ndarray, weights: np.ndarray, z: np.ndarray, workers: int
) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous update; returns (next matrix, average payoffs).

    All payoffs are read from the incoming matrix, then each row scales by
    payoff over average payoff. Rows whose average payoff is exactly 0
    cannot move and are held fixed. Rows are renormalized to absorb
    floating-point drift; zero entries stay zero because the update is
    multiplicative.
    """
    u = _payoff_matrix(matrix, weights, z, workers)
    averages = np.einsum("ij,ij->i", matrix, u)
    updated = matrix.copy()
    movable = averages != 0.0
    if np.any(movable):
        updated[movable] = matrix[movable] * u[movable] / averages[movable, None]
        sums = updated[movable].sum(axis=1)
        rows = np.flatnonzero(movable)[sums > 0]
        updated[rows] /= updated[rows].sum(axis=1)[:, None]
    return updated, averages


def replicator_step(
    state: StrategyState, graph: WordGraph, z: np.ndarray, workers: int = 1
) -> StrategyState:
    """One synchronous update of every player's row."""
    updated, _ = _advance(state.matrix, graph.weights, z, workers)
    return StrategyState(state.concepts, updated, state.supports)


def _at_rest(
    matrix: np.ndarray,
    weights: np.ndarray,
    z: np.ndarray,
    supports: tuple[np.ndarray, ...],
    margin: float,
    workers: int,
) -> bool:
    """True when no available strategy would still grow by more than margin.

    The growth ratio u(e^h, x) / u(x, x) is the multiplier the update
    applies; a ratio above 1 means the strategy is still invading, however
    small its probability currently is. Checking it keeps the dynamics
    from declaring convergence while merely stalled near an unstable rest
    point (a nearly extinct strategy that became a best reply moves slower
    than any step-size threshold). Rows with average payoff 0 cannot move
    and are at rest by definition.
    """
    u = _payoff_matrix(matrix, weights, z, workers)
    for i, support in enumerate(supports):
        average = float(matrix[i] @ u[i])
        if average == 0.0:
            continue
        if np.any(u[i, support] / average > 1.0 + margin):
            return False
    return True


def run(
    state: StrategyState,
    graph: WordGraph,
    z: np.ndarray,
    cfg: GameConfig = GameConfig(),
    players: list[Occurrence] | None = None,
    collect_trajectory: bool = False,
) -> GameOutcome:
    """Iterate replicator steps to a fixed point, then pick each label.

    Stops when the largest entry change falls below epsilon and the state
    is a rest point (no strategy would still grow by more than epsilon;
    see _at_rest), or after max_iterations. Hitting the iteration cap is
    flagged, not an error: the argmax is still taken. A player whose
    payoffs stayed identically zero from a uniform multi-sense start has
    learned nothing and is left unassigned, unless fallback maps it to
    its top-ranked sense.
    """
    if players is not None and len(players) != state.num_players:
        raise ValueError("players metadata does not match the strategy matrix")
    matrix = state.matrix.copy()
    initial = state.matrix.copy()
    trajectory = [matrix.copy()] if collect_trajectory else None
    ever_moved = np.zeros(state.num_players, dtype=bool)
    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        nxt, averages = _advance(matrix, graph.weights, z, cfg.workers)
        ever_moved |= averages != 0.0
        iterations += 1
        delta = np.max(np.abs(nxt - matrix))
        matrix = nxt
        if trajectory is not None:
            trajectory.append(matrix.copy())
        if delta < cfg.epsilon and _at_rest(
            matrix, graph.weights, z, state.supports, cfg.epsilon, cfg.workers
        ):
            converged = True
            break
    current = StrategyState(state.concepts, matrix, state.supports)

    assignments = []
    for i in range(state.num_players):
        support = state.supports[i]
        row = current.matrix[i, support]
        start = initial[i, support]
        uniform_start = support.size > 0 and np.ptp(start) == 0.0
        undecidable = (not ever_moved[i]) and uniform_start and support.size >= 2
        if undecidable and cfg.fallback == "none":
            concept, probability = None, float(row.max()) if row.size else 0.0
        elif undecidable:
            concept, probability = state.concepts[support[0]], float(row[0])
        else:
            best = int(np.argmax(row))  # first max = lowest-rank tie break
            concept, probability = state.concepts[support[best]], float(row[best])
        assignments.append(
            Assignment(
                player=players[i] if players is not None else None,
                concept=concept,
                probability=probability,
                updated=bool(ever_moved[i]),
            )
        )
    return GameOutcome(assignments, iterations, converged, matrix, trajectory)


def nash_check(
    state: StrategyState,
    graph: WordGraph,
    z: np.ndarray,
    tol: float = 1e-6,
) -> list[bool]:
    """Equilibrium test per player at a fixed-point candidate.

    The test works on growth ratios u(e^h, x) / u(x, x), the quantity the
    multiplicative update applies: a player passes when every strategy it
    still uses has ratio within tol of 1 and no abandoned strategy has a
    ratio above 1 + tol, i.e. nothing is left to grow. For nonnegative
    payoffs this is exactly the Nash condition that every used strategy
    earns the best available payoff and no unused one beats it; ratios
    also make the test invariant under positive rescaling of the graph or
    the payoff matrix. Strategies below sqrt(tol) probability count as
    abandoned, since the dynamics only reach exact zero in the limit.
    Players whose payoffs are all zero, or whose average payoff is zero
    (rows the update holds fixed), pass vacuously.
    """
    u_all = _payoff_matrix(state.matrix, graph.weights, z)
    support_eps = np.sqrt(tol)
    results = []
    for i in range(state.num_players):
        support = state.supports[i]
        u = u_all[i, support]
        x = state.matrix[i, support]
        average = float(x @ u)
        if np.all(u == 0.0) or average == 0.0:
            results.append(True)
            continue
        ratios = u / average
        used = x > support_eps
        ok = bool(np.all(np.abs(ratios[used] - 1.0) <= tol)) and bool(
            np.all(ratios[~used] <= 1.0 + tol)
        )
        results.append(ok)
    return results


def prisoners_dilemma() -> tuple[StrategyState, WordGraph, np.ndarray]:
    """Two-player repeated prisoner's dilemma, both strategies at 1/2.

    Payoffs (defect, cooperate) x (defect, cooperate):
    (-5, 0; -6, -1). Note the entries are negative: the discrete update
    divides payoff by average payoff verbatim, which reproduces the
    textbook arithmetic for this game but is not the sign-corrected
    continuous-time rule.
    """
    players = (
        Occurrence("pd", 0, "player_1", "x", "pd.p1"),
        Occurrence("pd", 1, "player_2", "x", "pd.p2"),
    )
    graph = WordGraph(players, np.array([[0.0, 1.0], [1.0, 0.0]]))
    concepts = ("defect", "cooperate")
    matrix = np.full((2, 2), 0.5)
    supports = (np.array([0, 1], dtype=np.intp), np.array([0, 1], dtype=np.intp))
    state = StrategyState(concepts, matrix, supports)
    z = np.array([[-5.0, 0.0], [-6.0, -1.0]])
    return state, graph, z
