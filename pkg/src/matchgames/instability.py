"""Instability metrics: minimum total subsidy that stabilizes an outcome.

Both metrics minimize the sum of per-agent subsidies subject to three
families of constraints: no agent is worse off than its outside option
(participation), no agent can gain by deviating inside its current match
(value rationality, strategy-aware metric only), and no cross pair can
jointly deviate (blocking cover). Subsidies are nonnegative.

The exact solver works on per-agent lower bounds plus a branch-and-bound
cover search over the cross pairs whose constraints bind. oracle_mi is an
independent brute-force route over candidate subsidy grids and must not
share the cover machinery.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError
from .games import game_value, oracle_solve_game
from .market import AgentId, Matching, MarketInstance, Side, UtilityTable

DEFAULT_TOL = 1e-9

ORACLE_MAX_AGENTS_PER_SIDE = 3

# Binding-constraint tags reported per agent.
TAG_NONE = "none"
TAG_PARTICIPATION = "C2"
TAG_VALUE_GAP = "C3"
TAG_COVER = "C1-cover"


@dataclass(frozen=True)
class SubsidyVector:
    amounts: dict
    total: float

    @classmethod
    def of(cls, amounts: dict) -> SubsidyVector:
        return cls(amounts=dict(amounts), total=float(sum(amounts.values())))


@dataclass(frozen=True)
class InstabilityReport:
    value: float
    subsidies: SubsidyVector
    active_pairs: tuple[tuple[int, int], ...]
    binding: dict

    def to_record(self) -> dict:
        return {
            "format": "instability-report",
            "version": 1,
            "value": self.value,
            "subsidies": {str(agent): amount for agent, amount in self.subsidies.amounts.items()},
            "active_pairs": [list(pair) for pair in self.active_pairs],
            "binding": {str(agent): tag for agent, tag in self.binding.items()},
        }


def realized_utilities(
    instance: MarketInstance, matching: Matching, strategies: dict
) -> dict:
    """Expected payoff of every agent under the matching and strategy profile.

    Matched agents get the bilinear payoff of their pair's game; unmatched
    agents sit at their outside option. The profile must contain exactly the
    matched agents, with strategy lengths matching each side's action count.
    """
    matching.validate_for(instance.p, instance.a)
    expected = {
        agent
        for i, j in matching.pairs
        for agent in (AgentId.left(i), AgentId.right(j))
    }
    if set(strategies) != expected:
        missing = sorted(expected - set(strategies))
        extra = sorted(set(strategies) - expected)
        raise InputError(
            f"strategy profile must cover matched agents exactly "
            f"(missing {[str(x) for x in missing]}, extra {[str(x) for x in extra]})"
        )
    out: dict = {}
    for i, j in matching.pairs:
        x = np.asarray(strategies[AgentId.left(i)], dtype=float)
        y = np.asarray(strategies[AgentId.right(j)], dtype=float)
        if x.shape != (instance.m,) or y.shape != (instance.k,):
            raise DimensionError(
                f"pair {(i, j)} strategies have shapes {x.shape}/{y.shape}, "
                f"expected ({instance.m},)/({instance.k},)"
            )
        payoff = float(x @ instance.games[i, j] @ y)
        out[AgentId.left(i)] = payoff
        out[AgentId.right(j)] = -payoff
    for i in range(instance.p):
        out.setdefault(AgentId.left(i), float(instance.left_outside[i]))
    for j in range(instance.a):
        out.setdefault(AgentId.right(j), float(instance.right_outside[j]))
    return out


def _solve_cover(
    floors: dict,
    pairs: list,
    tol: float,
) -> dict:
    """Minimize total subsidy over per-pair cover choices.

    pairs entries are (left agent, right agent, left gap, right gap); each
    pair needs one member raised to its gap. Depth-first search over the
    cover assignments with a running-total prune; ties keep the first
    solution found, so the result is deterministic in the input order.
    """
    subsidies = dict(floors)
    if not pairs:
        return subsidies
    best: dict | None = None
    best_total = math.inf

    def dfs(idx: int, current: dict, total: float) -> None:
        nonlocal best, best_total
        if total >= best_total - 1e-15:
            return
        if idx == len(pairs):
            best = dict(current)
            best_total = total
            return
        left, right, gap_left, gap_right = pairs[idx]
        if current[left] >= gap_left - tol or current[right] >= gap_right - tol:
            dfs(idx + 1, current, total)
            return
        for agent, gap in ((left, gap_left), (right, gap_right)):
            previous = current[agent]
            current[agent] = gap
            dfs(idx + 1, current, total + gap - previous)
            current[agent] = previous

    dfs(0, subsidies, sum(subsidies.values()))
    assert best is not None
    return best


def _report(
    floors: dict,
    floor_tags: dict,
    active: list,
    tol: float,
) -> InstabilityReport:
    final = _solve_cover(floors, active, tol)
    binding = {}
    for agent, amount in final.items():
        if amount <= 0.0:
            binding[agent] = TAG_NONE
        elif amount > floors[agent]:
            binding[agent] = TAG_COVER
        else:
            binding[agent] = floor_tags[agent]
    subsidies = SubsidyVector.of(final)
    return InstabilityReport(
        value=subsidies.total,
        subsidies=subsidies,
        active_pairs=tuple((pair[0].index, pair[1].index) for pair in active),
        binding=binding,
    )


def _floor(c2: float, c3: float | None, tol: float) -> tuple[float, str]:
    """Per-agent lower bound from participation and value-rationality terms.

    Terms within tol of zero are treated as satisfied so that exact
    equilibria report exactly zero.
    """
    candidates = [(0.0, TAG_NONE)]
    if c2 > tol:
        candidates.append((c2, TAG_PARTICIPATION))
    if c3 is not None and c3 > tol:
        candidates.append((c3, TAG_VALUE_GAP))
    return max(candidates, key=lambda pair: pair[0])


def matching_instability(
    instance: MarketInstance,
    matching: Matching,
    strategies: dict,
    *,
    game_values: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
) -> InstabilityReport:
    """Minimum total subsidy making (matching, strategies) a stable outcome.

    Cross-pair deviations are valued at the pair game's minimax value, so an
    agent's temptation toward a partner ignores what the partner would lose.
    game_values may carry precomputed left-view values (shape p x a) so
    repeated audits of one instance can skip re-solving the games.
    """
    if game_values is None:
        values = np.array(
            [
                [game_value(instance.games[i, j]) for j in range(instance.a)]
                for i in range(instance.p)
            ]
        )
    else:
        values = np.asarray(game_values, dtype=float)
        if values.shape != (instance.p, instance.a):
            raise DimensionError(
                f"game_values shape {values.shape} does not match ({instance.p}, {instance.a})"
            )
    realized = realized_utilities(instance, matching, strategies)

    floors: dict = {}
    tags: dict = {}
    for agent in instance.agents():
        utility = realized[agent]
        partner = matching.partner_of(agent)
        if partner is None:
            own_value = None
        elif agent.side is Side.LEFT:
            own_value = float(values[agent.index, partner])
        else:
            own_value = -float(values[partner, agent.index])
        c2 = instance.outside_option(agent) - utility
        c3 = None if own_value is None else own_value - utility
        floors[agent], tags[agent] = _floor(c2, c3, tol)

    active = []
    for i in range(instance.p):
        for j in range(instance.a):
            if matching.right_partner_of(i) == j:
                continue  # covered by the pair's own value-rationality terms
            left, right = AgentId.left(i), AgentId.right(j)
            gap_left = float(values[i, j]) - realized[left]
            gap_right = -float(values[i, j]) - realized[right]
            if gap_left > floors[left] + tol and gap_right > floors[right] + tol:
                active.append((left, right, gap_left, gap_right))
    return _report(floors, tags, active, tol)


def subset_instability(
    utilities: UtilityTable, matching: Matching, tol: float = DEFAULT_TOL
) -> InstabilityReport:
    """Minimum total subsidy for fixed per-partner utilities (no strategies).

    This is the single-action specialization: deviations are valued by the
    utility table directly and there is no value-rationality constraint.
    """
    p, a = utilities.left.shape
    matching.validate_for(p, a)
    floors: dict = {}
    tags: dict = {}
    current: dict = {}
    for agent in [AgentId.left(i) for i in range(p)] + [AgentId.right(j) for j in range(a)]:
        current[agent] = utilities.current(agent, matching)
        floors[agent], tags[agent] = _floor(utilities.outside(agent) - current[agent], None, tol)
    active = []
    for i in range(p):
        for j in range(a):
            if matching.right_partner_of(i) == j:
                continue  # zero gain over itself, never binds
            left, right = AgentId.left(i), AgentId.right(j)
            gap_left = float(utilities.left[i, j]) - current[left]
            gap_right = float(utilities.right[j, i]) - current[right]
            if gap_left > floors[left] + tol and gap_right > floors[right] + tol:
                active.append((left, right, gap_left, gap_right))
    return _report(floors, tags, active, tol)


def single_pair_deviation(instance: MarketInstance, strategies: dict) -> float:
    """Instability of the only possible matching in a 1x1 market.

    With one agent per side and both participating, the metric collapses to
    the absolute gap between the pair's game value and the realized payoff.
    """
    if instance.p != 1 or instance.a != 1:
        raise InputError(f"single_pair_deviation needs a 1x1 market, got {instance.p}x{instance.a}")
    realized = realized_utilities(instance, Matching(((0, 0),)), strategies)
    return abs(game_value(instance.games[0, 0]) - realized[AgentId.left(0)])


def oracle_mi(instance: MarketInstance, matching: Matching, strategies: dict) -> float:
    """Exact instability by exhaustive search; independent of _solve_cover.

    Builds per-agent candidate subsidy grids (the agent's own lower bound
    plus every cross-pair gap it appears in) and checks every combination
    against the constraint system directly. Game values come from the
    enumeration-based game oracle, keeping the whole route off the LP path.
    Only desk-scale markets are accepted.
    """
    if instance.p > ORACLE_MAX_AGENTS_PER_SIDE or instance.a > ORACLE_MAX_AGENTS_PER_SIDE:
        raise InputError(
            f"oracle accepts at most {ORACLE_MAX_AGENTS_PER_SIDE} agents per side, "
            f"got {instance.p}x{instance.a}"
        )
    tol = DEFAULT_TOL
    values = np.array(
        [
            [oracle_solve_game(instance.games[i, j]).value for j in range(instance.a)]
            for i in range(instance.p)
        ]
    )
    realized = realized_utilities(instance, matching, strategies)
    agents = instance.agents()

    lower: dict = {}
    for agent in agents:
        bound = max(0.0, instance.outside_option(agent) - realized[agent])
        partner = matching.partner_of(agent)
        if partner is not None:
            if agent.side is Side.LEFT:
                own = float(values[agent.index, partner])
            else:
                own = -float(values[partner, agent.index])
            bound = max(bound, own - realized[agent])
        lower[agent] = bound

    candidates: dict = {}
    for agent in agents:
        grid = {lower[agent]}
        if agent.side is Side.LEFT:
            gaps = [float(values[agent.index, j]) - realized[agent] for j in range(instance.a)]
        else:
            gaps = [-float(values[i, agent.index]) - realized[agent] for i in range(instance.p)]
        grid.update(g for g in gaps if g > lower[agent])
        candidates[agent] = sorted(grid)

    cross = [
        (
            AgentId.left(i),
            AgentId.right(j),
            float(values[i, j]) - realized[AgentId.left(i)],
            -float(values[i, j]) - realized[AgentId.right(j)],
        )
        for i in range(instance.p)
        for j in range(instance.a)
    ]

    best = math.inf
    for combo in itertools.product(*(candidates[agent] for agent in agents)):
        assignment = dict(zip(agents, combo))
        total = sum(combo)
        if total >= best:
            continue
        if all(
            min(gap_left - assignment[left], gap_right - assignment[right]) <= tol
            for left, right, gap_left, gap_right in cross
        ):
            best = total
    assert math.isfinite(best)
    return best
