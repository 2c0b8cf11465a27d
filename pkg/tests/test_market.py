"""Market structures: preferences, deferred acceptance, stability, generation."""

import numpy as np
import pytest
from conftest import EXAMPLE_OUTSIDE, EXAMPLE_VALUES, all_matchings

from matchgames.errors import DimensionError, InputError
from matchgames.market import (
    AgentId,
    Generator,
    MarketInstance,
    Matching,
    PreferenceProfile,
    Side,
    UtilityTable,
    deferred_acceptance,
    generate_instance,
    is_stable,
    preferences_from_values,
)


def example_utilities() -> UtilityTable:
    return UtilityTable(
        EXAMPLE_VALUES,
        -EXAMPLE_VALUES.T,
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
    )


def test_agent_id_basics():
    left = AgentId.left(0)
    right = AgentId.right(1)
    assert str(left) == "L0"
    assert str(right) == "R1"
    assert left < right
    assert left.side is Side.LEFT and right.side is Side.RIGHT
    with pytest.raises(InputError):
        AgentId.left(-1)


def test_preferences_from_example_values():
    prefs = preferences_from_values(
        EXAMPLE_VALUES,
        -EXAMPLE_VALUES.T,
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
    )
    # L0 ranks R0 (1.0) over R1 (0.0); L1 ties at 1.0, broken toward R0
    assert prefs.left == ((0, 1), (0, 1))
    # R0 sees -1.0 twice, both below the outside option; R1 keeps only L0
    assert prefs.right == ((), (0,))
    assert prefs.left_threshold == (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE)


def test_preferences_truncate_strictly_below_threshold():
    prefs = preferences_from_values(
        np.array([[0.5, -0.5, -0.2]]),
        np.array([[0.0], [0.0], [0.0]]),
        (-0.2,),
        (0.0, 0.0, 0.0),
    )
    # -0.5 falls below the threshold, -0.2 sits exactly on it and stays
    assert prefs.left == ((0, 2),)


def test_deferred_acceptance_on_example():
    prefs = preferences_from_values(
        EXAMPLE_VALUES,
        -EXAMPLE_VALUES.T,
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
        (EXAMPLE_OUTSIDE, EXAMPLE_OUTSIDE),
    )
    assert deferred_acceptance(prefs).pairs == ((0, 1),)
    # unique stable matching here, so the right-proposing run agrees
    assert deferred_acceptance(prefs, Side.RIGHT).pairs == ((0, 1),)


def test_example_matching_is_stable():
    report = is_stable(example_utilities(), Matching(((0, 1),)))
    assert report.stable
    assert report.ir_violations == ()
    assert report.blocking_pairs == ()


def test_blocking_pair_and_ir_detection():
    utilities = example_utilities()
    # L0 matched to R0 sits at 1.0 but R0 gets -1.0 < -0.5: IR violation
    report = is_stable(utilities, Matching(((0, 0),)))
    assert not report.stable
    assert AgentId.right(0) in report.ir_violations
    # leaving everyone unmatched makes (L0, R1) a blocking pair
    report = is_stable(utilities, Matching(()))
    assert not report.stable
    assert (0, 1) in report.blocking_pairs


def test_identical_values_give_assortative_matching():
    values = np.full((3, 3), 0.25)
    prefs = preferences_from_values(values, values.T, (0.0,) * 3, (0.0,) * 3)
    assert prefs.left == ((0, 1, 2),) * 3
    matching = deferred_acceptance(prefs)
    assert matching.pairs == ((0, 0), (1, 1), (2, 2))


def test_deferred_acceptance_is_proposer_optimal():
    rng = np.random.default_rng(21)
    for _ in range(20):
        values = rng.uniform(-1.0, 1.0, size=(3, 3))
        outside = (-0.2,) * 3
        utilities = UtilityTable(values, -values.T, outside, outside)
        prefs = preferences_from_values(values, -values.T, outside, outside)
        stable = [m for m in all_matchings(3, 3) if is_stable(utilities, m).stable]
        assert stable, "every market has at least one stable matching"
        for side, proposers in ((Side.LEFT, range(3)), (Side.RIGHT, range(3))):
            result = deferred_acceptance(prefs, side)
            assert is_stable(utilities, result).stable
            make = AgentId.left if side is Side.LEFT else AgentId.right
            for other in stable:
                for idx in proposers:
                    agent = make(idx)
                    assert utilities.current(agent, result) >= utilities.current(
                        agent, other
                    ) - 1e-12


def test_matching_rejects_overlaps():
    with pytest.raises(InputError):
        Matching(((0, 0), (0, 1)))
    with pytest.raises(InputError):
        Matching(((0, 0), (1, 0)))
    with pytest.raises(InputError):
        Matching(((-1, 0),))
    with pytest.raises(DimensionError):
        Matching(((5, 0),)).validate_for(2, 2)


def test_matching_lookups():
    matching = Matching(((1, 0), (0, 2)))
    assert matching.pairs == ((0, 2), (1, 0))
    assert matching.right_partner_of(1) == 0
    assert matching.left_partner_of(2) == 0
    assert matching.partner_of(AgentId.left(0)) == 2
    assert matching.partner_of(AgentId.right(1)) is None
    assert len(matching) == 2


def test_preference_profile_validation():
    with pytest.raises(InputError):
        PreferenceProfile(((0, 0),), ((0,),))
    with pytest.raises(DimensionError):
        PreferenceProfile(((3,),), ((0,),))
    with pytest.raises(DimensionError):
        PreferenceProfile(((0,),), ((0,),), left_threshold=(0.0, 0.0))


def test_generate_instance_shapes_and_determinism():
    inst = generate_instance(2, 3, 4, 5, seed=9)
    assert inst.games.shape == (2, 3, 4, 5)
    assert inst.left_outside.shape == (2,)
    assert (inst.left_outside == -1.0).all() and (inst.right_outside == -1.0).all()
    again = generate_instance(2, 3, 4, 5, seed=9)
    assert (inst.games == again.games).all()
    other = generate_instance(2, 3, 4, 5, seed=10)
    assert (inst.games != other.games).any()


def test_generator_statistics():
    gaussian = generate_instance(5, 5, 8, 8, generator=Generator.GAUSSIAN_UNIT, seed=42)
    draws = gaussian.games.ravel()
    assert abs(draws.mean()) < 0.05
    assert abs(draws.var() - 1.0) < 0.1
    uniform = generate_instance(5, 5, 8, 8, generator=Generator.UNIFORM_SIGNED, seed=42)
    draws = uniform.games.ravel()
    assert draws.min() >= -1.0 and draws.max() <= 1.0
    assert abs(draws.mean()) < 0.05
    assert abs(draws.var() - 1.0 / 3.0) < 0.05


def test_instance_validation():
    with pytest.raises(InputError):
        generate_instance(0, 2, 2, 2)
    with pytest.raises(InputError):
        generate_instance(2, 2, 2, 2, outside_option=float("nan"))
    good = generate_instance(2, 2, 2, 2)
    with pytest.raises(DimensionError):
        MarketInstance(
            p=2,
            a=2,
            m=2,
            k=3,
            games=good.games,
            left_outside=good.left_outside,
            right_outside=good.right_outside,
        )


def test_utility_table_lookups():
    utilities = example_utilities()
    matching = Matching(((0, 1),))
    assert utilities.current(AgentId.left(0), matching) == 0.0
    assert utilities.current(AgentId.right(1), matching) == 0.0
    # unmatched agents fall back to their outside option
    assert utilities.current(AgentId.left(1), matching) == EXAMPLE_OUTSIDE
    assert utilities.outside(AgentId.right(0)) == EXAMPLE_OUTSIDE
