import pytest
from pydantic import ValidationError

from tasepcheck.core.errors import ArgumentError, IneligibleMoveError
from tasepcheck.models.particles import EventSpec, Move, MoveKind, ParticleConfig, SpeciesSequence
from tasepcheck.services.dynamics import apply_move, eligible_moves, event_holds, event_spec, nu


def config(positions, labels):
    return ParticleConfig(positions=positions, labels=labels)


def test_nu_word():
    """nu(k, N) has k leading 2s then N - k 1s."""
    assert nu(2, 3).word == (2, 2, 1)
    assert nu(0, 3).word == (1, 1, 1)
    assert nu(3, 3).word == (2, 2, 2)
    assert nu(2, 5).first_class_count == 2
    with pytest.raises(ArgumentError):
        nu(4, 3)


def test_particle_config_invariants():
    """Positions must be strictly increasing and labels must match them."""
    with pytest.raises(ValidationError):
        config((1, 1), (1, 1))
    with pytest.raises(ValidationError):
        config((2, 1), (1, 1))
    with pytest.raises(ValidationError):
        config((1, 2), (1,))
    with pytest.raises(ValidationError):
        config((1, 2), (1, 3))
    with pytest.raises(ValidationError):
        config(tuple(range(20)), (1,) * 20)


def test_step_constructor():
    initial = ParticleConfig.step(3, 1)
    assert initial.positions == (1, 2, 3)
    assert initial.labels == (2, 1, 1)
    assert initial.species == SpeciesSequence(word=(2, 1, 1))


def test_event_spec_rejects_negative_time():
    with pytest.raises(ValidationError):
        EventSpec(t=-1.0, k=0, x=0)
    with pytest.raises(ValueError):
        EventSpec(t=1.0, k=3, x=0).check_particles(2)


def test_event_spec_raises_argument_errors():
    assert event_spec(2, 3, 1.0, 4) == EventSpec(t=1.0, k=2, x=3)
    with pytest.raises(ArgumentError):
        event_spec(5, 1, 1.0, 4)
    with pytest.raises(ArgumentError):
        event_spec(1, 1, -1.0, 4)
    with pytest.raises(ArgumentError):
        event_holds(ParticleConfig.step(2, 1), -1, 1)


@pytest.mark.parametrize("positions,labels,k,x,expected", [
    ((1, 2, 3), (2, 2, 1), 2, 1, True),
    ((1, 2, 3), (2, 1, 2), 2, 1, False),
    ((5, 9), (1, 1), 0, 3, True),
    ((5, 9), (1, 1), 0, 6, False),
    ((1, 2), (2, 1), 0, 0, False),
    ((2, 3, 7), (2, 2, 1), 2, 2, True),
    ((2, 4, 7), (2, 2, 1), 2, 2, False),
    ((3, 4), (2, 2), 2, 3, True),
])
def test_event_holds(positions, labels, k, x, expected):
    assert event_holds(config(positions, labels), k, x) is expected


def test_event_holds_rejects_k_out_of_range():
    with pytest.raises(ArgumentError):
        event_holds(config((1, 2), (1, 1)), 3, 1)
    with pytest.raises(ArgumentError):
        event_holds(config((1, 2), (1, 1)), -1, 1)


@pytest.mark.parametrize("positions,labels,expected", [
    ((1, 2), (2, 1), [Move(1, MoveKind.SWAP_RIGHT), Move(2, MoveKind.STEP_RIGHT)]),
    ((1, 2), (1, 2), [Move(2, MoveKind.STEP_RIGHT)]),
    ((1, 5), (1, 1), [Move(1, MoveKind.STEP_RIGHT), Move(2, MoveKind.STEP_RIGHT)]),
    ((1, 2), (2, 2), [Move(2, MoveKind.STEP_RIGHT)]),
    ((1, 2, 3), (2, 1, 1), [Move(1, MoveKind.SWAP_RIGHT), Move(3, MoveKind.STEP_RIGHT)]),
])
def test_eligible_moves(positions, labels, expected):
    assert eligible_moves(config(positions, labels)) == expected


@pytest.mark.parametrize("positions,labels,move,expected", [
    ((1, 2), (2, 1), Move(1, MoveKind.SWAP_RIGHT), ((1, 2), (1, 2))),
    ((1, 5), (1, 1), Move(1, MoveKind.STEP_RIGHT), ((2, 5), (1, 1))),
    ((1, 2), (1, 2), Move(2, MoveKind.STEP_RIGHT), ((1, 3), (1, 2))),
])
def test_apply_move(positions, labels, move, expected):
    moved = apply_move(config(positions, labels), move)
    assert (moved.positions, moved.labels) == expected


def test_apply_move_rejects_ineligible_moves():
    with pytest.raises(IneligibleMoveError):
        apply_move(config((1, 2), (1, 2)), Move(1, MoveKind.STEP_RIGHT))
    with pytest.raises(IneligibleMoveError):
        apply_move(config((1, 2), (1, 2)), Move(1, MoveKind.SWAP_RIGHT))


def test_moves_preserve_order_and_species_counts(rng):
    """Random move sequences keep positions sorted and the label multiset fixed."""
    current = config((0, 1, 2, 4, 5), (2, 1, 2, 1, 1))
    for _ in range(200):
        moves = eligible_moves(current)
        assert moves
        current = apply_move(current, moves[rng.integers(len(moves))])
        assert list(current.positions) == sorted(set(current.positions))
        assert sorted(current.labels) == [1, 1, 1, 2, 2]
