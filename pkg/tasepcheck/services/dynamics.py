"""Single-step dynamics of the two-species TASEP.

Particles are stored sorted by position. A first class particle (species 2) with a
second class particle (species 1) immediately to its right may swap with it; the swap
is realised by exchanging the two labels, positions stay put.
"""
import logging
from typing import List, Sequence, Tuple

from tasepcheck.core.errors import ArgumentError, IneligibleMoveError
from tasepcheck.models.particles import (
    FIRST_CLASS,
    SECOND_CLASS,
    EventSpec,
    Move,
    MoveKind,
    ParticleConfig,
    SpeciesSequence,
)

logger = logging.getLogger(__name__)

State = Tuple[Tuple[int, ...], Tuple[int, ...]]


def nu(k: int, n: int) -> SpeciesSequence:
    """The species word nu^(k): k leading 2s then n - k 1s."""
    try:
        return SpeciesSequence.nu(k, n)
    except ValueError as e:
        raise ArgumentError(str(e)) from e


def moves_of(positions: Sequence[int], labels: Sequence[int]) -> List[Tuple[int, MoveKind]]:
    """Eligible moves on raw tuples, 0-based indices. Hot path of the simulator and oracle."""
    moves = []
    last = len(positions) - 1
    for i in range(last + 1):
        if i == last or positions[i + 1] != positions[i] + 1:
            moves.append((i, MoveKind.STEP_RIGHT))
        elif labels[i] == FIRST_CLASS and labels[i + 1] == SECOND_CLASS:
            moves.append((i, MoveKind.SWAP_RIGHT))
    return moves


def apply_to(positions: Tuple[int, ...], labels: Tuple[int, ...], i: int, kind: MoveKind) -> State:
    """Apply an eligible move (0-based index) to raw tuples."""
    if kind is MoveKind.STEP_RIGHT:
        return positions[:i] + (positions[i] + 1,) + positions[i + 1:], labels
    return positions, labels[:i] + (labels[i + 1], labels[i]) + labels[i + 2:]


def block_event(positions: Sequence[int], labels: Sequence[int], k: int, x: int) -> bool:
    """E_{t,k,x} membership on raw tuples; the caller guarantees 0 <= k <= N."""
    n = len(labels)
    if any(labels[i] != FIRST_CLASS for i in range(k)):
        return False
    if any(labels[i] != SECOND_CLASS for i in range(k, n)):
        return False
    if k == 0:
        return positions[0] >= x
    return all(positions[i] == x + i for i in range(k))


def event_spec(k: int, x: int, t: float, n: int) -> EventSpec:
    """E_{t,k,x} for N particles; bad arguments raise ArgumentError."""
    try:
        spec = EventSpec(t=t, k=k, x=x)
        spec.check_particles(n)
    except ValueError as e:
        raise ArgumentError(str(e)) from e
    return spec


def event_holds(config: ParticleConfig, k: int, x: int) -> bool:
    """Whether config lies in E_{t,k,x}.

    For k >= 1 the labels must be nu^(k) and the first k particles must sit on
    x, x + 1, ..., x + k - 1. For k = 0 all labels are 1 and x_1 >= x.
    """
    spec = event_spec(k, x, 0.0, config.n)
    return block_event(config.positions, config.labels, spec.k, spec.x)


def eligible_moves(config: ParticleConfig) -> List[Move]:
    """Moves that can fire from config, ordered by particle index (1-based)."""
    return [Move(i + 1, kind) for i, kind in moves_of(config.positions, config.labels)]


def apply_move(config: ParticleConfig, move: Move) -> ParticleConfig:
    """Fire an eligible move."""
    index, kind = move
    kind = MoveKind(kind)
    if (index - 1, kind) not in moves_of(config.positions, config.labels):
        raise IneligibleMoveError(f"move {index} {kind.value} cannot fire from {config.positions} {config.labels}")
    positions, labels = apply_to(config.positions, config.labels, index - 1, kind)
    return ParticleConfig(positions=positions, labels=labels)
