"""
Stochastic paths and a master-equation oracle for the two-species TASEP.

Every eligible move fires at rate 1. Paths are drawn with the Gillespie algorithm; the
oracle integrates the master equation by uniformisation with rate bound N, which is
exact up to a Poisson tail that `poisson_jump_cap` makes smaller than the requested tol.
"""
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import poisson

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import ArgumentError, ResourceLimitError
from tasepcheck.models.particles import MoveKind, ParticleConfig, SpeciesSequence
from tasepcheck.models.results import OracleParams, ProbEstimate
from tasepcheck.services.dynamics import State, apply_to, block_event, event_spec, moves_of

logger = logging.getLogger(__name__)

Distribution = Dict[State, float]


def poisson_jump_cap(mean: float, tol: float) -> int:
    """Smallest J with P(Poisson(mean) > J) <= tol."""
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    if mean < 0:
        raise ArgumentError("mean must be nonnegative")
    if mean == 0:
        return 0
    cap = int(max(0.0, poisson.isf(tol, mean)))
    while poisson.sf(cap, mean) > tol:
        cap += 1
    while cap > 0 and poisson.sf(cap - 1, mean) <= tol:
        cap -= 1
    return cap


def oracle_params(n: int, t: float, tol: Optional[float] = None) -> OracleParams:
    """Truncation for uniformisation at rate N over [0, t]."""
    tol = tol if tol is not None else get_settings().ORACLE_TOL
    return OracleParams(jump_cap=max(1, poisson_jump_cap(n * t, tol)), tol=tol)


def next_event(positions: Tuple[int, ...], labels: Tuple[int, ...],
               rng: np.random.Generator) -> Tuple[float, Tuple[int, MoveKind]]:
    """Holding time in the current configuration and the move that ends it (0-based index)."""
    moves = moves_of(positions, labels)
    # the rightmost particle can always step, so the total rate is >= 1
    wait = rng.exponential(1.0 / len(moves))
    return wait, moves[rng.integers(len(moves))]


def _gillespie(positions: Tuple[int, ...], labels: Tuple[int, ...], t: float,
               rng: np.random.Generator) -> State:
    clock = 0.0
    while True:
        wait, (i, kind) = next_event(positions, labels, rng)
        clock += wait
        if clock > t:
            return positions, labels
        positions, labels = apply_to(positions, labels, i, kind)


def simulate_path(initial: ParticleConfig, t: float, rng: np.random.Generator) -> ParticleConfig:
    """
    Configuration at time t of one path started from `initial`.

    Args:
        initial: starting positions and species labels
        t: time horizon (t = 0 returns `initial`)
        rng: numpy Generator the holding times and move choices are drawn from

    Returns:
        The configuration at time t
    """
    if t < 0:
        raise ArgumentError("t must be nonnegative")
    if t == 0:
        return initial
    positions, labels = _gillespie(initial.positions, initial.labels, t, rng)
    return ParticleConfig(positions=positions, labels=labels)


def _check_initial_labels(initial: ParticleConfig, k: int) -> None:
    try:
        expected = SpeciesSequence.nu(k, initial.n).word
    except ValueError as e:
        raise ArgumentError(str(e)) from e
    if initial.labels != expected:
        raise ArgumentError(f"initial labels {initial.labels} are not nu^({k}) = {expected}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of replicas."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def mc_event_probability(initial: ParticleConfig, k: int, x: int, t: float, n: int, seed: int,
                         workers: Optional[int] = None) -> ProbEstimate:
    """
    Fraction of n independent paths that lie in E_{t,k,x} at time t.

    Replicas are grouped in blocks of MC_BLOCK_SIZE; block b draws from its own stream,
    so the estimate depends on (seed, n) only, not on the number of worker threads.
    """
    spec = event_spec(k, x, t, initial.n)
    _check_initial_labels(initial, k)
    if n < 1:
        raise ArgumentError("n must be positive")

    settings = get_settings()
    block_size = settings.MC_BLOCK_SIZE
    blocks = math.ceil(n / block_size)

    def run_block(block: int) -> int:
        rng = block_generator(seed, block)
        size = min(block_size, n - block * block_size)
        hits = 0
        for _ in range(size):
            if spec.t == 0:
                positions, labels = initial.positions, initial.labels
            else:
                positions, labels = _gillespie(initial.positions, initial.labels, spec.t, rng)
            hits += block_event(positions, labels, spec.k, spec.x)
        return hits

    workers = workers or settings.worker_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        hits = sum(executor.map(run_block, range(blocks)))
    logger.debug(f"mc N={initial.n} k={k} x={x} t={t}: {hits}/{n} hits over {blocks} blocks")
    return ProbEstimate.from_counts(hits, n)


def uniformized_kernel(config: ParticleConfig, rate: float) -> List[Tuple[ParticleConfig, float]]:
    """Row of U = I + Q / rate at config: each eligible move with 1 / rate, staying put with the rest."""
    moves = moves_of(config.positions, config.labels)
    if rate < len(moves):
        raise ArgumentError(f"rate {rate} is below the total jump rate {len(moves)}")
    row = []
    for i, kind in moves:
        positions, labels = apply_to(config.positions, config.labels, i, kind)
        row.append((ParticleConfig(positions=positions, labels=labels), 1.0 / rate))
    stay = 1.0 - len(moves) / rate
    if stay > 0:
        row.append((config, stay))
    return row


def _uniformized_step(vector: Distribution, rate: float) -> Distribution:
    following: Distribution = defaultdict(float)
    for (positions, labels), mass in vector.items():
        moves = moves_of(positions, labels)
        share = mass / rate
        for i, kind in moves:
            following[apply_to(positions, labels, i, kind)] += share
        stay = mass - share * len(moves)
        if stay:
            following[(positions, labels)] += stay
    return following


def master_equation_distribution(initial: ParticleConfig, t: float,
                                 params: Optional[OracleParams] = None) -> Distribution:
    """
    Law of the configuration at time t, truncated after params.jump_cap uniformised jumps.

    Returns sum_j Poisson(N t; j) U^j delta_initial. The mass missing from the total is the
    leaked tail, at most params.tol; params whose cap leaves a larger tail raise ArgumentError.
    """
    if t < 0:
        raise ArgumentError("t must be nonnegative")
    rate = float(initial.n)
    params = params or oracle_params(initial.n, t)
    start = (initial.positions, initial.labels)
    if t == 0:
        return {start: 1.0}
    if poisson.sf(params.jump_cap, rate * t) > params.tol:
        raise ArgumentError(f"jump_cap={params.jump_cap} leaves more than tol={params.tol:g} of "
                            f"Poisson({rate * t:g}) mass beyond the cap")

    cap = get_settings().ORACLE_MAX_STATES
    weights = poisson.pmf(np.arange(params.jump_cap + 1), rate * t)
    vector: Distribution = {start: 1.0}
    law: Distribution = defaultdict(float)
    for j, weight in enumerate(weights):
        if j:
            vector = _uniformized_step(vector, rate)
            if len(vector) > cap:
                raise ResourceLimitError(
                    f"oracle state space exceeded {cap} states after {j} jumps "
                    f"(N={initial.n}, t={t}, jump_cap={params.jump_cap})")
        for state, mass in vector.items():
            law[state] += weight * mass
    logger.debug(f"oracle N={initial.n} t={t}: jump_cap={params.jump_cap}, {len(law)} states")
    return dict(law)


def event_mass(law: Distribution, k: int, x: int) -> float:
    """Probability that a configuration drawn from law lies in E_{t,k,x}."""
    return math.fsum(mass for (positions, labels), mass in law.items()
                     if block_event(positions, labels, k, x))


def master_equation_probability(initial: ParticleConfig, k: int, x: int, t: float,
                                params: Optional[OracleParams] = None) -> float:
    """P_{(Y, nu^(k))}(E_{t,k,x}) from the uniformised master equation, error at most params.tol."""
    spec = event_spec(k, x, t, initial.n)
    _check_initial_labels(initial, k)
    params = params or oracle_params(initial.n, spec.t)
    logger.info(f"oracle N={initial.n} k={k} x={x} t={t}: jump_cap={params.jump_cap}, tol={params.tol:g}")
    return event_mass(master_equation_distribution(initial, spec.t, params), spec.k, spec.x)
