import math

import pytest
from scipy.stats import poisson

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import ArgumentError, NumericError, ResourceLimitError
from tasepcheck.models.particles import ParticleConfig
from tasepcheck.models.results import ExactResult, Method
from tasepcheck.services import exact
from tasepcheck.services.exact import (
    default_x_range,
    event_configurations,
    event_probability,
    event_probability_permsum,
    event_probability_transition_sum,
    event_weight_exponents,
    step_event_probability,
    step_initial_probability,
    tasep_leftmost_tail,
    transition_probability,
)
from tasepcheck.services.simulator import (
    event_mass,
    master_equation_distribution,
    master_equation_probability,
    oracle_params,
)


def step(n):
    return tuple(range(1, n + 1))


def test_transition_probability_at_time_zero():
    assert transition_probability((1, 2), (1, 2), 1, 0.0).value == pytest.approx(1.0, abs=1e-15)
    assert transition_probability((1, 2), (1, 3), 1, 0.0).value == pytest.approx(0.0, abs=1e-15)
    assert transition_probability((1, 3, 4), (1, 3, 4), 2, 0.0).value == pytest.approx(1.0, abs=1e-15)


def test_transition_probability_single_particle():
    t = 1.3
    for gap in range(6):
        expected = math.exp(-t) * t ** gap / math.factorial(gap)
        assert transition_probability((2,), (2 + gap,), 0, t).value == pytest.approx(expected, rel=1e-12)
    assert transition_probability((2,), (1,), 1, t).value == pytest.approx(0.0, abs=1e-15)


def test_transition_probability_matches_oracle_state():
    """N=2, Y=(1,2), X=(2,3), k=1, t=1 against the mass the oracle puts on ((2,3), nu^(1))."""
    initial = ParticleConfig.step(2, 1)
    law = master_equation_distribution(initial, 1.0, oracle_params(2, 1.0, 1e-12))
    expected = law.get(((2, 3), (2, 1)), 0.0)
    value = transition_probability((1, 2), (2, 3), 1, 1.0).value
    assert abs(value - expected) < 1e-8


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_transition_probabilities_match_oracle_law(k):
    initial = ParticleConfig.step(3, k)
    law = master_equation_distribution(initial, 0.8, oracle_params(3, 0.8, 1e-12))
    for (positions, labels), mass in law.items():
        if labels == initial.labels and mass > 1e-6:
            assert abs(transition_probability(step(3), positions, k, 0.8).value - mass) < 1e-8


def test_event_weight_exponents():
    assert event_weight_exponents(0, 2) == [-2, -1]
    assert event_weight_exponents(1, 2) == [-1, -1]
    assert event_weight_exponents(2, 2) == [-1, 0]
    assert event_weight_exponents(2, 3) == [-2, -1, -1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_event_probability_at_time_zero(n):
    """Under step data the event holds surely at x = 1 and fails at x = 2."""
    for k in range(n + 1):
        assert event_probability(step(n), k, 1, 0.0).value == pytest.approx(1.0, abs=1e-12)
        assert event_probability(step(n), k, 2, 0.0).value == pytest.approx(0.0, abs=1e-12)


def test_event_probability_single_particle():
    t = 0.9
    for x in range(0, 6):
        tail = poisson.sf(x - 2, t) if x >= 2 else 1.0
        assert event_probability((1,), 0, x, t).value == pytest.approx(tail, abs=1e-12)
        mass = poisson.pmf(x - 1, t) if x >= 1 else 0.0
        assert event_probability((1,), 1, x, t).value == pytest.approx(mass, abs=1e-12)


def test_event_probability_result_fields():
    result = event_probability((1, 3, 4), 1, 2, 0.5)
    assert isinstance(result, ExactResult)
    assert result.method == Method.DETERMINANT.value
    assert result.moment_evals > 0
    assert result.condition is not None and result.condition >= 1.0
    assert result.in_range


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_determinant_and_permutation_sum_agree(n):
    for t in (0.5, 1.0):
        for k in range(n + 1):
            for x in (0, 1, 2, 3):
                det = event_probability(step(n), k, x, t).value
                perm = event_probability_permsum(step(n), k, x, t).value
                assert abs(det - perm) < 1e-9, (n, k, x, t)


def test_permutation_sum_is_reproducible_across_workers():
    values = {event_probability_permsum((1, 3, 4, 6), 2, 3, 0.7, workers=w).value for w in (1, 2, 5)}
    assert len(values) == 1


def test_permutation_sum_two_terms_at_n2(monkeypatch):
    seen = []
    original = exact.permutations_with_sign

    def spy(n):
        items = list(original(n))
        seen.append(len(items))
        return iter(items)

    monkeypatch.setattr(exact, "permutations_with_sign", spy)
    event_probability_permsum((1, 2), 1, 1, 0.5)
    assert seen == [2]


@pytest.mark.parametrize("y,k", [((1, 2), 0), ((1, 2), 1), ((1, 2), 2), ((1, 2, 3), 1), ((1, 3, 4), 2), ((1, 2, 3), 0)])
def test_transition_sum_matches_determinant(y, k):
    for t in (0.5, 1.0):
        for x in (1, 2, 3):
            det = event_probability(y, k, x, t).value
            summed = event_probability_transition_sum(y, k, x, t).value
            assert abs(det - summed) < 1e-9, (y, k, x, t)


def test_event_configurations():
    assert list(event_configurations((1, 2), 2, 2, 10)) == [(2, 3)]
    assert list(event_configurations((1, 2), 2, 0, 10)) == []
    assert list(event_configurations((1, 2), 1, 1, 4)) == [(1, 2), (1, 3), (1, 4)]
    assert list(event_configurations((1, 2), 0, 3, 5)) == [(3, 4), (3, 5), (4, 5)]


@pytest.mark.parametrize("n,times", [(2, (0.5, 1.0)), (3, (0.5, 1.0)), (4, (0.5, 1.0))])
def test_exact_matches_oracle(n, times):
    """Determinant path against the uniformised master equation under step data."""
    for t in times:
        for k in range(n + 1):
            initial = ParticleConfig.step(n, k)
            law = master_equation_distribution(initial, t, oracle_params(n, t, 1e-10))
            for x in range(0, n + 4):
                oracle = event_mass(law, k, x)
                assert abs(event_probability(step(n), k, x, t).value - oracle) <= 1e-7, (n, k, x, t)


def test_explicit_initial_condition_matches_oracle():
    initial = ParticleConfig.with_nu((1, 3, 4), 1)
    oracle = master_equation_probability(initial, 1, 2, 0.5)
    assert abs(event_probability((1, 3, 4), 1, 2, 0.5).value - oracle) <= 1e-7


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_step_event_probability_is_independent_of_k(n):
    """Under step data the general formula gives the same value for every k >= 1."""
    for t in (0.5, 1.0, 2.0):
        for x in range(-1, n + 5):
            values = [event_probability(step(n), k, x, t).value for k in range(1, n + 1)]
            assert max(values) - min(values) <= 1e-10, (n, x, t)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_step_formula_specialises_general_formula(n):
    for t in (0.5, 1.0, 2.0):
        for k in range(1, n + 1):
            for x in range(-1, n + 5):
                hankel = step_event_probability(n, k, x, t).value
                general = event_probability(step(n), k, x, t).value
                assert abs(hankel - general) <= 1e-10, (n, k, x, t)


def test_step_formula_six_particles():
    for x in range(0, 8):
        hankel = step_event_probability(6, 3, x, 1.0).value
        assert abs(hankel - event_probability(step(6), 3, x, 1.0).value) <= 1e-10
        assert -1e-9 <= hankel <= 1.0 + 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_leftmost_tail_specialises_general_formula(n):
    for t in (0.5, 1.0):
        for x in range(-1, n + 4):
            assert abs(tasep_leftmost_tail(n, x, t).value - event_probability(step(n), 0, x, t).value) <= 1e-10


def test_leftmost_tail_single_particle_is_poisson_tail():
    for t in (0.3, 1.0, 2.5):
        for j in range(0, 8):
            assert tasep_leftmost_tail(1, j + 1, t).value == pytest.approx(poisson.sf(j - 1, t), abs=1e-12)


def test_leftmost_tail_monotone_in_x():
    values = [tasep_leftmost_tail(3, x, 1.2).value for x in range(-2, 9)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert tasep_leftmost_tail(3, 1, 0.0).value == pytest.approx(1.0, abs=1e-12)


def test_leftmost_tail_matches_oracle():
    oracle = master_equation_probability(ParticleConfig.step(2, 0), 0, 2, 1.0)
    assert abs(tasep_leftmost_tail(2, 2, 1.0).value - oracle) <= 1e-8


def test_full_block_matches_single_species_oracle():
    """k = N: all particles first class, which is the block probability of the plain TASEP."""
    for n in (2, 3):
        initial = ParticleConfig.step(n, n)
        for x in (1, 2, 3):
            oracle = master_equation_probability(initial, n, x, 1.0)
            assert abs(step_event_probability(n, n, x, 1.0).value - oracle) <= 1e-7


def test_step_initial_probability_routes_k_zero_to_leftmost_tail(monkeypatch):
    calls = []
    monkeypatch.setattr(exact, "tasep_leftmost_tail", lambda n, x, t: calls.append((n, x, t)) or "tail")
    assert step_initial_probability(3, 0, 2, 1.0) == "tail"
    assert calls == [(3, 2, 1.0)]
    assert step_initial_probability(3, 2, 2, 1.0).method == Method.HANKEL.value


def test_argument_checks():
    with pytest.raises(ArgumentError):
        step_event_probability(3, 0, 1, 1.0)
    with pytest.raises(ArgumentError):
        event_probability((1, 2), 3, 1, 1.0)
    with pytest.raises(ArgumentError):
        event_probability((2, 1), 1, 1, 1.0)
    with pytest.raises(ArgumentError):
        event_probability((1, 2), 1, 1, -0.5)
    with pytest.raises(ArgumentError):
        transition_probability((1, 2), (1, 2, 3), 1, 1.0)


def test_permutation_cap(fresh_settings):
    fresh_settings.setenv("PERMUTATION_CAP", "3")
    with pytest.raises(ResourceLimitError):
        event_probability_permsum(step(4), 1, 1, 1.0)
    with pytest.raises(ResourceLimitError):
        transition_probability(step(4), step(4), 1, 1.0)
    assert event_probability(step(4), 1, 1, 1.0).in_range


def test_values_stay_in_probability_range():
    for n in (2, 3, 4):
        for k in range(n + 1):
            for x in default_x_range(n, 1.0):
                assert event_probability(step(n), k, x, 1.0).in_range


def test_default_x_range():
    assert default_x_range(3, 0.0) == [1, 2, 3, 4]
    assert default_x_range(2, 1.0) == list(range(-2, 7))


@pytest.mark.parametrize("n,x,t", [(12, -8, 3.0), (6, -30, 2.0), (5, -7, 3.0), (12, 1, 3.0)])
def test_leftmost_tail_is_certain_left_of_the_step(n, x, t):
    """Particles only jump right, so x_1(t) >= x holds surely for x <= 1."""
    result = tasep_leftmost_tail(n, x, t)
    assert result.value == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n,x,t", [(8, -7, 3.0), (12, 0, 3.0), (6, -20, 2.0)])
def test_block_left_of_the_step_is_impossible(n, x, t):
    result = step_event_probability(n, 1, x, t)
    assert abs(result.value) <= 1e-12


def test_ill_conditioned_hankel_switches_to_high_precision():
    result = tasep_leftmost_tail(12, -8, 3.0)
    assert result.condition > 1e4
    assert result.digits is not None and result.digits >= 40


@pytest.mark.parametrize("n", [2, 5, 8, 12])
def test_step_sweep_stays_in_probability_range(n):
    for t in (0.5, 3.0):
        for k in (0, 1, n):
            values = [step_initial_probability(n, k, x, t).value for x in default_x_range(n, t)]
            assert all(-1e-9 <= v <= 1.0 + 1e-9 for v in values), (n, k, t)


def test_high_precision_path_agrees_with_double_precision(fresh_settings):
    fresh_settings.setenv("HIGH_PRECISION_CONDITION", "1e300")
    double = event_probability((1, 3, 4), 1, 2, 0.5)
    assert double.digits is None
    fresh_settings.setenv("HIGH_PRECISION_CONDITION", "1")
    get_settings.cache_clear()
    precise = event_probability((1, 3, 4), 1, 2, 0.5)
    assert precise.digits is not None
    assert precise.value == pytest.approx(double.value, abs=1e-12)


def test_high_precision_path_gives_up_at_the_digit_ceiling(fresh_settings):
    fresh_settings.setenv("HIGH_PRECISION_CONDITION", "1")
    fresh_settings.setenv("HIGH_PRECISION_DIGITS", "20")
    fresh_settings.setenv("MAX_PRECISION_DIGITS", "30")
    with pytest.raises(NumericError):
        step_event_probability(4, 2, 2, 1.0)


def test_out_of_range_result_is_an_error():
    with pytest.raises(NumericError):
        exact._report(ExactResult(value=1.5, method=Method.HANKEL), "hankel")
    with pytest.raises(NumericError):
        exact._report(ExactResult(value=-1e-6, method=Method.DETERMINANT), "determinant")
    kept = exact._report(ExactResult(value=-1e-12, method=Method.DETERMINANT), "determinant")
    assert kept.probability == 0.0
