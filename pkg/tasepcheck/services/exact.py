"""
Exact probabilities for the TASEP with second class particles.

All formulas are N-fold contour integrals whose integrands factor per variable, so they
reduce to signed sums or determinants of contour moments I(m, r, t).
"""
import itertools
import logging
import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import ArgumentError, NumericError
from tasepcheck.models.results import ExactResult, Method
from tasepcheck.services.matrices import check_permutation_cap, diagonal_exponents, permutations_with_sign
from tasepcheck.services.moments import MomentTable, moment_series_precise
from tasepcheck.services.simulator import poisson_jump_cap

logger = logging.getLogger(__name__)

# mpmath.mp is shared by every thread; each worker keeps its own context
_contexts = threading.local()


def _positions(values: Sequence[int], name: str) -> Tuple[int, ...]:
    values = tuple(int(v) for v in values)
    if not values:
        raise ArgumentError(f"{name} must hold at least one position")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ArgumentError(f"{name} must be strictly increasing")
    cap = get_settings().MAX_PARTICLES
    if len(values) > cap:
        raise ArgumentError(f"N={len(values)} exceeds the particle cap {cap}")
    return values


def _check_k(k: int, n: int) -> None:
    if not 0 <= k <= n:
        raise ArgumentError(f"k={k} outside [0, {n}]")


def _check_time(t: float) -> None:
    if t < 0:
        raise ArgumentError("t must be nonnegative")


def _report(result: ExactResult, label: str) -> ExactResult:
    if not result.in_range:
        message = f"{label} returned {result.value!r}, outside [0, 1] beyond rounding"
        logger.error(message)
        raise NumericError(message)
    return result


def lu_determinant(matrix: np.ndarray) -> Tuple[float, float]:
    """Determinant by LU with partial pivoting, and the 2-norm condition number."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    det = float(np.prod(np.diag(lu))) * (-1.0 if swaps % 2 else 1.0)
    with np.errstate(all="ignore"):
        condition = float(np.linalg.cond(matrix))
    # -0.0 would serialise as "-0"
    return det + 0.0, condition


def _mp_context() -> mpmath.MPContext:
    ctx = getattr(_contexts, "ctx", None)
    if ctx is None:
        ctx = _contexts.ctx = mpmath.MPContext()
    return ctx


def _precise_determinant(entries: Sequence[Sequence[Tuple[int, int]]], t: float, ctx: mpmath.MPContext) -> float:
    memo = {}

    def moment(m: int, r: int):
        if (m, r) not in memo:
            memo[(m, r)] = moment_series_precise(m, r, t, ctx)
        return memo[(m, r)]

    matrix = ctx.matrix([[moment(m, r) for m, r in row] for row in entries])
    return float(ctx.det(matrix))


def moment_determinant(entries: Sequence[Sequence[Tuple[int, int]]],
                       table: MomentTable) -> Tuple[float, float, Optional[int]]:
    """
    det[I(m_ij, r_ij, t)] for a square grid of moment indices (m_ij, r_ij).

    The determinant is taken in double precision first. When its condition number is not finite
    or exceeds HIGH_PRECISION_CONDITION, moments and determinant are recomputed with mpmath,
    starting at max(HIGH_PRECISION_DIGITS, log10(cond) + 25) digits and doubling until two
    consecutive values agree to 1e-14.

    Returns:
        (determinant, condition number, working digits or None for double precision)
    """
    matrix = np.array([[table(m, r) for m, r in row] for row in entries])
    value, condition = lu_determinant(matrix)
    settings = get_settings()
    if math.isfinite(condition) and condition <= settings.HIGH_PRECISION_CONDITION:
        return value, condition, None

    digits = settings.HIGH_PRECISION_DIGITS
    if math.isfinite(condition):
        digits = max(digits, math.ceil(math.log10(condition)) + 25)
    ctx = _mp_context()
    previous = None
    while digits <= settings.MAX_PRECISION_DIGITS:
        ctx.dps = digits
        current = _precise_determinant(entries, table.t, ctx)
        if previous is not None and abs(current - previous) <= 1e-14 * max(1.0, abs(current)):
            logger.debug(f"determinant with cond={condition:.3e} settled at {digits} digits: "
                         f"{current!r} (double precision gave {value!r})")
            return current + 0.0, condition, digits
        previous = current
        digits *= 2
    raise NumericError(f"determinant with cond={condition:.3e} did not settle within "
                       f"{settings.MAX_PRECISION_DIGITS} digits")


def event_weight_exponents(k: int, n: int) -> List[int]:
    """
    Powers q_i of (1 - xi_i) in the event-probability integrand after pulling out the Vandermonde.

    prod_{i<j} 1/(1 - xi_i) gives -(N - i), the standalone product gives -1 and the block
    prefactor gives +1 for i <= k.
    """
    return [(1 if i <= k else 0) - (n - i) - 1 for i in range(1, n + 1)]


def transition_probability(y: Sequence[int], x: Sequence[int], k: int, t: float) -> ExactResult:
    """
    P_{(Y, nu^(k))}(X, nu^(k); t), the diagonal transition probability.

    With [A_sigma]_{h_k,h_k} in closed form the integrand regroups per variable: xi_j carries
    xi^{x_{sigma^-1(j)} - y_j - 1} and (1 - xi)^{p_j - p_{sigma^-1(j)}}, so

        P = sum_sigma sgn(sigma) prod_j I(m_j, e_j, t).
    """
    y = _positions(y, "Y")
    x = _positions(x, "X")
    n = len(y)
    if len(x) != n:
        raise ArgumentError("X and Y must have the same length")
    _check_k(k, n)
    _check_time(t)
    check_permutation_cap(n)

    table = MomentTable(t)
    p = diagonal_exponents(k, n)
    terms = []
    for sigma, sign in permutations_with_sign(n):
        inverse = [0] * n
        for i, s in enumerate(sigma):
            inverse[s - 1] = i
        term = float(sign)
        for j in range(n):
            term *= table(x[inverse[j]] - y[j] - 1, p[j] - p[inverse[j]])
            if term == 0.0:
                break
        terms.append(term)
    result = ExactResult(value=math.fsum(terms), method=Method.PERM_SUM, moment_evals=table.evaluations)
    return _report(result, "transition_probability")


def event_probability(y: Sequence[int], k: int, x: int, t: float) -> ExactResult:
    """
    P_{(Y, nu^(k))}(E_{t,k,x}) by the determinant reduction of the contour formula.

    The integrand is det[xi_i^{j-1}] prod_i w_i(xi_i) with
    w_i(xi) = xi^{x - y_i - 1} e^{(1/xi - 1) t} (1 - xi)^{q_i}; by multilinearity the N-fold
    integral is det[I(x - y_i - 1 + j - 1, q_i, t)].
    """
    y = _positions(y, "Y")
    n = len(y)
    _check_k(k, n)
    _check_time(t)

    table = MomentTable(t)
    q = event_weight_exponents(k, n)
    entries = [[(x - y[i] - 1 + j, q[i]) for j in range(n)] for i in range(n)]
    value, condition, digits = moment_determinant(entries, table)
    logger.debug(f"event_probability N={n} k={k} x={x} t={t}: cond={condition:.3e}, "
                 f"{table.evaluations} moments")
    result = ExactResult(value=value, method=Method.DETERMINANT, moment_evals=table.evaluations,
                         condition=condition, digits=digits)
    return _report(result, "event_probability")


def event_probability_permsum(y: Sequence[int], k: int, x: int, t: float,
                              workers: Optional[int] = None) -> ExactResult:
    """
    Same quantity as event_probability, with the Vandermonde expanded into N! monomials:

        sum_sigma sgn(sigma) prod_i I(x - y_i - 1 + sigma(i) - 1, q_i, t).

    Permutations are split into chunks evaluated on a thread pool; the terms are summed in
    permutation rank order, so the result does not depend on the number of workers.
    """
    y = _positions(y, "Y")
    n = len(y)
    _check_k(k, n)
    _check_time(t)
    check_permutation_cap(n)

    table = MomentTable(t)
    q = event_weight_exponents(k, n)
    ranked = list(permutations_with_sign(n))

    def chunk_terms(chunk):
        terms = []
        for sigma, sign in chunk:
            term = float(sign)
            for i in range(n):
                term *= table(x - y[i] - 1 + sigma[i] - 1, q[i])
            terms.append(term)
        return terms

    workers = workers or get_settings().worker_count()
    size = max(1, math.ceil(len(ranked) / workers))
    chunks = [ranked[start:start + size] for start in range(0, len(ranked), size)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        per_chunk = list(executor.map(chunk_terms, chunks))
    terms = [term for chunk in per_chunk for term in chunk]
    result = ExactResult(value=math.fsum(terms), method=Method.PERM_SUM, moment_evals=table.evaluations)
    return _report(result, "event_probability_permsum")


def event_configurations(y: Sequence[int], k: int, x: int, rightmost: int):
    """Positions X in E_{t,k,x} reachable from Y (x_i >= y_i) with x_N <= rightmost."""
    n = len(y)
    block = tuple(range(x, x + k))
    if any(b < yi for b, yi in zip(block, y)):
        return
    free = n - k
    if free == 0:
        if not block or block[-1] <= rightmost:
            yield block
        return
    low = block[-1] + 1 if block else x
    for tail in itertools.combinations(range(low, rightmost + 1), free):
        candidate = block + tail
        if all(c >= yi for c, yi in zip(candidate, y)):
            yield candidate


def event_probability_transition_sum(y: Sequence[int], k: int, x: int, t: float,
                                     tol: float = 1e-12) -> ExactResult:
    """
    Event probability as the sum of transition_probability over the configurations of the event.

    The rightmost site only advances when the rightmost particle steps, at rate 1, so
    truncating x_N at y_N + R with P(Poisson(t) > R) <= tol loses at most tol.
    """
    y = _positions(y, "Y")
    n = len(y)
    _check_k(k, n)
    _check_time(t)
    check_permutation_cap(n)

    rightmost = y[-1] + poisson_jump_cap(t, tol)
    terms = [transition_probability(y, positions, k, t).value
             for positions in event_configurations(y, k, x, rightmost)]
    result = ExactResult(value=math.fsum(terms), method=Method.TRANSITION_SUM)
    logger.debug(f"transition sum N={n} k={k} x={x} t={t}: {len(terms)} configurations")
    return _report(result, "event_probability_transition_sum")


def _hankel_probability(n: int, x: int, t: float, weight_exponent: int) -> ExactResult:
    """
    (1/N!) oint ... oint prod_{i<j} (xi_j - xi_i)^2 prod_i xi_i^{x-N-1} e^{(1/xi_i - 1)t} (1 - xi_i)^{r}
    times (-1)^{N(N-1)/2}, reduced by the Andreief identity to
    (-1)^{N(N-1)/2} det[I(x - N - 1 + i + j - 2, r, t)].
    """
    if n < 1:
        raise ArgumentError("N must be positive")
    _check_time(t)
    table = MomentTable(t)
    base = x - n - 1
    entries = [[(base + i + j, weight_exponent) for j in range(n)] for i in range(n)]
    det, condition, digits = moment_determinant(entries, table)
    sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
    logger.debug(f"hankel N={n} x={x} t={t} r={weight_exponent}: cond={condition:.3e}")
    return ExactResult(value=sign * det + 0.0, method=Method.HANKEL,
                       moment_evals=table.evaluations, condition=condition, digits=digits)


def step_event_probability(n: int, k: int, x: int, t: float) -> ExactResult:
    """
    For Y = (1, ..., N) and 1 <= k <= N the event probability is a Hankel
    determinant with weight (1 - xi)^{-(N-1)}. The value does not depend on k.
    """
    if not 1 <= k <= n:
        raise ArgumentError(f"step_event_probability needs 1 <= k <= N, got k={k}, N={n}")
    if n > get_settings().MAX_PARTICLES:
        raise ArgumentError(f"N={n} exceeds the particle cap")
    return _report(_hankel_probability(n, x, t, -(n - 1)), "step_event_probability")


def tasep_leftmost_tail(n: int, x: int, t: float) -> ExactResult:
    """
    P(x_1(t) >= x) for the single-species TASEP from Y = (1, ..., N): the same Hankel
    reduction with weight (1 - xi)^{-N}.
    """
    if n > get_settings().MAX_PARTICLES:
        raise ArgumentError(f"N={n} exceeds the particle cap")
    return _report(_hankel_probability(n, x, t, -n), "tasep_leftmost_tail")


def step_initial_probability(n: int, k: int, x: int, t: float) -> ExactResult:
    """Event probability under step initial data: the Hankel formula for k >= 1, the TASEP tail for k = 0."""
    if k == 0:
        return tasep_leftmost_tail(n, x, t)
    return step_event_probability(n, k, x, t)


def default_x_range(n: int, t: float) -> List[int]:
    """Sweep [1 - ceil(3t), 1 + N + ceil(3t)] around the step block."""
    spread = math.ceil(3 * t)
    return list(range(1 - spread, 1 + n + spread + 1))
