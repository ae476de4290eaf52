"""
Numerical checks of the algebraic identities behind the exact formulas.

Each check evaluates both sides of a rational identity at one spectral point and returns
|LHS - RHS| / max(|LHS|, |RHS|, sum |terms|), the terms being the summands of the LHS.
`run_suite` repeats every check at random points and reports the worst error per (identity, N, k).
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import ArgumentError
from tasepcheck.models.numerics import SpectralPoint
from tasepcheck.models.results import IdentityReport
from tasepcheck.services.matrices import (
    a_sigma_diag_closed,
    h_index,
    permutation_sign,
    permutations_with_sign,
    t_matrix,
)

logger = logging.getLogger(__name__)

SUITE_SIZES = range(2, 7)


def complex_fsum(values: Iterable[complex]) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def term_magnitude(terms: Iterable[complex]) -> float:
    return math.fsum(abs(v) for v in terms)


def relative_error(lhs: complex, rhs: complex, magnitude: float = 0.0) -> float:
    """|lhs - rhs| relative to the larger side, or to `magnitude` when the sides cancel below it."""
    scale = max(abs(lhs), abs(rhs), magnitude)
    if scale == 0:
        return 0.0
    return abs(lhs - rhs) / scale


def vandermonde(xi: SpectralPoint) -> complex:
    """prod_{i<j} (xi_j - xi_i)."""
    value = 1.0 + 0.0j
    for i, j in itertools.combinations(range(1, len(xi) + 1), 2):
        value *= xi[j] - xi[i]
    return value


def _require(xi: SpectralPoint, n: int, inside_unit_disk: bool = False, nonzero: bool = False) -> None:
    if len(xi) != n:
        raise ArgumentError(f"spectral point has {len(xi)} variables, expected {n}")
    if inside_unit_disk and any(abs(v) >= 1 for v in xi.xi):
        raise ArgumentError("spectral variables must lie inside the unit disk")
    if nonzero and any(v == 0 for v in xi.xi):
        raise ArgumentError("spectral variables must be nonzero")
    if len(set(xi.xi)) != n:
        raise ArgumentError("spectral variables must be pairwise distinct")


def _check_k(k: int, n: int) -> None:
    if not 0 <= k <= n:
        raise ArgumentError(f"k={k} outside [0, {n}]")


def check_bethe_sum_identity(n: int, k: int, xi: SpectralPoint) -> float:
    """
    sum_sigma [A_sigma]_{h_k,h_k} xi_s(2) xi_s(3)^2 ... xi_s(N)^{N-1}
                / prod_{m=k+1}^{N} (1 - xi_s(m) ... xi_s(N))
      = (1 - xi_1) ... (1 - xi_k) prod_{i<j} (xi_j - xi_i) / (1 - xi_i) prod_i 1 / (1 - xi_i)
    """
    _check_k(k, n)
    _require(xi, n, inside_unit_disk=True)
    terms = []
    for sigma, _ in permutations_with_sign(n):
        numerator = a_sigma_diag_closed(sigma, k, xi)
        for j in range(2, n + 1):
            numerator *= xi[sigma[j - 1]] ** (j - 1)
        denominator = 1.0 + 0.0j
        suffix = 1.0 + 0.0j
        for m in range(n, k, -1):
            suffix *= xi[sigma[m - 1]]
            denominator *= 1.0 - suffix
        terms.append(numerator / denominator)
    lhs = complex_fsum(terms)

    rhs = 1.0 + 0.0j
    for i in range(1, k + 1):
        rhs *= 1.0 - xi[i]
    for i, j in itertools.combinations(range(1, n + 1), 2):
        rhs *= (xi[j] - xi[i]) / (1.0 - xi[i])
    for i in range(1, n + 1):
        rhs /= 1.0 - xi[i]
    return relative_error(lhs, rhs, term_magnitude(terms))


def check_equivalent_identity(n: int, k: int, xi: SpectralPoint) -> float:
    """
    The same identity after dividing by prod_{j<=k} (1-xi_j)^{j-1} prod_{j>k} (1-xi_j)^{j-2}
    and substituting xi_i -> 1 / xi_{N-i+1}:

    sum_sigma sgn(sigma) xi_s(N-k-1) xi_s(N-k-2)^2 ... xi_s(1)^{N-k-1}
        / [prod_{j=2}^{k} (xi_s(N+1-j) - 1)^{j-1} prod_{j=k+1}^{N} (xi_s(N+1-j) - 1)^{j-2}
           prod_{m=1}^{N-k} (xi_s(m) ... xi_s(1) - 1)]
      = prod_i (xi_i - 1)^{-(N-1)} prod_{i<j} (xi_j - xi_i)
    """
    _check_k(k, n)
    _require(xi, n, nonzero=True)
    terms = []
    for sigma, sign in permutations_with_sign(n):
        numerator = complex(sign)
        for p in range(1, n - k):
            numerator *= xi[sigma[p - 1]] ** (n - k - p)
        denominator = 1.0 + 0.0j
        for j in range(2, k + 1):
            denominator *= (xi[sigma[n - j]] - 1.0) ** (j - 1)
        for j in range(k + 1, n + 1):
            denominator *= (xi[sigma[n - j]] - 1.0) ** (j - 2)
        prefix = 1.0 + 0.0j
        for m in range(1, n - k + 1):
            prefix *= xi[sigma[m - 1]]
            denominator *= prefix - 1.0
        terms.append(numerator / denominator)
    lhs = complex_fsum(terms)

    rhs = vandermonde(xi)
    for i in range(1, n + 1):
        rhs /= (xi[i] - 1.0) ** (n - 1)
    return relative_error(lhs, rhs, term_magnitude(terms))


def check_laplace_vandermonde(n: int, k: int, xi: SpectralPoint) -> float:
    """
    Laplace expansion of the Vandermonde determinant along the last k rows, with those rows
    taken in the shifted basis:

    sum_J sgn(I, J) prod_{i in J} (xi_i - 1)^{N-k} V(J) V(J^c) = prod_{i<j} (xi_j - xi_i),

    I = {N-k+1, ..., N}, J over the k-subsets of {1, ..., N}. sgn(I, J) is the sign of the
    permutation sending I^c to J^c and I to J, both in increasing order.
    """
    _check_k(k, n)
    _require(xi, n)
    indices = range(1, n + 1)
    terms = []
    for subset in itertools.combinations(indices, k):
        complement = tuple(i for i in indices if i not in subset)
        term = complex(permutation_sign(complement + subset))
        for i in subset:
            term *= (xi[i] - 1.0) ** (n - k)
        for block in (subset, complement):
            for i, j in itertools.combinations(block, 2):
                term *= xi[j] - xi[i]
        terms.append(term)
    return relative_error(complex_fsum(terms), vandermonde(xi), term_magnitude(terms))


def check_vandermonde_shift(n: int, xi: SpectralPoint) -> float:
    """
    sum_sigma sgn(sigma) prod_{j=2}^{N} (xi_s(N+1-j) - 1)^{-(j-1)}
      = prod_i (xi_i - 1)^{-(N-1)} prod_{i<j} (xi_j - xi_i)
    """
    _require(xi, n)
    terms = []
    for sigma, sign in permutations_with_sign(n):
        term = complex(sign)
        for j in range(2, n + 1):
            term /= (xi[sigma[n - j]] - 1.0) ** (j - 1)
        terms.append(term)
    rhs = vandermonde(xi)
    for i in range(1, n + 1):
        rhs /= (xi[i] - 1.0) ** (n - 1)
    return relative_error(complex_fsum(terms), rhs, term_magnitude(terms))


def shifted_basis_determinants(xi: SpectralPoint) -> Tuple[complex, complex]:
    """(det[(xi_i - 1)^{j-1}], det[xi_i^{j-1}]); column operations make them equal."""
    values = np.array(xi.xi, dtype=complex)
    powers = np.arange(len(values))
    shifted = np.linalg.det((values[:, None] - 1.0) ** powers[None, :])
    plain = np.linalg.det(values[:, None] ** powers[None, :])
    return complex(shifted), complex(plain)


def check_tl_diagonal(n: int, l: int, k: int, xi_pair: Sequence[complex]) -> float:
    """
    [T_l]_{h_k,h_k} against its two cases: -1 when l = k, otherwise -(1 - xi_b) / (1 - xi_a).

    xi_pair is (xi_alpha, xi_beta).
    """
    if not 1 <= l <= n - 1:
        raise ArgumentError(f"l={l} outside [1, {n - 1}]")
    _check_k(k, n)
    xi = SpectralPoint(xi=tuple(xi_pair))
    if len(xi) != 2:
        raise ArgumentError("xi_pair must hold (xi_alpha, xi_beta)")
    h = h_index(k, n) - 1
    entry = complex(t_matrix(l, 1, 2, n, xi)[h, h])
    expected = -1.0 + 0.0j if l == k else -(1.0 - xi[2]) / (1.0 - xi[1])
    return relative_error(entry, expected)


def random_spectral_point(rng: np.random.Generator, n: int, radius: float,
                          min_separation: Optional[float] = None, center: complex = 0.0) -> SpectralPoint:
    """
    n points on |xi - center| = radius, pairwise more than min_separation apart.

    Angles are a random rotation of the n equispaced angles, each moved by up to a quarter of
    the spacing, and the points come back in random order.
    """
    if min_separation is None:
        min_separation = get_settings().MIN_SEPARATION
    if n < 1:
        raise ArgumentError("n must be positive")
    if n > 1 and 2.0 * radius * math.sin(math.pi / (2 * n)) <= min_separation:
        raise ArgumentError(f"{n} points on radius {radius} cannot be {min_separation} apart")
    spacing = 2.0 * np.pi / n
    while True:
        angles = rng.uniform(0.0, 2.0 * np.pi) + spacing * (np.arange(n) + rng.uniform(-0.25, 0.25, size=n))
        values = center + radius * np.exp(1j * angles)
        rng.shuffle(values)
        gaps = np.abs(values[:, None] - values[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() > min_separation:
            return SpectralPoint(xi=tuple(complex(v) for v in values))


class IdentityCheck(NamedTuple):
    check_id: int
    name: str
    has_k: bool
    evaluate: Callable[[int, Optional[int], np.random.Generator], float]


def _bethe_sum_trial(n: int, k: int, rng: np.random.Generator) -> float:
    return check_bethe_sum_identity(n, k, random_spectral_point(rng, n, 0.5))


def _equivalent_trial(n: int, k: int, rng: np.random.Generator) -> float:
    return check_equivalent_identity(n, k, random_spectral_point(rng, n, 2.0))


def _laplace_trial(n: int, k: int, rng: np.random.Generator) -> float:
    return check_laplace_vandermonde(n, k, random_spectral_point(rng, n, 0.5))


def _shift_trial(n: int, k: Optional[int], rng: np.random.Generator) -> float:
    # terms scale like |xi - 1|^{-(j-1)}: sample around 1 so they do not swamp the sum
    return check_vandermonde_shift(n, random_spectral_point(rng, n, 2.0, center=1.0))


def _tl_diagonal_trial(n: int, k: int, rng: np.random.Generator) -> float:
    pair = random_spectral_point(rng, 2, 0.5)
    return max(check_tl_diagonal(n, l, k, pair.xi) for l in range(1, n))


CHECKS: List[IdentityCheck] = [
    IdentityCheck(0, "bethe_sum", True, _bethe_sum_trial),
    IdentityCheck(1, "equivalent", True, _equivalent_trial),
    IdentityCheck(2, "laplace_vandermonde", True, _laplace_trial),
    IdentityCheck(3, "vandermonde_shift", False, _shift_trial),
    IdentityCheck(4, "tl_diagonal", True, _tl_diagonal_trial),
]


def suite_jobs(sizes: Iterable[int] = SUITE_SIZES) -> List[Tuple[IdentityCheck, int, Optional[int]]]:
    """(check, N, k) in report order; checks without k get k = None."""
    jobs = []
    for n in sizes:
        for check in CHECKS:
            if check.has_k:
                jobs.extend((check, n, k) for k in range(n + 1))
            else:
                jobs.append((check, n, None))
    return jobs


def run_suite(seed: int = 0, trials: Optional[int] = None, threshold: Optional[float] = None,
              workers: Optional[int] = None, sizes: Iterable[int] = SUITE_SIZES) -> List[IdentityReport]:
    """
    Run every identity check `trials` times for N in `sizes` and k in [0, N].

    Job (check, N, k) draws from default_rng([seed, check id, N, k + 1]), so reports do not
    depend on scheduling. Reports come back in job order.
    """
    settings = get_settings()
    trials = trials if trials is not None else settings.IDENTITY_TRIALS
    threshold = threshold if threshold is not None else settings.IDENTITY_THRESHOLD
    if trials < 1:
        raise ArgumentError("trials must be positive")
    if seed < 0:
        raise ArgumentError("seed must be nonnegative")

    def run_job(job) -> IdentityReport:
        check, n, k = job
        rng = np.random.default_rng([seed, check.check_id, n, 0 if k is None else k + 1])
        worst = max(check.evaluate(n, k, rng) for _ in range(trials))
        return IdentityReport(name=check.name, N=n, k=k, trials=trials, max_rel_err=worst, threshold=threshold)

    jobs = suite_jobs(sizes)
    with ThreadPoolExecutor(max_workers=workers or settings.worker_count()) as executor:
        reports = list(executor.map(run_job, jobs))
    failed = [r for r in reports if not r.passed]
    logger.info(f"identity suite: {len(reports) - len(failed)}/{len(reports)} checks passed "
                f"(seed={seed}, trials={trials}, threshold={threshold:g})")
    for report in failed:
        logger.warning(f"{report.name} N={report.N} k={report.k}: max_rel_err={report.max_rel_err:.3e}")
    return reports
