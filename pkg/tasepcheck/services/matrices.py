"""
Scattering matrices of the two-species TASEP.

S_{beta alpha} is a 4x4 block, T_l = I_2^{(l-1)} (x) S_{beta alpha} (x) I_2^{(N-l-1)} and
A_sigma = T_{a_n} ... T_{a_1} for a word sigma = T_{a_n} ... T_{a_1}. The dense products
exist to check the closed form of the diagonal entries [A_sigma]_{h_k, h_k}.

Permutations are tuples in one-line notation (sigma(1), ..., sigma(N)), values 1-based.
Matrix indices in docstrings are 1-based; numpy storage is 0-based.
"""
import itertools
import logging
from functools import reduce
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import ArgumentError, ResourceLimitError, SingularityError
from tasepcheck.models.numerics import PermutationWord, SpectralPoint

logger = logging.getLogger(__name__)

IDENTITY_2 = np.eye(2, dtype=complex)


def permutation_sign(sigma: Sequence[int]) -> int:
    """sgn(sigma) from the cycle decomposition."""
    n = len(sigma)
    seen = [False] * n
    transpositions = 0
    for start in range(n):
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = sigma[i] - 1
            length += 1
        if length:
            transpositions += length - 1
    return -1 if transpositions % 2 else 1


def inversions(sigma: Sequence[int]) -> List[Tuple[int, int]]:
    """Pairs (beta, alpha) = (sigma(i), sigma(j)) with i < j and sigma(i) > sigma(j)."""
    return [(sigma[i], sigma[j])
            for i in range(len(sigma)) for j in range(i + 1, len(sigma)) if sigma[i] > sigma[j]]


def permutations_with_sign(n: int) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """All of S_n in lexicographic (rank) order, with signs."""
    for sigma in itertools.permutations(range(1, n + 1)):
        yield sigma, permutation_sign(sigma)


def check_permutation_cap(n: int) -> None:
    cap = get_settings().PERMUTATION_CAP
    if n > cap:
        raise ResourceLimitError(f"N={n} exceeds the permutation cap {cap} ({n}! terms)")


def _one_minus(xi: SpectralPoint, index: int) -> complex:
    value = 1.0 - xi[index]
    if value == 0:
        raise SingularityError(f"xi_{index} = 1")
    return value


def s_matrix(alpha: int, beta: int, xi: SpectralPoint) -> np.ndarray:
    """
    The 4x4 block S_{beta alpha}.

    Diagonal (-(1-xi_b)/(1-xi_a), -(1-xi_b)/(1-xi_a), -1, -(1-xi_b)/(1-xi_a)) and a single
    off-diagonal entry (xi_b - xi_a)/(1 - xi_a) at row 2, column 3.
    """
    if alpha == beta:
        raise ArgumentError("S_{beta alpha} needs alpha != beta")
    denominator = _one_minus(xi, alpha)
    ratio = -(1.0 - xi[beta]) / denominator
    block = np.diag(np.array([ratio, ratio, -1.0, ratio], dtype=complex))
    block[1, 2] = (xi[beta] - xi[alpha]) / denominator
    return block


def t_matrix(l: int, alpha: int, beta: int, n: int, xi: SpectralPoint) -> np.ndarray:
    """T_l(alpha, beta) = I_2^{(l-1)} (x) S_{beta alpha} (x) I_2^{(N-l-1)}, a 2^N x 2^N matrix."""
    if not 1 <= l <= n - 1:
        raise ArgumentError(f"l={l} outside [1, {n - 1}]")
    factors = [IDENTITY_2] * (l - 1) + [s_matrix(alpha, beta, xi)] + [IDENTITY_2] * (n - l - 1)
    return reduce(np.kron, factors)


def decompose_permutation(sigma: Sequence[int], from_right: bool = False) -> PermutationWord:
    """
    A reduced word for sigma by bubble sort.

    Sorting sigma back to the identity with adjacent swaps s_1, ..., s_n and reversing the
    list gives a_1, ..., a_n with sigma = T_{a_n} ... T_{a_1}. The word length is the number
    of inversions. from_right sweeps right-to-left, which usually yields a different word.
    """
    sigma = tuple(sigma)
    arrangement = list(sigma)
    n = len(arrangement)
    swaps = []
    changed = True
    while changed:
        changed = False
        slots = range(n - 2, -1, -1) if from_right else range(n - 1)
        for i in slots:
            if arrangement[i] > arrangement[i + 1]:
                arrangement[i], arrangement[i + 1] = arrangement[i + 1], arrangement[i]
                swaps.append(i + 1)
                changed = True
    return PermutationWord(sigma=sigma, word=tuple(reversed(swaps)))


def a_sigma(word: PermutationWord, xi: SpectralPoint, n: int) -> np.ndarray:
    """
    A_sigma = T_{a_n} ... T_{a_1}.

    Each factor T_{a_i}(alpha, beta) takes alpha, beta as the values sitting in slots
    a_i, a_i + 1 when it acts, tracked by applying the word to (1, ..., N).
    """
    if word.n != n or len(xi) < n:
        raise ArgumentError("word, spectral point and N disagree")
    cap = get_settings().DENSE_MATRIX_CAP
    if n > cap:
        raise ResourceLimitError(f"dense 2^{n} matrices exceed the cap N <= {cap}")
    arrangement = list(range(1, n + 1))
    product = np.eye(2 ** n, dtype=complex)
    for a in word.word:
        alpha, beta = arrangement[a - 1], arrangement[a]
        product = t_matrix(a, alpha, beta, n, xi) @ product
        arrangement[a - 1], arrangement[a] = beta, alpha
    return product


def diagonal_exponents(k: int, n: int) -> List[int]:
    """p_j = j - 1 for j <= k and j - 2 for j > k (j = 1..N)."""
    return [j - 1 if j <= k else j - 2 for j in range(1, n + 1)]


def a_sigma_diag_closed(sigma: Sequence[int], k: int, xi: SpectralPoint) -> complex:
    """
    [A_sigma]_{h_k, h_k} = sgn(sigma) prod_{j<=k} ((1-xi_j)/(1-xi_sigma(j)))^{j-1}
                                     prod_{j>k} ((1-xi_j)/(1-xi_sigma(j)))^{j-2}.
    """
    n = len(sigma)
    if not 0 <= k <= n:
        raise ArgumentError(f"k={k} outside [0, {n}]")
    value = complex(permutation_sign(sigma))
    for j, p in enumerate(diagonal_exponents(k, n), start=1):
        if p and sigma[j - 1] != j:
            value *= (_one_minus(xi, j) / _one_minus(xi, sigma[j - 1])) ** p
    return value


def single_species_diag(sigma: Sequence[int], xi: SpectralPoint) -> complex:
    """[A_sigma]_{1,1} = [A_sigma]_{2^N,2^N}: product over inversions (beta, alpha) of -(1-xi_b)/(1-xi_a)."""
    value = 1.0 + 0.0j
    for beta, alpha in inversions(sigma):
        value *= -_one_minus(xi, beta) / _one_minus(xi, alpha)
    return value


def h_index(k: int, n: int) -> int:
    """h_k = 2^{N-1} + ... + 2^{N-k} + 1 (1-based), and h_0 = 1."""
    if not 0 <= k <= n:
        raise ArgumentError(f"k={k} outside [0, {n}]")
    return sum(2 ** (n - j) for j in range(1, k + 1)) + 1
