"""Contour moments I(m, r, t) = (1/2 pi i) oint_C xi^m (1 - xi)^r e^{(1/xi - 1) t} dxi.

Every exact formula in `tasepcheck.services.exact` factors into these one-dimensional
integrals. Two independent evaluations are provided: the residue at the origin, summed
as a series, and the trapezoidal rule on a circle of radius < 1.
"""
import logging
import math
import threading
import warnings
from typing import Dict, Optional, Tuple

import mpmath
import numpy as np
from scipy.special import comb

from tasepcheck.core.config import get_settings
from tasepcheck.core.errors import NumericError, NumericWarning
from tasepcheck.models.numerics import ContourMomentKey, QuadratureResult, QuadratureSpec, SeriesSpec

logger = logging.getLogger(__name__)


def binomial_series_coefficient(r: int, n: int) -> int:
    """Coefficient c_n(r) of xi^n in (1 - xi)^r (zero for n < 0)."""
    if n < 0:
        return 0
    if r >= 0:
        return (-1) ** n * comb(r, n, exact=True)
    return comb(n - r - 1, n, exact=True)


def moment_series(key: ContourMomentKey, spec: Optional[SeriesSpec] = None) -> float:
    """
    I(m, r, t) from the residue at the origin.

    I = e^{-t} sum_{j >= 0} t^j / j! * c_{j-m-1}(r).

    For r >= 0 the sum is finite. For r < 0 all terms are positive and the ratio of
    consecutive terms, t (n - r) / ((j + 1)(n + 1)) with n = j - m - 1, decreases, so once
    it drops below 1 the tail is bounded by a geometric series.

    Args:
        key: the moment index (m, r, t)
        spec: truncation control (default: SERIES_REL_TOL, 10 (t + |m| + |r|) + 200 terms)

    Returns:
        The real value of the moment
    """
    if spec is None:
        spec = SeriesSpec.for_key(key, get_settings().SERIES_REL_TOL)
    m, r, t = key.m, key.r, key.t

    j = max(0, m + 1)
    n = j - m - 1
    if r >= 0 and n > r:
        return 0.0
    if t == 0.0:
        return float(binomial_series_coefficient(r, n)) if j == 0 else 0.0

    weight = math.exp(j * math.log(t) - math.lgamma(j + 1) - t)
    coeff = float(binomial_series_coefficient(r, n))
    terms = []
    running = 0.0
    for _ in range(spec.max_terms):
        term = weight * coeff
        terms.append(term)
        running += term
        if r >= 0:
            if n == r:
                return math.fsum(terms)
        else:
            ratio = t * (n - r) / ((j + 1) * (n + 1))
            if ratio < 1.0:
                tail = term * ratio / (1.0 - ratio)
                if tail <= spec.rel_tol * abs(running):
                    return math.fsum(terms)
        weight *= t / (j + 1)
        coeff *= (n - r) / (n + 1)
        j += 1
        n += 1
    raise NumericError(f"moment series for (m={m}, r={r}, t={t}) did not converge in {spec.max_terms} terms")


def moment_quadrature(key: ContourMomentKey, spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """
    I(m, r, t) by the trapezoidal rule on |xi| = radius.

    With xi = radius e^{i theta}, dxi / (2 pi i) = xi dtheta / (2 pi), so the rule is the mean
    of xi^m (1 - xi)^r e^{(1/xi - 1) t} xi over the nodes. A NumericWarning is raised when the
    discarded imaginary part exceeds IMAGINARY_TOL relative to the integrand scale.
    """
    settings = get_settings()
    if spec is None:
        spec = QuadratureSpec(radius=settings.QUADRATURE_RADIUS, nodes=settings.QUADRATURE_NODES)
    theta = 2.0 * np.pi * np.arange(spec.nodes) / spec.nodes
    xi = spec.radius * np.exp(1j * theta)
    integrand = xi ** key.m * (1.0 - xi) ** key.r * np.exp((1.0 / xi - 1.0) * key.t) * xi
    estimate = integrand.mean()
    scale = float(np.abs(integrand).max())
    result = QuadratureResult(value=float(estimate.real), imag_residue=float(abs(estimate.imag)), scale=scale)
    if result.imag_residue > settings.IMAGINARY_TOL * max(1.0, scale):
        message = (f"quadrature for (m={key.m}, r={key.r}, t={key.t}) left an imaginary part "
                   f"{result.imag_residue:.3e}")
        logger.warning(message)
        warnings.warn(message, NumericWarning)
    return result


class MomentTable:
    """Memo of I(m, r, t) at a fixed t, shared by all entries of one evaluation."""

    def __init__(self, t: float, rel_tol: Optional[float] = None):
        if t < 0:
            raise ValueError("t must be nonnegative")
        self.t = t
        self.rel_tol = rel_tol if rel_tol is not None else get_settings().SERIES_REL_TOL
        self._values: Dict[Tuple[int, int], float] = {}
        self._lock = threading.Lock()

    def __call__(self, m: int, r: int) -> float:
        cached = self._values.get((m, r))
        if cached is not None:
            return cached
        key = ContourMomentKey(m=m, r=r, t=self.t)
        value = moment_series(key, SeriesSpec.for_key(key, self.rel_tol))
        # Insert only finished values; a racing thread computes the same number.
        with self._lock:
            self._values.setdefault((m, r), value)
        return value

    @property
    def evaluations(self) -> int:
        return len(self._values)


def moment_series_precise(m: int, r: int, t: float, ctx: mpmath.MPContext):
    """
    The residue series of `moment_series` summed in the arithmetic of `ctx`.

    Terms and the tail bound are the same; the series stops once the tail is below
    2^-(prec + 10) of the running sum. Returns an mpf at the working precision of ctx.
    """
    j = max(0, m + 1)
    n = j - m - 1
    if r >= 0 and n > r:
        return ctx.zero
    if t == 0.0:
        return ctx.mpf(binomial_series_coefficient(r, n)) if j == 0 else ctx.zero

    t_mp = ctx.mpf(t)
    weight = t_mp ** j / ctx.factorial(j)
    eps = ctx.ldexp(ctx.one, -(ctx.prec + 10))
    max_terms = SeriesSpec.for_key(ContourMomentKey(m=m, r=r, t=t)).max_terms + 4 * ctx.dps
    total = ctx.zero
    for _ in range(max_terms):
        term = weight * binomial_series_coefficient(r, n)
        total += term
        if r >= 0:
            if n == r:
                return total * ctx.exp(-t_mp)
        else:
            ratio = t * (n - r) / ((j + 1) * (n + 1))
            if ratio < 1.0 and term * ratio / (1.0 - ratio) <= eps * total:
                return total * ctx.exp(-t_mp)
        weight = weight * t_mp / (j + 1)
        j += 1
        n += 1
    raise NumericError(f"moment series for (m={m}, r={r}, t={t}) did not converge at {ctx.dps} digits")
