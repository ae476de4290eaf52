from typing import Any, Tuple

from pydantic import BaseModel, Field, root_validator, validator


class ContourMomentKey(BaseModel):
    """Index (m, r, t) of the moment I(m, r, t) = (1/2 pi i) oint xi^m (1 - xi)^r e^{(1/xi - 1) t} dxi."""
    m: int = Field(..., description="Power of xi (may be negative)")
    r: int = Field(..., description="Power of (1 - xi) (may be negative)")
    t: float = Field(..., ge=0.0, description="Time")

    class Config:
        frozen = True


class QuadratureSpec(BaseModel):
    """Equispaced trapezoidal rule on a circle |xi| = radius."""
    radius: float = Field(0.5, gt=0.0, lt=1.0)
    nodes: int = Field(2048, ge=4)


class SeriesSpec(BaseModel):
    """Truncation control for the residue series."""
    rel_tol: float = Field(1e-15, gt=0.0)
    max_terms: int = Field(..., ge=1)

    @classmethod
    def for_key(cls, key: ContourMomentKey, rel_tol: float = 1e-15) -> "SeriesSpec":
        return cls(rel_tol=rel_tol, max_terms=int(10 * (key.t + abs(key.m) + abs(key.r))) + 200)


class QuadratureResult(BaseModel):
    """Real part of the trapezoidal estimate, with the imaginary part it discarded."""
    value: float
    imag_residue: float = Field(..., ge=0.0)
    scale: float = Field(..., ge=0.0, description="Largest |integrand * xi| on the nodes")


class SpectralPoint(BaseModel):
    """Bethe variables xi_1, ..., xi_N."""
    xi: Tuple[complex, ...]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @validator("xi", pre=True)
    def _as_complex(cls, values: Any):
        values = tuple(complex(v) for v in values)
        if not values:
            raise ValueError("at least one spectral variable is required")
        if any(v == 1 for v in values):
            raise ValueError("spectral variables must differ from 1")
        return values

    def __len__(self) -> int:
        return len(self.xi)

    def __getitem__(self, index: int) -> complex:
        """1-based access, matching xi_1, ..., xi_N."""
        if index < 1:
            raise IndexError(index)
        return self.xi[index - 1]

    def is_generic(self, min_separation: float = 0.0) -> bool:
        """All |xi_i| < 1 and pairwise distinct by more than min_separation."""
        if any(abs(v) >= 1 for v in self.xi):
            return False
        return all(abs(a - b) > min_separation
                   for i, a in enumerate(self.xi) for b in self.xi[i + 1:])

    def substituted(self) -> "SpectralPoint":
        """xi_i -> 1 / xi_{N-i+1}."""
        return SpectralPoint(xi=tuple(1 / v for v in reversed(self.xi)))


class PermutationWord(BaseModel):
    """sigma in one-line notation (sigma(1), ..., sigma(N)) and a word a_1, ..., a_n with
    sigma = T_{a_n} ... T_{a_1}; T_l swaps the entries in slots l and l + 1."""
    sigma: Tuple[int, ...]
    word: Tuple[int, ...] = ()

    class Config:
        frozen = True

    @validator("sigma")
    def _is_permutation(cls, sigma):
        if sorted(sigma) != list(range(1, len(sigma) + 1)):
            raise ValueError(f"{sigma} is not a permutation of 1..{len(sigma)}")
        return sigma

    @root_validator(skip_on_failure=True)
    def _word_composes_to_sigma(cls, values):
        sigma, word = values["sigma"], values["word"]
        arrangement = list(range(1, len(sigma) + 1))
        for a in word:
            if not 1 <= a < len(sigma):
                raise ValueError(f"transposition index {a} outside [1, {len(sigma) - 1}]")
            arrangement[a - 1], arrangement[a] = arrangement[a], arrangement[a - 1]
        if tuple(arrangement) != sigma:
            raise ValueError("word does not compose to sigma")
        return values

    @property
    def n(self) -> int:
        return len(self.sigma)
