from enum import Enum
from typing import NamedTuple, Tuple

from pydantic import BaseModel, Field, root_validator, validator

from tasepcheck.core.config import get_settings

FIRST_CLASS = 2
SECOND_CLASS = 1


class MoveKind(str, Enum):
    """Kinds of right jumps a particle can make."""
    STEP_RIGHT = "step-right"
    SWAP_RIGHT = "swap-right"


class Move(NamedTuple):
    """A move descriptor; index is 1-based, counted from the left."""
    index: int
    kind: MoveKind


class SpeciesSequence(BaseModel):
    """A word over {1, 2}; 2 marks a first class particle."""
    word: Tuple[int, ...] = Field(..., description="Species tag of each particle from the left")

    class Config:
        frozen = True

    @validator("word")
    def _tags_are_species(cls, word):
        if any(tag not in (SECOND_CLASS, FIRST_CLASS) for tag in word):
            raise ValueError("species tags must be 1 or 2")
        return word

    @classmethod
    def nu(cls, k: int, n: int) -> "SpeciesSequence":
        """k leading first class particles followed by n - k second class ones."""
        if not 0 <= k <= n:
            raise ValueError(f"k={k} outside [0, {n}]")
        return cls(word=(FIRST_CLASS,) * k + (SECOND_CLASS,) * (n - k))

    @property
    def first_class_count(self) -> int:
        return sum(1 for tag in self.word if tag == FIRST_CLASS)

    def __len__(self) -> int:
        return len(self.word)


class ParticleConfig(BaseModel):
    """Positions X (strictly increasing) and species labels pi of N particles on Z."""
    positions: Tuple[int, ...] = Field(..., description="Lattice sites x_1 < ... < x_N")
    labels: Tuple[int, ...] = Field(..., description="Species tag of the i-th particle from the left")

    class Config:
        frozen = True

    @validator("positions")
    def _strictly_increasing(cls, positions):
        if not positions:
            raise ValueError("at least one particle is required")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("positions must be strictly increasing")
        cap = get_settings().MAX_PARTICLES
        if len(positions) > cap:
            raise ValueError(f"N={len(positions)} exceeds the particle cap {cap}")
        return positions

    @validator("labels")
    def _labels_are_species(cls, labels):
        if any(tag not in (SECOND_CLASS, FIRST_CLASS) for tag in labels):
            raise ValueError("species tags must be 1 or 2")
        return labels

    @root_validator(skip_on_failure=True)
    def _same_length(cls, values):
        if len(values["positions"]) != len(values["labels"]):
            raise ValueError("labels and positions must have the same length")
        return values

    @classmethod
    def step(cls, n: int, k: int) -> "ParticleConfig":
        """Step initial condition Y = (1, ..., N) with species word nu^(k)."""
        return cls(positions=tuple(range(1, n + 1)), labels=SpeciesSequence.nu(k, n).word)

    @classmethod
    def with_nu(cls, positions, k: int) -> "ParticleConfig":
        positions = tuple(positions)
        return cls(positions=positions, labels=SpeciesSequence.nu(k, len(positions)).word)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def species(self) -> SpeciesSequence:
        return SpeciesSequence(word=self.labels)


class EventSpec(BaseModel):
    """The event E_{t,k,x}."""
    t: float = Field(..., ge=0.0, description="Observation time")
    k: int = Field(..., ge=0, description="Number of first class particles forming the block")
    x: int = Field(..., description="Site where the block starts (k = 0: lower bound on x_1)")

    class Config:
        frozen = True

    def check_particles(self, n: int) -> None:
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds N={n}")
