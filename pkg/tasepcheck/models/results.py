import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, root_validator, validator

PROBABILITY_SLACK = 1e-9


class ProbEstimate(BaseModel):
    """Monte Carlo estimate of a probability."""
    p_hat: float = Field(..., ge=0.0, le=1.0)
    stderr: float = Field(..., ge=0.0)
    n_samples: int = Field(..., ge=1)

    @root_validator(skip_on_failure=True)
    def _binomial_stderr(cls, values):
        p, n = values["p_hat"], values["n_samples"]
        expected = math.sqrt(p * (1.0 - p) / n)
        if not math.isclose(values["stderr"], expected, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError("stderr must equal sqrt(p_hat (1 - p_hat) / n_samples)")
        return values

    @classmethod
    def from_counts(cls, hits: int, n_samples: int) -> "ProbEstimate":
        p_hat = hits / n_samples
        return cls(p_hat=p_hat, stderr=math.sqrt(p_hat * (1.0 - p_hat) / n_samples), n_samples=n_samples)


class OracleParams(BaseModel):
    """Truncation of the uniformisation series."""
    jump_cap: int = Field(..., ge=1, description="Largest number of uniformised jumps kept")
    tol: float = Field(..., gt=0.0, description="Admissible truncation error")


class Method(str, Enum):
    PERM_SUM = "perm-sum"
    DETERMINANT = "determinant"
    HANKEL = "hankel"
    TRANSITION_SUM = "transition-sum"


class ExactResult(BaseModel):
    """Value of an exact formula and how it was obtained."""
    value: float
    method: Method
    moment_evals: int = Field(0, ge=0, description="Distinct contour moments evaluated")
    condition: Optional[float] = Field(None, description="Condition number of the determinant, if any")
    digits: Optional[int] = Field(None, ge=1, description="mpmath working precision in digits, if used")

    class Config:
        use_enum_values = True

    @property
    def in_range(self) -> bool:
        return -PROBABILITY_SLACK <= self.value <= 1.0 + PROBABILITY_SLACK

    @property
    def probability(self) -> float:
        """Value clamped to [0, 1] for reporting; `value` keeps the raw number."""
        return min(1.0, max(0.0, self.value))


class IdentityReport(BaseModel):
    """Outcome of one identity check over a batch of random spectral points."""
    name: str
    N: int = Field(..., ge=1)
    k: Optional[int] = None
    trials: int = Field(..., ge=1)
    max_rel_err: float = Field(..., ge=0.0)
    threshold: float = Field(1e-10, gt=0.0)
    passed: bool = Field(..., alias="pass")

    class Config:
        allow_population_by_field_name = True

    @root_validator(pre=True)
    def _pass_matches_threshold(cls, values):
        err = values.get("max_rel_err")
        threshold = values.get("threshold", 1e-10)
        if err is not None:
            values.pop("passed", None)
            values["pass"] = bool(err <= threshold)
        return values

    def to_row(self) -> dict:
        """Row of the JSON report: name, N, k, trials, max_rel_err, pass."""
        return {"name": self.name, "N": self.N, "k": self.k, "trials": self.trials,
                "max_rel_err": self.max_rel_err, "pass": self.passed}


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Parameters of one CLI invocation."""
    command: str
    step: bool = False
    y: Optional[List[int]] = None
    N: Optional[int] = Field(None, ge=1)
    k: List[int] = []
    x: List[int] = []
    t: List[float] = [0.5, 1.0]
    n_samples: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    tol: float = Field(1e-10, gt=0.0)
    max_abs_err: float = Field(1e-7, gt=0.0)
    threshold: float = Field(1e-10, gt=0.0)
    trials: int = Field(100, ge=1)
    output_format: OutputFormat = OutputFormat.CSV
    output_path: Optional[str] = None

    @validator("t", each_item=True)
    def _nonnegative_time(cls, value):
        if value < 0:
            raise ValueError("times must be nonnegative")
        return value

    @root_validator(skip_on_failure=True)
    def _one_initial_condition(cls, values):
        if values["command"] == "identities":
            return values
        step, y = values["step"], values["y"]
        if step == (y is not None):
            raise ValueError("exactly one of --step and -Y must be given")
        if step:
            if values["N"] is None:
                raise ValueError("--step needs -N")
            values["y"] = list(range(1, values["N"] + 1))
        else:
            if values["N"] is not None and values["N"] != len(y):
                raise ValueError("-N disagrees with the length of -Y")
            values["N"] = len(y)
        n = values["N"]
        if any(kk < 0 or kk > n for kk in values["k"]):
            raise ValueError(f"k must lie in [0, {n}]")
        return values

    def k_values(self) -> List[int]:
        return self.k or list(range(0, self.N + 1))

    def x_values(self, t: float) -> List[int]:
        """Explicit x list, or the default sweep [1 - ceil(3t), 1 + N + ceil(3t)]."""
        if self.x:
            return self.x
        spread = math.ceil(3 * t)
        return list(range(1 - spread, 1 + self.N + spread + 1))
