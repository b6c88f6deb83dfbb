"""Experiment configuration (JSON) with strict validation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigError

EXPERIMENTS = ("rate-sweep", "oracle-test", "check-reg", "minimax", "effdim")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProcessConfig(_Strict):
    K: int = Field(100, ge=1, le=10_000)
    a: float = Field(2.0, gt=0)
    kappa: float = Field(100.0, gt=0)


class GridConfig(_Strict):
    s1_points: int = Field(201, ge=2, le=100_000)
    s2_points: int = Field(51, ge=2, le=100_000)
    s1_lo: float = 0.0
    s1_hi: float = 1.0
    s2_lo: float = 0.0
    s2_hi: float = 1.0

    @model_validator(mode="after")
    def _intervals(self):
        if not (self.s1_lo < self.s1_hi and self.s2_lo < self.s2_hi):
            raise ValueError("grid intervals need lo < hi")
        return self


class IndexConfig(_Strict):
    kind: Literal["holder", "table"] = "holder"
    r: float = Field(1.0, gt=0)
    x: Optional[List[float]] = None
    y: Optional[List[float]] = None

    @model_validator(mode="after")
    def _table(self):
        if self.kind == "table" and (self.x is None or self.y is None):
            raise ValueError("a tabulated index function needs x and y")
        return self


class LambdaRule(_Strict):
    kind: Literal["theoretical", "grid-oracle"] = "theoretical"
    lo: float = Field(1e-6, gt=0)
    hi: float = Field(1.0, gt=0)
    num: int = Field(25, ge=2, le=1000)


class OracleConfig(_Strict):
    N: int = Field(2000, ge=100, le=50_000)
    n_modes: int = Field(3, ge=1)
    n_basis: int = Field(3, ge=1)


class MinimaxConfig(_Strict):
    M_values: List[int] = [8, 16]
    s_values: List[float] = [0.0, 0.5]
    u: float = Field(0.1, gt=0, lt=0.125)
    b0: float = Field(1.0, gt=0)
    b1: float = Field(1.0, gt=0)

    @field_validator("M_values")
    @classmethod
    def _M(cls, v):
        if not v or any(m < 8 or m > 64 for m in v):
            raise ValueError("M values must lie in [8, 64]")
        return v

    @field_validator("s_values")
    @classmethod
    def _s(cls, v):
        if not v or any(not 0 <= s <= 0.5 for s in v):
            raise ValueError("s values must lie in [0, 1/2]")
        return v


class EffdimConfig(_Strict):
    b_values: List[float] = [1.5, 2.0, 3.0]
    m_max: int = Field(1_000_000, ge=10, le=50_000_000)
    lambda_lo: float = Field(1e-4, gt=0)
    lambda_hi: float = Field(1e-1, gt=0)
    num: int = Field(25, ge=4, le=10_000)

    @field_validator("b_values")
    @classmethod
    def _b(cls, v):
        if not v or any(b <= 1 for b in v):
            raise ValueError("decay exponents must exceed 1")
        return v


class CheckRegConfig(_Strict):
    n_sigma: int = Field(200, ge=2)
    n_lambda: int = Field(20, ge=2)
    exponents: List[float] = [1.0, 2.0, 4.0]
    threshold: float = Field(10.0, gt=0)


class OracleTestConfig(_Strict):
    instances: int = Field(10, ge=1, le=1000)
    max_n: int = Field(5, ge=1, le=8)
    max_degree: int = Field(2, ge=0, le=3)
    max_grid_points: int = Field(9, ge=2, le=12)
    lambdas: List[float] = [0.01, 0.1, 1.0]
    tolerance: float = Field(1e-8, gt=0)


class ExperimentConfig(_Strict):
    experiment: Optional[Literal["rate-sweep", "oracle-test", "check-reg", "minimax", "effdim"]] = None
    process: ProcessConfig = ProcessConfig()
    grid: GridConfig = GridConfig()
    degree: int = Field(1, ge=0, le=6)
    index_function: IndexConfig = IndexConfig()
    R: float = Field(1.0, gt=0)
    sigma2: float = Field(16.0, ge=0)
    noise_modes: int = Field(25, ge=1)
    b: Optional[float] = Field(None, gt=1)
    family: Literal["tikhonov", "cutoff", "landweber"] = "tikhonov"
    n_list: List[int] = [64, 128, 256, 512, 1024]
    replicates: int = Field(20, ge=1, le=10_000)
    lambda_rule: LambdaRule = LambdaRule()
    oracle: OracleConfig = OracleConfig()
    n_test: int = Field(500, ge=100)
    seed: int = Field(0, ge=0)
    output_dir: str = "results"
    minimax: MinimaxConfig = MinimaxConfig()
    effdim: EffdimConfig = EffdimConfig()
    check_reg: CheckRegConfig = CheckRegConfig()
    oracle_test: OracleTestConfig = OracleTestConfig()

    @field_validator("n_list")
    @classmethod
    def _n_list(cls, v):
        if len(v) < 4:
            raise ValueError("a rate sweep needs at least 4 sample sizes")
        if any(n < 1 for n in v) or len(set(v)) != len(v):
            raise ValueError("sample sizes must be distinct positive integers")
        return sorted(v)


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read and validate a JSON config; ``None`` gives the defaults.

    Raises :class:`ConfigError` on unreadable files, malformed JSON, unknown
    keys and out-of-range values.
    """
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
