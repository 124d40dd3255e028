"""Pydantic models for run configuration and run summaries.

One parameter model per CLI subcommand. Unknown keys are rejected and
values are coerced from strings, so config-file text and flag values
go through the same validation. List-valued keys accept comma
separated text ("1,2,3").
"""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, SerializeAsAny


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


FloatList = Annotated[list[float], BeforeValidator(_split_list)]
IntList = Annotated[list[int], BeforeValidator(_split_list)]


class StrictParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CovarianceParams(StrictParams):
    """Keys shared by every subcommand that needs psi(n .) and b."""

    psi: Literal["gaussian", "tabulated"] = "gaussian"
    psi_table: str | None = None
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    n: int = Field(1, ge=1)
    fourier_features: int = Field(1024, ge=1)


class ThetaParams(StrictParams):
    nmax: int = Field(5, ge=2)
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    method: Literal["quad", "mc", "nu"] = "quad"
    tol: float = Field(1e-12, gt=0)
    samples: int = Field(1_000_000, ge=1)
    fold: bool = False


class CellsParams(StrictParams):
    n: int = Field(3, ge=1, le=8)


class MartTestParams(CovarianceParams):
    """Martingale drift test of f(X) against its A^theta compensator.

    f is one of abs (|x_i - x_j| for the first upper and lower index),
    hinge ((min over upper - max over lower)^+) or table (per-cell
    affine pieces read from f_table). Indices are 1-based.
    """

    n: int = Field(100, ge=1)
    n_points: int = Field(3, ge=2, le=8)
    f: Literal["abs", "hinge", "table"] = "hinge"
    upper: IntList = [1]
    lower: IntList = [2, 3]
    f_table: str | None = None
    dt: float | None = Field(None, gt=0)
    horizon: float = Field(0.01, gt=0)
    replicas: int = Field(2000, ge=2)
    diagonal_tolerance: float | None = Field(None, gt=0)
    driver: Literal["dense", "fourier"] = "dense"


class SimulateParams(CovarianceParams):
    n_points: int = Field(2, ge=1)
    x0: FloatList | None = None
    dt: float = Field(1e-4, gt=0)
    horizon: float = Field(1.0, gt=0)
    driver: Literal["dense", "fourier"] = "dense"
    replicas: int = Field(1, ge=1)
    record_every: int = Field(1, ge=1)


class StickyParamsModel(StrictParams):
    theta: float = Field(1.0, gt=0)
    z0: float = 0.0
    horizon: float = Field(1.0, gt=0)
    dt: float = Field(1e-4, gt=0)
    replicas: int = Field(1, ge=1)
    variance_rate: float = Field(2.0, gt=0)
    substeps: int = Field(16, ge=1)
    delta: float = Field(0.0, ge=0)
    compare_n: IntList | None = None
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)


class ExitsParams(CovarianceParams):
    n: int = Field(100, ge=1)
    n_points: int = Field(3, ge=2, le=8)
    epsilon: float = Field(0.1, gt=0)
    cluster_gap: float | None = Field(None, gt=0)
    dt: float | None = Field(None, gt=0)
    replicas: int = Field(2000, ge=1)
    max_steps: int | None = Field(None, ge=1)
    driver: Literal["dense", "fourier"] = "dense"
    schedule_n: IntList | None = None
    schedule_epsilon: FloatList | None = None
    heuristic_samples: int = Field(20_000, ge=2)


class RadialParams(StrictParams):
    n_points: IntList = [2, 3, 4]
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    r_max: float | None = Field(None, gt=0)
    grid: int = Field(401, ge=2)


class BallCheckParams(StrictParams):
    n_points: int = Field(3, ge=2, le=8)
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    n: int = Field(100, ge=1)
    epsilon: float = Field(0.05, gt=0)
    replicas: int = Field(2000, ge=1)
    dt: float | None = Field(None, gt=0)


class CoalesceParams(StrictParams):
    R: float = Field(1.0, gt=0)
    r: FloatList | None = None
    trials: int = Field(100_000, ge=1)
    method: Literal["walk", "euler"] = "walk"
    tolerance: float | None = Field(None, gt=0)
    dt: float | None = Field(None, gt=0)


class KernelParams(CovarianceParams):
    a: float = Field(20.0, gt=0)
    b: float = Field(0.375, gt=0)
    mode: Literal["filter", "spde"] = "spde"
    x0: float | None = None
    t: float = Field(1.0, gt=0)
    particles: int = Field(10_000, ge=1)
    fourier_features: int = Field(256, ge=1)
    cells: int = Field(512, ge=8)
    domain_length: float | None = Field(None, gt=0)
    dt: float | None = Field(None, gt=0)
    field_seed: int | None = None
    compare_seeds: int = Field(0, ge=0)
    cross_check: bool = False


PARAM_MODELS: dict[str, type[StrictParams]] = {
    "theta": ThetaParams,
    "cells": CellsParams,
    "marttest": MartTestParams,
    "simulate": SimulateParams,
    "sticky": StickyParamsModel,
    "exits": ExitsParams,
    "radial": RadialParams,
    "ballcheck": BallCheckParams,
    "coalesce": CoalesceParams,
    "kernel": KernelParams,
}


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    params: SerializeAsAny[StrictParams]
    seed: int = 0
    workers: int = Field(1, ge=1)
    out: str = "stickyflows-out"
    deterministic: bool = False


class RunSummary(BaseModel):
    """Content of summary.json; identical bytes for identical config and seed."""

    subcommand: str
    run_id: str
    config_hash: str
    config: dict
    seed: int
    code_version: str
    psi_kind: str
    status_badge: Literal["pass", "flagged", "reject"]
    reasons: list[str]
    results: dict
    artifacts: list[str]
