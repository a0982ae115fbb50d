"""Request and response bodies for the what-if HTTP API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

__all__ = [
    "Bound",
    "TreeParams",
    "FilterRequest",
    "Histogram",
    "PathwayInfo",
    "CostStats",
    "FilterResponse",
    "TreeNodeOut",
    "TreeResponse",
    "JobRequest",
    "JobStatus",
]


class Bound(BaseModel):
    """Per-variable capacity bound in physical units; absent side = unbounded."""

    model_config = ConfigDict(extra="forbid")

    min: float | None = None
    max: float | None = None

    @model_validator(mode="after")
    def _ordered(self) -> "Bound":
        if self.min is not None and self.max is not None and self.min > self.max:
            raise ValueError(f"min {self.min} exceeds max {self.max}")
        return self


class TreeParams(BaseModel):
    """Tree-fit controls; kmeans_k switches labels from carrier tags to a
    fresh k-means run on the filtered subset."""

    model_config = ConfigDict(extra="forbid")

    max_depth: int = Field(default=3, ge=1)
    min_leaf: int | None = Field(default=None, ge=1)
    kmeans_k: int | None = Field(default=None, ge=2)
    seed: int = Field(default=0, ge=0)


class FilterRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run: str
    carriers: list[str] | None = None
    bounds: dict[str, Bound] = Field(default_factory=dict)
    tree: TreeParams | None = None


class Histogram(BaseModel):
    edges: list[float]
    counts: list[int]


class PathwayInfo(BaseModel):
    id: str
    pathway: str
    carrier: str | None
    epsilon: float
    n_samples: int
    variables: list[str]
    units: list[str]
    ranges: dict[str, tuple[float, float]]
    optimum: dict[str, float] | None
    lcoh: float | None
    carrier_levels: list[str]


class CostStats(BaseModel):
    n_costed: int
    min: float
    max: float
    mean: float


class FilterResponse(BaseModel):
    run: str
    n_total: int
    n_surviving: int
    surviving_fraction: float
    histograms: dict[str, Histogram]
    carrier_counts: dict[str, int]
    cost: CostStats | None


class TreeNodeOut(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    id: int
    feature: str | None
    feature_index: int | None
    threshold: float | None
    left: int | None
    right: int | None
    histogram: list[int]
    n: int
    class_: int = Field(alias="class")
    class_name: str


class TreeResponse(BaseModel):
    """Mirrors the tree JSON artifact field for field."""

    model_config = ConfigDict(populate_by_name=True)

    schema_: str = Field(alias="schema")
    feature_names: list[str]
    n_classes: int
    class_names: list[str]
    max_depth: int
    min_leaf: int
    training_accuracy: float
    nodes: list[TreeNodeOut]
    reassign_disagreement: int


class JobRequest(BaseModel):
    """A fresh near-optimal mapping run with bounds as hard LP limits."""

    model_config = ConfigDict(extra="forbid")

    pathway: str
    epsilon: float | None = Field(default=None, gt=0.0)
    bounds: dict[str, Bound] = Field(default_factory=dict)


class JobStatus(BaseModel):
    id: str
    status: Literal["queued", "running", "done", "failed", "interrupted"]
    pathway: str
    epsilon: float
    position: int
    error: str | None = None
    hull: dict | None = None
