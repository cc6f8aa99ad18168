"""
Pydantic models for parameters, results and reports
"""

import math
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from oob_forest.errors import InvalidArgumentError

Task = Literal["regression", "classification"]
Process = Literal["friedman", "spheres"]

# Coverage study grid: 0.05, 0.10, ..., 0.95
COVERAGE_LEVELS: List[float] = [round(0.05 * k, 2) for k in range(1, 20)]
# Default levels for the ci command
CI_LEVELS: List[float] = [0.90, 0.95, 0.99]


def _check_levels(levels: List[float]) -> List[float]:
    if not levels:
        raise ValueError("at least one confidence level is required")
    for level in levels:
        if not 0.0 < level < 1.0:
            raise ValueError(f"confidence level {level} is outside (0, 1)")
    for lo, hi in zip(levels, levels[1:]):
        if not lo < hi:
            raise ValueError("confidence levels must be strictly increasing")
    return levels


class TreeParams(BaseModel):
    """Growth parameters shared by every tree of a forest"""
    mtry: Optional[int] = Field(None, ge=1)  # None -> task default
    min_node_size: Optional[int] = Field(None, ge=1)  # None -> task default
    max_depth: Optional[int] = Field(None, ge=1)  # None -> tall trees
    seed: int = Field(0, ge=0)  # tree stream used when train_tree gets no generator

    def resolve(self, p: int, task: Task) -> "TreeParams":
        """
        Fill in the conventional defaults for a dataset with p predictors

        mtry: floor(p/3) (min 1) for regression, floor(sqrt(p)) for classification.
        min_node_size: 5 for regression, 1 for classification.
        """
        mtry = self.mtry
        if mtry is None:
            mtry = max(1, p // 3) if task == "regression" else max(1, math.isqrt(p))
        if mtry > p:
            raise InvalidArgumentError(f"mtry={mtry} exceeds the number of predictors p={p}")
        min_node_size = self.min_node_size
        if min_node_size is None:
            min_node_size = 5 if task == "regression" else 1
        return self.model_copy(update={"mtry": mtry, "min_node_size": min_node_size})


class CiResult(BaseModel):
    """Percentile-bootstrap confidence interval for the generalization error"""
    level: float = Field(gt=0.0, lt=1.0)
    lower: float
    upper: float
    point_estimate: float
    M: int = Field(ge=1)
    seed: int = Field(ge=0)
    task: Optional[Task] = None
    replicates: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "CiResult":
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.lower < 0.0:
            raise ValueError("error rates are non-negative")
        if self.task == "classification" and self.upper > 1.0:
            raise ValueError("misclassification rate cannot exceed 1")
        return self

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_record(self) -> str:
        """Line record: level lower upper point_estimate M seed"""
        return f"{self.level!r} {self.lower!r} {self.upper!r} {self.point_estimate!r} {self.M} {self.seed}"

    @classmethod
    def from_record(cls, line: str, task: Optional[Task] = None) -> "CiResult":
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"expected 6 fields in CI record, got {len(parts)}: {line!r}")
        return cls(
            level=float(parts[0]),
            lower=float(parts[1]),
            upper=float(parts[2]),
            point_estimate=float(parts[3]),
            M=int(parts[4]),
            seed=int(parts[5]),
            task=task,
        )


class GeneratorSpec(BaseModel):
    """Which synthetic process to sample, how many rows, and from which seed"""
    process: Process
    n: int = Field(ge=2)
    seed: int = Field(0, ge=0)


class SimConfig(BaseModel):
    """
    One Monte Carlo coverage study

    n_trees, n_boot and n_replications are B, M and N of the study;
    n_test is the size of the fresh test sample approximating the true error.
    """
    process: Process
    n: int = Field(ge=2)
    n_test: int = Field(20_000, ge=2)
    n_trees: int = Field(300, ge=1)
    n_boot: int = Field(500, ge=2)
    n_replications: int = Field(200, ge=1)
    levels: List[float] = Field(default_factory=lambda: list(COVERAGE_LEVELS))
    seed: int = Field(20240101, ge=0)
    mtry: Optional[int] = Field(None, ge=1)
    min_node_size: Optional[int] = Field(None, ge=1)

    @field_validator("levels")
    @classmethod
    def _valid_levels(cls, v: List[float]) -> List[float]:
        return _check_levels(v)

    @property
    def task(self) -> Task:
        return "regression" if self.process == "friedman" else "classification"

    def tree_params(self) -> TreeParams:
        return TreeParams(mtry=self.mtry, min_node_size=self.min_node_size)

    def header(self, sizes: Optional[List[int]] = None) -> str:
        """Config echo used as a provenance comment in report files"""
        levels = ",".join(f"{lv:g}" for lv in self.levels)
        n = ",".join(str(s) for s in sizes) if sizes else str(self.n)
        return (
            f"process={self.process} n={n} n_test={self.n_test} B={self.n_trees} "
            f"M={self.n_boot} N={self.n_replications} seed={self.seed} levels={levels}"
        )


class LevelOutcome(BaseModel):
    """Interval computed at one nominal level within one replication"""
    level: float = Field(gt=0.0, lt=1.0)
    lower: float
    upper: float
    width: float = Field(ge=0.0)
    covered: bool


class ReplicationRecord(BaseModel):
    """Result of one pass through the simulate / train / interval / test pipeline"""
    replication_id: int = Field(ge=0)
    n: int = Field(ge=1)
    true_gamma: float
    oob_estimate: float
    outcomes: List[LevelOutcome]

    @model_validator(mode="after")
    def _check_coverage_flags(self) -> "ReplicationRecord":
        for outcome in self.outcomes:
            inside = outcome.lower <= self.true_gamma <= outcome.upper
            if outcome.covered != inside:
                raise ValueError(f"covered flag at level {outcome.level} disagrees with the interval")
        return self

    @property
    def levels(self) -> List[float]:
        return [o.level for o in self.outcomes]


class CoverageRow(BaseModel):
    """One line of a coverage report"""
    process: Process
    n: int = Field(ge=1)
    level: float = Field(gt=0.0, lt=1.0)
    coverage: float = Field(ge=0.0, le=1.0)
    avg_width: float = Field(ge=0.0)


class CoverageReport(BaseModel):
    """Coverage fraction and average width per nominal level (and per n when sweeping)"""
    rows: List[CoverageRow]
    config: Optional[SimConfig] = None
    n_replications: int = Field(ge=1)

    def widths_at(self, level: float) -> Dict[int, float]:
        return {row.n: row.avg_width for row in self.rows if math.isclose(row.level, level)}


class ColumnSchema(BaseModel):
    """How one CSV column was read"""
    name: str
    kind: Literal["numeric", "categorical", "target"]
    n_levels: int = Field(0, ge=0)
    imputed_value: Optional[Union[float, str]] = None
    n_imputed: int = Field(0, ge=0)


class SchemaReport(BaseModel):
    """Everything ingestion decided about a file"""
    path: str
    target: str
    task: Task
    n_rows: int
    columns: List[ColumnSchema]
    dropped_columns: List[str] = Field(default_factory=list)
    dropped_target_rows: int = 0
    class_labels: Optional[Dict[str, int]] = None

    @model_validator(mode="after")
    def _one_target(self) -> "SchemaReport":
        if sum(1 for c in self.columns if c.kind == "target") != 1:
            raise ValueError("schema must contain exactly one target column")
        return self

    def to_text(self) -> str:
        lines = [
            f"file: {self.path}",
            f"rows: {self.n_rows} (dropped for missing target: {self.dropped_target_rows})",
            f"target: {self.target} ({self.task})",
        ]
        if self.class_labels:
            mapping = ", ".join(f"{k} -> {v}" for k, v in self.class_labels.items())
            lines.append(f"class labels: {mapping}")
        for col in self.columns:
            extra = f" levels={col.n_levels}" if col.kind == "categorical" else ""
            if col.n_imputed:
                extra += f" imputed={col.n_imputed} with {col.imputed_value!r}"
            lines.append(f"  {col.name}: {col.kind}{extra}")
        if self.dropped_columns:
            lines.append(f"dropped (all missing): {', '.join(self.dropped_columns)}")
        return "\n".join(lines)


class RunConfig(BaseModel):
    """Validated command-line flags for one invocation"""
    command: Literal["train", "ci", "simulate", "datagen"]
    seed: int = Field(ge=0)
    threads: int = Field(1, ge=1)

    # train / ci
    data_path: Optional[str] = None
    model_path: Optional[str] = None
    model_out: Optional[str] = None
    target: Optional[str] = None
    task: Optional[Task] = None
    n_trees: int = Field(500, ge=1)
    mtry: Optional[int] = Field(None, ge=1)
    min_node_size: Optional[int] = Field(None, ge=1)
    max_depth: Optional[int] = Field(None, ge=1)
    delimiter: str = ","
    levels: List[float] = Field(default_factory=lambda: list(CI_LEVELS))
    n_boot: int = Field(1000, ge=2)
    rmse: bool = False
    csv_out: Optional[str] = None

    # simulate
    process: Optional[Process] = None
    sizes: List[int] = Field(default_factory=list)
    n_test: int = Field(20_000, ge=2)
    n_replications: int = Field(200, ge=1)
    out_dir: Optional[str] = None
    pdf: bool = False

    # datagen
    n: Optional[int] = Field(None, ge=2)
    out: Optional[str] = None

    @field_validator("levels")
    @classmethod
    def _valid_levels(cls, v: List[float]) -> List[float]:
        return _check_levels(v)

    @field_validator("sizes")
    @classmethod
    def _positive_sizes(cls, v: List[int]) -> List[int]:
        if any(s < 2 for s in v):
            raise ValueError("training sizes must be at least 2")
        return v

    @model_validator(mode="after")
    def _required_per_command(self) -> "RunConfig":
        if self.command == "train":
            if not (self.data_path and self.target and self.task):
                raise ValueError("train needs --data, --target and --task")
        elif self.command == "ci":
            if not self.model_path and not (self.data_path and self.target and self.task):
                raise ValueError("ci needs --model, or --data with --target and --task")
        elif self.command == "simulate":
            if not self.process or not self.sizes:
                raise ValueError("simulate needs --process and --n")
        elif self.command == "datagen":
            if not self.process or self.n is None or not self.out:
                raise ValueError("datagen needs --process, --n and --out")
        return self
