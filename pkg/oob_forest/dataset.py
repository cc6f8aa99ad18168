"""
In-memory training sample

Features are held as one float matrix; categorical columns store integer
level ids (0..K-1) that index the column's level dictionary.
"""

from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence

import numpy as np

from oob_forest.errors import InvalidDatasetError
from oob_forest.models import Task


@dataclass(frozen=True)
class ColumnMeta:
    """Name, kind and (for categoricals) level dictionary of one predictor"""
    name: str
    kind: Literal["numeric", "categorical"] = "numeric"
    levels: Sequence[str] = ()

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "levels": list(self.levels)}

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnMeta":
        return cls(name=data["name"], kind=data["kind"], levels=tuple(data.get("levels", ())))


@dataclass
class Dataset:
    """
    Observed training sample {(x_i, y_i)}

    Attributes:
        features: n x p float matrix
        response: length-n vector; real for regression, label in 1..L for classification
        task: "regression" or "classification"
        columns: per-predictor metadata
        target_name: name of the response column
        class_names: original target values for labels 1..L (classification only)
    """
    features: np.ndarray
    response: np.ndarray
    task: Task
    columns: List[ColumnMeta] = field(default_factory=list)
    target_name: str = "y"
    class_names: Optional[List[str]] = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise InvalidDatasetError("feature table must be two-dimensional")
        n, p = self.features.shape
        if not self.columns:
            self.columns = [ColumnMeta(name=f"x{j + 1}") for j in range(p)]
        if len(self.columns) != p:
            raise InvalidDatasetError(f"{len(self.columns)} column descriptions for {p} feature columns")
        if n < 2:
            raise InvalidDatasetError(f"need at least 2 observations, got {n}")
        if p < 1:
            raise InvalidDatasetError("need at least 1 predictor")
        if np.isnan(self.features).any():
            raise InvalidDatasetError("feature table contains missing cells")

        if self.task == "regression":
            self.response = np.asarray(self.response, dtype=np.float64)
        elif self.task == "classification":
            self.response = np.asarray(self.response, dtype=np.int64)
        else:
            raise InvalidDatasetError(f"unknown task {self.task!r}")
        if self.response.shape != (n,):
            raise InvalidDatasetError(f"response length {self.response.shape[0]} != row count {n}")
        if self.task == "regression" and not np.isfinite(self.response).all():
            raise InvalidDatasetError("response contains missing or non-finite values")

        if self.task == "classification":
            if self.response.min() < 1:
                raise InvalidDatasetError("class labels must be in 1..L")
            counts = np.bincount(self.response)[1:]
            if (counts == 0).any():
                missing = [int(k) + 1 for k in np.flatnonzero(counts == 0)]
                raise InvalidDatasetError(f"classes {missing} never appear in the response")
            if len(counts) < 2:
                raise InvalidDatasetError("classification needs at least two classes")

        for j, col in enumerate(self.columns):
            if col.is_categorical:
                codes = self.features[:, j]
                if (codes < 0).any() or (codes >= col.n_levels).any() or (codes != np.floor(codes)).any():
                    raise InvalidDatasetError(f"column {col.name!r} holds codes outside its level dictionary")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        """L for classification, 0 for regression"""
        if self.task != "classification":
            return 0
        return int(self.response.max())

    @property
    def categorical_mask(self) -> np.ndarray:
        return np.array([c.is_categorical for c in self.columns], dtype=bool)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "target_name": self.target_name,
            "class_names": self.class_names,
            "columns": [c.to_dict() for c in self.columns],
            "features": self.features.tolist(),
            "response": self.response.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        return cls(
            features=np.asarray(data["features"], dtype=np.float64),
            response=np.asarray(data["response"]),
            task=data["task"],
            columns=[ColumnMeta.from_dict(c) for c in data["columns"]],
            target_name=data.get("target_name", "y"),
            class_names=data.get("class_names"),
        )
