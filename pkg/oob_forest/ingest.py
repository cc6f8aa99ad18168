"""
CSV ingestion
Turns a headed CSV file into a Dataset: type inference, categorical level
dictionaries, median imputation for numerics and an explicit <NA> level for
categoricals.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from oob_forest.dataset import ColumnMeta, Dataset
from oob_forest.errors import InvalidDatasetError
from oob_forest.models import ColumnSchema, SchemaReport, Task
from oob_forest.utils.logger import logger
from oob_forest.utils.storage import load_csv_frame

NA_LEVEL = "<NA>"


def _parse_numeric(column: pd.Series) -> Optional[pd.Series]:
    """Column as floats, or None when some non-missing cell is not a number"""
    present = column.dropna()
    try:
        values = present.map(float)
    except ValueError:
        return None
    parsed = pd.Series(np.nan, index=column.index, dtype=np.float64, name=column.name)
    parsed.loc[present.index] = values.to_numpy(dtype=np.float64)
    return parsed


def _encode_target(
    column: pd.Series,
    task: Task,
) -> Tuple[np.ndarray, Optional[List[str]], Optional[Dict[str, int]]]:
    if task == "regression":
        parsed = _parse_numeric(column)
        if parsed is None:
            raise InvalidDatasetError(f"regression target {column.name!r} has non-numeric values")
        return parsed.to_numpy(), None, None

    values = column.astype(str)
    distinct = values.unique().tolist()
    numeric = _parse_numeric(pd.Series(distinct))
    if numeric is not None:
        distinct = [v for _, v in sorted(zip(numeric.tolist(), distinct))]
    else:
        distinct = sorted(distinct)
    if len(distinct) < 2:
        raise InvalidDatasetError(f"classification target {column.name!r} has a single class {distinct}")
    mapping = {v: k + 1 for k, v in enumerate(distinct)}
    return values.map(mapping).to_numpy(dtype=np.int64), distinct, mapping


def load_csv(
    path: str,
    target: str,
    task: Task,
    overrides: Optional[Dict[str, str]] = None,
    delimiter: str = ",",
) -> Tuple[Dataset, SchemaReport]:
    """
    Load a CSV file into a Dataset

    Args:
        path: CSV file with a header row
        target: name of the response column
        task: "regression" or "classification"
        overrides: optional column -> "numeric" | "categorical" kind overrides
        delimiter: field separator

    Returns:
        Tuple of (Dataset, SchemaReport)

    Raises:
        FileNotFoundError: file does not exist
        InvalidDatasetError: unparseable file, missing target, too few rows,
            single-class classification target
    """
    overrides = overrides or {}
    try:
        frame = load_csv_frame(path, delimiter=delimiter)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InvalidDatasetError(f"could not parse {path}: {e}") from e

    logger.info(f"Loading {path}: {len(frame)} rows, {len(frame.columns)} columns")
    if target not in frame.columns:
        raise InvalidDatasetError(f"target column {target!r} not found in {path}")
    unknown = set(overrides) - set(frame.columns)
    if unknown:
        raise InvalidDatasetError(f"kind overrides name unknown columns: {sorted(unknown)}")

    missing_target = frame[target].isna()
    dropped_target_rows = int(missing_target.sum())
    if dropped_target_rows:
        logger.warning(f"Dropping {dropped_target_rows} row(s) with missing target {target!r}")
        frame = frame.loc[~missing_target].reset_index(drop=True)
    if len(frame) < 2:
        raise InvalidDatasetError(f"{path} has fewer than 2 usable rows")

    response, class_names, class_labels = _encode_target(frame[target], task)

    columns: List[ColumnMeta] = []
    schema: List[ColumnSchema] = []
    dropped: List[str] = []
    blocks: List[np.ndarray] = []

    for name in frame.columns:
        if name == target:
            continue
        raw = frame[name]
        n_missing = int(raw.isna().sum())
        if n_missing == len(raw):
            logger.warning(f"Column {name!r} is entirely missing; dropped")
            dropped.append(name)
            continue

        kind = overrides.get(name)
        parsed = _parse_numeric(raw) if kind in (None, "numeric") else None
        if kind == "numeric" and parsed is None:
            raise InvalidDatasetError(f"column {name!r} was declared numeric but has non-numeric cells")

        if parsed is not None:
            fill = float(parsed.median())
            blocks.append(parsed.fillna(fill).to_numpy())
            columns.append(ColumnMeta(name=name, kind="numeric"))
            schema.append(ColumnSchema(
                name=name,
                kind="numeric",
                imputed_value=fill if n_missing else None,
                n_imputed=n_missing,
            ))
        else:
            cells = raw.fillna(NA_LEVEL).astype(str)
            # level ids follow order of first appearance
            levels = list(dict.fromkeys(cells.tolist()))
            codes = cells.map({level: k for k, level in enumerate(levels)}).to_numpy(dtype=np.float64)
            blocks.append(codes)
            columns.append(ColumnMeta(name=name, kind="categorical", levels=tuple(levels)))
            schema.append(ColumnSchema(
                name=name,
                kind="categorical",
                n_levels=len(levels),
                imputed_value=NA_LEVEL if n_missing else None,
                n_imputed=n_missing,
            ))

    if not columns:
        raise InvalidDatasetError(f"{path} has no usable predictor columns")

    schema.append(ColumnSchema(name=target, kind="target", n_levels=len(class_names or [])))
    data = Dataset(
        features=np.column_stack(blocks),
        response=response,
        task=task,
        columns=columns,
        target_name=target,
        class_names=class_names,
    )
    report = SchemaReport(
        path=str(path),
        target=target,
        task=task,
        n_rows=data.n,
        columns=schema,
        dropped_columns=dropped,
        dropped_target_rows=dropped_target_rows,
        class_labels=class_labels,
    )
    n_cat = int(data.categorical_mask.sum())
    logger.info(f"Loaded n={data.n} p={data.p} ({n_cat} categorical) from {path}")
    return data, report
