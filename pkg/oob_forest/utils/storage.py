"""
Local file helpers
JSON (optionally gzip-compressed), CSV through pandas, and plain text.
Paths ending in .gz are compressed transparently.
"""
import gzip
import json
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import pandas as pd

PathLike = Union[str, Path]


def ensure_dir(path: PathLike) -> Path:
    """Ensure a directory exists and return it as a Path"""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8", newline="")


def save_json(data: Any, path: PathLike) -> str:
    """
    Save JSON data to a local file.

    Args:
        data: Data to serialize as JSON
        path: Destination (gzip-compressed when it ends in .gz)

    Returns:
        Path of saved file
    """
    path = Path(path)
    if path.parent != Path(""):
        ensure_dir(path.parent)
    with _open_text(path, "w") as f:
        json.dump(data, f, separators=(",", ":"), ensure_ascii=False)
    return str(path)


def load_json(path: PathLike) -> Any:
    """
    Load JSON data from a local file.

    Raises:
        FileNotFoundError: If file doesn't exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with _open_text(path, "r") as f:
        return json.load(f)


def save_csv(df: pd.DataFrame, path: PathLike, header_lines: Optional[Iterable[str]] = None) -> str:
    """
    Save DataFrame to CSV, optionally preceded by '# ' comment lines.

    Floats are written with full round-trip precision.
    """
    path = Path(path)
    if path.parent != Path(""):
        ensure_dir(path.parent)
    with _open_text(path, "w") as f:
        for line in header_lines or ():
            f.write(f"# {line}\n")
        df.to_csv(f, index=False, lineterminator="\n")
    return str(path)


def load_csv_frame(path: PathLike, delimiter: str = ",") -> pd.DataFrame:
    """
    Load a CSV as a DataFrame of raw strings.

    Empty cells and the literal NA are read as missing; nothing else is.

    Raises:
        FileNotFoundError: If file doesn't exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return pd.read_csv(
        path,
        sep=delimiter,
        dtype=str,
        keep_default_na=False,
        na_values=["", "NA"],
        comment=None,
        encoding="utf-8",
    )


def save_text(text: str, path: PathLike) -> str:
    """Write text (newline-terminated) to a local file"""
    path = Path(path)
    if path.parent != Path(""):
        ensure_dir(path.parent)
    with _open_text(path, "w") as f:
        f.write(text if text.endswith("\n") else text + "\n")
    return str(path)
