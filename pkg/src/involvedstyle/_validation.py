"""Input validation helpers shared by the estimators and pipeline stages."""

from __future__ import annotations

from typing import Iterable, List, Mapping, Sequence

import numpy as np
import pandas as pd


def check_text_array(X) -> List[str]:
    """Coerce an iterable of texts to a list of str.

    A bare string is rejected since iterating it would yield characters.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError("expected an iterable of texts, got a single string")
    if isinstance(X, pd.DataFrame):
        if X.shape[1] != 1:
            raise ValueError(f"expected a single text column, got {X.shape[1]} columns")
        X = X.iloc[:, 0]
    if isinstance(X, np.ndarray) and X.ndim > 1:
        if X.ndim != 2 or X.shape[1] != 1:
            raise ValueError(f"expected 1-d text input, got shape {X.shape}")
        X = X.ravel()
    texts = list(X)
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"element {i} is {type(t).__name__}, not str")
    return texts


def check_table(data) -> pd.DataFrame:
    """Accept a DataFrame or a mapping of column name -> values."""
    if isinstance(data, pd.DataFrame):
        return data
    if isinstance(data, Mapping):
        return pd.DataFrame(dict(data))
    raise TypeError(f"expected a DataFrame or mapping of columns, got {type(data).__name__}")


def check_columns(df: pd.DataFrame, columns: Iterable[str]) -> None:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise KeyError(f"columns not found: {missing}")


def check_no_missing(df: pd.DataFrame, columns: Sequence[str]) -> None:
    bad = [c for c in columns if df[c].isna().any()]
    if bad:
        raise ValueError(f"missing values in columns: {bad}")


def check_probability(value: float, name: str, *, allow_zero: bool = True) -> float:
    value = float(value)
    low_ok = value >= 0 if allow_zero else value > 0
    if not (low_ok and value <= 1):
        raise ValueError(f"{name} must be in {'[' if allow_zero else '('}0, 1], got {value}")
    return value
