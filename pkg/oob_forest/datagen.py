"""
Synthetic benchmark processes

friedman: ten U[0,1] predictors, Y = 10 sin(pi X1 X2) + 20 (X3 - 1/2)^2 + 10 X4 + 5 X5 + eps,
          eps ~ N(0, 1); X6..X10 are noise.
spheres:  twenty N(0,1) predictors, Z = +1 iff X1^2 + ... + X10^2 exceeds the chi-squared(10)
          median, Y = Z with its sign flipped with probability 0.05; X11..X20 are noise.
          Y = -1 is stored as label 1 and Y = +1 as label 2.

Normal variates come from numpy's Generator.standard_normal on the
process's derived Philox stream, so a (process, n, seed) triple always
yields the same sample.
"""

from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import gammainc

from oob_forest.dataset import ColumnMeta, Dataset
from oob_forest.errors import InvalidArgumentError
from oob_forest.forest.rng import DATAGEN_STREAM, derive_stream
from oob_forest.models import GeneratorSpec
from oob_forest.utils.storage import save_csv

FRIEDMAN_P = 10
SPHERES_P = 20
SPHERES_SIGNAL = 10
SPHERES_FLIP = 0.05

# Stream sub-keys so the two processes never share draws for the same seed
_FRIEDMAN_KEY = 0
_SPHERES_KEY = 1


def chi2_cdf(x: float, df: int) -> float:
    """P(chi-squared(df) <= x) through the regularized lower incomplete gamma function"""
    return float(gammainc(df / 2.0, x / 2.0))


@lru_cache(maxsize=None)
def chi2_median(df: int) -> float:
    """Median of the chi-squared distribution with df degrees of freedom"""
    if df < 1:
        raise InvalidArgumentError(f"degrees of freedom must be positive, got {df}")
    # the median lies in (df - 1, df) for every df >= 1
    return float(brentq(lambda x: chi2_cdf(x, df) - 0.5, max(df - 1.0, 1e-12), float(df), xtol=1e-14, rtol=1e-15))


def chi2_median_10() -> float:
    """Median of chi-squared(10), about 9.341818"""
    return chi2_median(10)


def friedman_mean(X: np.ndarray) -> np.ndarray:
    """Noiseless Friedman regression function E[Y | X]"""
    X = np.atleast_2d(X)
    return (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
    )


def spheres_oracle(X: np.ndarray) -> np.ndarray:
    """Bayes classifier for the spheres process: label 2 outside the median sphere, 1 inside"""
    X = np.atleast_2d(X)
    radius = (X[:, :SPHERES_SIGNAL] ** 2).sum(axis=1)
    return np.where(radius > chi2_median_10(), 2, 1)


def gen_friedman(n: int, seed: int = 0) -> Dataset:
    """n rows of the Friedman regression process (p = 10)"""
    if n < 2:
        raise InvalidArgumentError(f"sample size must be at least 2, got {n}")
    rng = derive_stream(seed, DATAGEN_STREAM, _FRIEDMAN_KEY)
    X = rng.random((n, FRIEDMAN_P))
    y = friedman_mean(X) + rng.standard_normal(n)
    return Dataset(
        features=X,
        response=y,
        task="regression",
        columns=[ColumnMeta(name=f"x{j + 1}") for j in range(FRIEDMAN_P)],
    )


def gen_spheres(n: int, seed: int = 0) -> Dataset:
    """n rows of the Gaussian spheres classification process (p = 20, labels 1/2)

    Both labels must occur; each draw is label 2 with probability 1/2, so very
    small n can fail with InvalidArgumentError (n = 4 does about one seed in 8).
    """
    if n < 2:
        raise InvalidArgumentError(f"sample size must be at least 2, got {n}")
    rng = derive_stream(seed, DATAGEN_STREAM, _SPHERES_KEY)
    X = rng.standard_normal((n, SPHERES_P))
    z = np.where((X[:, :SPHERES_SIGNAL] ** 2).sum(axis=1) > chi2_median_10(), 1, -1)
    flip = rng.random(n) < SPHERES_FLIP
    y = np.where(flip, -z, z)
    labels = np.where(y > 0, 2, 1)
    return _labelled(X, labels)


def _labelled(X: np.ndarray, labels: np.ndarray) -> Dataset:
    # Dataset requires both classes present; tiny samples may draw only one
    if np.unique(labels).size < 2:
        raise InvalidArgumentError("spheres sample contains a single class; draw more rows")
    return Dataset(
        features=X,
        response=labels,
        task="classification",
        columns=[ColumnMeta(name=f"x{j + 1}") for j in range(X.shape[1])],
        class_names=["1", "2"],
    )


def generate(spec: GeneratorSpec) -> Dataset:
    """Dispatch on spec.process"""
    if spec.process == "friedman":
        return gen_friedman(spec.n, spec.seed)
    return gen_spheres(spec.n, spec.seed)


def dataset_to_frame(data: Dataset) -> pd.DataFrame:
    """Columns x1..xp then the target, as ingest expects"""
    frame = pd.DataFrame(data.features, columns=[c.name for c in data.columns])
    if data.task == "classification":
        names = data.class_names or [str(k) for k in range(1, data.n_classes + 1)]
        frame[data.target_name] = [names[int(k) - 1] for k in data.response]
    else:
        frame[data.target_name] = data.response
    return frame


def write_csv(data: Dataset, path: str) -> str:
    """Write a generated sample in the CSV schema `ingest.load_csv` reads"""
    return save_csv(dataset_to_frame(data), path)


def oracle_error_spheres(data: Dataset) -> float:
    """Misclassification rate of the Bayes classifier on a spheres sample (about 0.05)"""
    if data.task != "classification" or data.p != SPHERES_P:
        raise InvalidArgumentError("oracle error is defined for spheres samples only")
    return float(np.mean(spheres_oracle(data.features) != data.response))
