import os
from pathlib import Path

import numpy as np
import pytest

from featuregraph.dataset import (
    SplitSpec,
    apply_standardizer,
    fit_standardizer,
    load_csv,
    split,
)

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


@pytest.fixture(scope="session")
def housing_csv():
    return DATA / "housing.csv"


@pytest.fixture(scope="session")
def housing_svm():
    return DATA / "housing.svm"


@pytest.fixture(scope="session")
def housing_split(housing_csv):
    """Standardized 300/206 split used by the reproduction recipes."""
    ds = load_csv(housing_csv, "MEDV")
    train, test = split(ds, SplitSpec(n_train=300, seed=1))
    std = fit_standardizer(train)
    return apply_standardizer(std, train), apply_standardizer(std, test)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
