"""Shared fixtures: synthetic dataset factory and temp LIBSVM files."""

import numpy as np
import pytest

from asics import Dataset, SyntheticDesign, generate_synthetic, serialize_libsvm


@pytest.fixture
def dataset_factory():
    """Build a synthetic dataset from a deterministic stream."""

    def make(n, d, rho=0.0, beta_star=None, seed=0):
        if beta_star is None:
            beta_star = np.zeros(d)
        design = SyntheticDesign(n=n, d=d, rho=rho, beta_star=np.asarray(beta_star, dtype=float), seed=seed)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        return generate_synthetic(design, rng)

    return make


@pytest.fixture
def libsvm_file(tmp_path, dataset_factory):
    """Write a small synthetic dataset to disk in LIBSVM format."""

    def make(n=80, d=12, rho=0.0, beta_star=None, seed=11, name="data.svm"):
        ds = dataset_factory(n, d, rho=rho, beta_star=beta_star, seed=seed)
        path = tmp_path / name
        path.write_text(serialize_libsvm(ds), encoding="utf-8")
        return path, ds

    return make


def assert_dataset_equal(a: Dataset, b: Dataset) -> None:
    assert a.n == b.n and a.d == b.d
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
