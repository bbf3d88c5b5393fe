import numpy as np
import pytest

from tensorbandits.tensor_algebra import TransformSpec


def all_specs(d3):
    return [TransformSpec.identity(d3), TransformSpec.dct(d3), TransformSpec.random_orthogonal(d3, seed=7)]


@pytest.fixture(params=["identity", "dct", "random_orthogonal"])
def kind(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
