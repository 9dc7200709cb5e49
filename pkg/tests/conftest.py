import numpy as np
import pytest

from nbx.basis import DilationBasis, residual_function
from nbx.piecewise import PiecewiseFunction
from nbx.rearrangement import rearrange

CORPUS_SEED = 20240915
CORPUS_X_CUT = 1e-3
CORPUS_GRID = 2 ** 18


@pytest.fixture(scope="session", autouse=True)
def shared_cache(tmp_path_factory, monkeypatch=None):
    """Session-wide pairing-matrix cache so repeated solves stay cheap."""
    import os
    path = tmp_path_factory.mktemp("gram-cache")
    old = os.environ.get("NBX_CACHE_DIR")
    os.environ["NBX_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("NBX_CACHE_DIR", None)
    else:
        os.environ["NBX_CACHE_DIR"] = old


def make_corpus(n_members=10, seed=CORPUS_SEED, x_cut=CORPUS_X_CUT,
                grid=CORPUS_GRID):
    """Random residuals: basis size <= 8, coefficients uniform in [-2, 2]."""
    rng = np.random.default_rng(seed)
    members = []
    for _ in range(n_members):
        n = int(rng.integers(1, 9))
        coeffs = rng.uniform(-2.0, 2.0, n)
        basis = DilationBasis.integer(n)
        f = residual_function(basis, coeffs, x_cut)
        members.append((basis, coeffs, f, rearrange(f, grid)))
    return members


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@pytest.fixture(scope="session")
def chi_profile():
    return rearrange(PiecewiseFunction.chi())


@pytest.fixture(scope="session")
def step_profile():
    return rearrange(PiecewiseFunction.step())
