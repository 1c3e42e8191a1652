"""Pytest Configuration and Fixtures."""

import os
from contextlib import contextmanager
from pathlib import Path
from unittest import mock

from pytest import fixture

TESTS_PATH = Path(__file__).parent


@contextmanager
def _env(prjroot: Path):
    """Environment."""
    env = {
        "PRJROOT": str(prjroot),
        "SVE_CACHE": str(prjroot / "cache"),
        "SVE_MAXWORKERS": "1",
        "SVE_NO_COLOR": "1",
    }

    with mock.patch.dict(os.environ, env):
        yield prjroot


@fixture
def prjroot(tmp_path):
    """Temporary Project Root with private Cache."""
    with _env(tmp_path) as path:
        yield path


@fixture
def example41():
    """Scalar Test Problem with alpha=0.9, beta=0.1."""
    from sve.problem import example41

    yield example41(0.9, 0.1)
