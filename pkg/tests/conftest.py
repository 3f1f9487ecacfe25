"""
Shared fixtures: small fields and an in-process CLI runner.
"""

import io
from typing import Tuple

import pytest

from qdesigns.main import main
from qdesigns.services.gf_core import make_field


@pytest.fixture
def f2():
    return make_field(2)


@pytest.fixture
def f3():
    return make_field(3)


@pytest.fixture
def run_cli():
    """Run `qdesigns <argv>` in-process; returns (exit status, stdout)."""
    def runner(*argv: str) -> Tuple[int, str]:
        out = io.StringIO()
        status = main(list(argv), stdout=out)
        return status, out.getvalue()
    return runner
