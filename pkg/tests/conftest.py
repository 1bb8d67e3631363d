import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fuzzcalc import _kernels  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile accelerated kernels once so timed tests measure steady state."""
    _kernels.warmup()
