import numpy as np
import pytest
from hypothesis import settings

from zplab import kernels
from zplab.seq_core import SeqVector

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

EXPONENTS = (1.5, 2.0, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)


def random_vec(rng, dim=12, density=0.7, offset=0):
    vals = rng.standard_normal(dim) * (rng.random(dim) < density)
    return SeqVector.from_dense(vals, start=1 + offset)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
