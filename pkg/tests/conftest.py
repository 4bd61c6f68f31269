import numpy as np
import pytest

from unitri import montecarlo as mc
from unitri.acceptance import PUBLISHED_SEED


@pytest.fixture(scope="session")
def big_batches():
    """10**6-draw batches at the published seed, shared across test modules."""
    cache = {}

    def get(model):
        if model not in cache:
            cache[model] = mc.run_batch(model, PUBLISHED_SEED, 1_000_000)
        return cache[model]

    return get


def histogram_density(sample, x, half_width):
    """Fraction of ``sample`` in ``[x - h, x + h]`` divided by the bin width, with its SE."""
    sample = np.asarray(sample)
    p = np.mean((sample >= x - half_width) & (sample < x + half_width))
    width = 2.0 * half_width
    return p / width, np.sqrt(p * (1.0 - p) / sample.size) / width


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
