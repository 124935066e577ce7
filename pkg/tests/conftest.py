import numpy as np
import pytest

from spraylab import Chart, GridSpec, TangentSample, sample_grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def ball_samples(dim, count, seed=0, max_norm=0.8, min_norm=0.0):
    return sample_grid(Chart.ball(dim), GridSpec(samples=count, seed=seed, max_norm=max_norm,
                                                 min_norm=min_norm))


def random_sample(rng, dim, radius=0.7):
    x = rng.uniform(-1, 1, dim)
    x *= radius * rng.random() / np.linalg.norm(x)
    y = rng.standard_normal(dim)
    return TangentSample(x, y)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
