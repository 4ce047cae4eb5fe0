import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from percmatch.graph import Graph, ObservedPair, generate_gnp, sample_observed_pair

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_pair(n, mean_degree, s, seed):
    g = generate_gnp(n, min(mean_degree, n - 1), seed)
    return sample_observed_pair(g, s, seed + 1)


def pair_from_edges(n, e1, e2, truth=None, s=1.0):
    truth = np.arange(n) if truth is None else np.asarray(truth)
    return ObservedPair(Graph.from_edges(n, e1), Graph.from_edges(n, e2), truth, s)


@pytest.fixture(autouse=True)
def _quiet_gamma_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="gamma=")
        yield


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
