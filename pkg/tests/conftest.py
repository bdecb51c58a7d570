import sys

import numpy as np
import pytest

from icaperf.simulate import parse_sources

# Published limiting-variance tables, in their printed layout (the transpose
# of Var(sqrt(n) gamma_hat[k, l])).
PAPER_V = {
    "fobi": [[1.25, 26.71, 5.07], [24.38, 0.80, 8.78], [4.43, 8.51, 0.33]],
    "pow3a": [[0.33, 5.45, 5.45], [4.45, 0.80, 16.43], [4.45, 15.43, 1.25]],
    "pow3b": [[1.25, 7.00, 7.00], [6.00, 0.80, 16.43], [6.00, 15.43, 0.33]],
    "tanha": [[0.33, 7.75, 7.75], [6.75, 0.80, 11.37], [6.75, 10.37, 1.25]],
    "tanhb": [[1.25, 3.01, 3.01], [2.01, 0.80, 11.37], [2.01, 10.37, 0.33]],
}
PAPER_V = {k: np.array(v) for k, v in PAPER_V.items()}
PAPER_TRACE = {"fobi": 77.88, "pow3a": 51.66, "pow3b": 57.86, "tanha": 50.74,
               "tanhb": 31.78}


@pytest.fixture
def rng():
    return np.random.default_rng(20100927)


@pytest.fixture(scope="session")
def order_b():
    return parse_sources("laplace,logistic,beta33")


@pytest.fixture(scope="session")
def order_a():
    return parse_sources("beta33,logistic,laplace")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
