import sys

import numpy as np
import pytest

from liouville import SolveOptions, solve_report, validate_matrix
from liouville.errors import Singular


def random_systems(count=50, seed=0):
    """Random admissible (A, beta) pairs with n in {2, 3}.

    Entries of A are uniform on [0, 2] and symmetrized, diagonals are raised to
    at least 0.2, and beta is uniform on [-2, 2]^(n-1) with u_n(0) = 0.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 4))
        M = rng.uniform(0, 2, size=(n, n))
        M = (M + M.T) / 2
        np.fill_diagonal(M, np.maximum(np.diag(M), 0.2))
        try:
            A = validate_matrix(M.tolist())
        except Singular:
            continue
        beta = np.append(rng.uniform(-2, 2, size=n - 1), 0.0)
        out.append((A, beta))
    return out


@pytest.fixture(scope="session")
def bubble():
    return solve_report(validate_matrix([[1.0]]), [1.0], [0.0])


@pytest.fixture(scope="session")
def sym2():
    return solve_report(validate_matrix([[1.0, 0.5], [0.5, 1.0]]), None, [0.0, 0.0])


@pytest.fixture(scope="session")
def mixed3():
    A = validate_matrix([[1.0, 0.4, 0.2], [0.4, 0.6, 0.9], [0.2, 0.9, 1.5]])
    return solve_report(A, [1.0, 2.0, 0.5], [0.7, -0.4, 0.0])


@pytest.fixture(scope="session")
def swap2():
    # zero diagonal; beta kept small enough to stay inside the finite-mass region
    return solve_report(validate_matrix([[0.0, 1.0], [1.0, 0.0]]), None, [0.1, 0.0])


@pytest.fixture(params=["bubble", "sym2", "mixed3", "swap2"])
def report(request):
    return request.getfixturevalue(request.param)


@pytest.fixture(scope="session")
def default_opts():
    return SolveOptions()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    RESULTS = getattr(mod, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
