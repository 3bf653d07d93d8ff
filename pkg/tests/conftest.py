import numpy as np
import pytest

from er_outliers.graph_core import SparseGraph, generate_er

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def record(request):
    """``record(cid, ok, detail)`` stores one acceptance outcome for the summary."""
    store = request.config.stash[_ACCEPTANCE_KEY]

    def _record(cid: str, ok: bool, detail: str) -> bool:
        prev = store.get(cid)
        if prev is not None:
            ok = ok and prev[0]
            detail = f"{prev[1]}; {detail}"
        store[cid] = (bool(ok), detail)
        print(f"{cid}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_ACCEPTANCE_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(store, key=lambda c: int(c[1:])):
        ok, detail = store[cid]
        terminalreporter.write_line(f"{cid:>4} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def star3() -> SparseGraph:
    return SparseGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)], d_param=1.0)


@pytest.fixture
def triangle() -> SparseGraph:
    return SparseGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], d_param=1.0)


@pytest.fixture(scope="session")
def er_small() -> SparseGraph:
    return generate_er(300, 5.0, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
