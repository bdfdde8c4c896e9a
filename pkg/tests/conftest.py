import pytest
from hypothesis import settings

from stripsplit.data import BalancedLayout, load_beans
from stripsplit.design import DesignDims

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def beans():
    return load_beans()


@pytest.fixture(scope="session")
def beans_csv(tmp_path_factory, beans):
    path = tmp_path_factory.mktemp("data") / "beans.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        beans.to_csv(fh)
    return path


def random_layout(rng, dims: DesignDims, integers=False) -> BalancedLayout:
    if integers:
        return BalancedLayout.from_array(rng.integers(0, 10, size=dims.shape).astype(float))
    return BalancedLayout.from_array(rng.normal(size=dims.shape) * 3 + 10)


DIMS_GRID = [
    DesignDims(2, 2, 2, 2),
    DesignDims(2, 4, 3, 3),
    DesignDims(3, 2, 5, 4),
    DesignDims(4, 5, 4, 3),
    DesignDims(3, 3, 2, 2),
]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
