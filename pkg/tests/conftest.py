import numpy as np
import pytest

from xdecomp import fixtures
from xdecomp.poly import Poly

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def small_example():
    """The order-3 tensor on C^4 used throughout the worked examples, with its Segre variety."""
    return fixtures.load("segre_small")


def poly_from(nvars: int, text: dict) -> Poly:
    """{'012': c, ...} -> Poly; exponent strings are digit lists."""
    return Poly(nvars, {tuple(int(ch) for ch in k): v for k, v in text.items()})


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
