import sys

import pytest

from bispectral.exact import MatRF
from bispectral.exprio import make_basis, parse_expr


def rf(text, basis):
    return parse_expr(text, basis)


def mat(rows, basis):
    return MatRF.from_rows([[parse_expr(e, basis) for e in r] for r in rows], basis)


@pytest.fixture(scope="session")
def bx():
    return make_basis(["x", "z"])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
