import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from substruct.assembly import assemble  # noqa: E402
from substruct.dofmap import build_dofmap  # noqa: E402
from substruct.mesh import build_grid  # noqa: E402
from substruct.sets import build_decomposition_sets  # noqa: E402

# filled by test_acceptance.py: criterion id -> (passed, detail)
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def small_problem():
    """Factory for cached ``(grid, dofmap, A, sets)`` on small grids."""
    cache = {}

    def get(kind, n, m):
        key = (kind, n, m)
        if key not in cache:
            g = build_grid(n, m)
            dm = build_dofmap(kind, g)
            cache[key] = (g, dm, assemble(dm), build_decomposition_sets(g, dm))
        return cache[key]

    return get
