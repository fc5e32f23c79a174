import os

import numpy as np
import pytest
from hypothesis import settings

from warped_ricci import bryant, solver
from warped_ricci.barriers import params_for
from warped_ricci.pinch import get_pinch

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

AK_M = (2e-2, 1e-2, 5e-3)
T1_OVER_M = 0.01
T_END = 5e-3


@pytest.fixture(scope="session")
def tables2():
    """Production tables for q = 2 (large sigma range for the tip barriers)."""
    return bryant.build_tables(2, sigma_max=1e4, B=256.0)


@pytest.fixture(scope="session")
def tables500():
    return {q: bryant.build_tables(q, sigma_max=500.0) for q in (2, 3)}


@pytest.fixture(scope="session")
def ak():
    return get_pinch("ak-neckpinch")


@pytest.fixture(scope="session")
def pancake():
    return get_pinch("pancake")


def _run(pinch, m, tables):
    params = params_for(pinch)
    T1 = T1_OVER_M * m
    st = solver.mollified_initial(pinch, m, T1, solver.GridSpec(), tables, params)
    outs = np.geomspace(T1, T_END, 12)
    return solver.run(st, T_END, output_times=outs, params=params, tables=tables)


@pytest.fixture(scope="session")
def ak_runs(ak, tables2):
    """The headline runs, keyed by m, with wall time in ``meta``."""
    import time
    out = {}
    for m in AK_M:
        t0 = time.perf_counter()
        out[m] = _run(ak, m, tables2)
        out[m].meta["wall_s"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def pancake_run(pancake, tables2):
    return _run(pancake, 1e-2, tables2)


#: criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
