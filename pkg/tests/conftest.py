import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def wigner_expm(ell, beta):
    """Full d^ell(beta) = expm(-i beta J_y), rows and columns ordered m = -ell..ell."""
    from scipy.linalg import expm
    m = np.arange(-ell, ell)
    jp = np.zeros((2 * ell + 1, 2 * ell + 1))
    jp[np.arange(1, 2 * ell + 1), np.arange(2 * ell)] = np.sqrt((ell - m) * (ell + m + 1.0))
    jy = (jp - jp.T) / 2j
    return expm(-1j * beta * jy).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion -> list of (part, ok, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(criterion, part, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
    print(f"criterion {criterion} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'ok' if good else 'FAILED'} ({d})" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'} - {detail}")
