import numpy as np
import pytest

from uniequiv.matrix_core import ProjectionFrame


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def projections_of(u):
    return tuple(np.outer(u[:, i], u[:, i].conj()) for i in range(u.shape[1]))


def random_frame(rng, n):
    return ProjectionFrame(
        projections_of(random_unitary(rng, n)),
        projections_of(random_unitary(rng, n)),
        tuple(int(i) for i in rng.permutation(n)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ----------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the summary

import contextlib
import time

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    log = request.config.stash.setdefault(_ACCEPTANCE, [])

    @contextlib.contextmanager
    def run(label):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException:
            log.append(f"FAIL  {label}  ({time.perf_counter() - t0:.2f}s)")
            raise
        log.append(f"PASS  {label}  ({time.perf_counter() - t0:.2f}s)")

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
