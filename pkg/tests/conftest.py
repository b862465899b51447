import numpy as np
import pytest


def direct_dft(v):
    """O(n^2) DFT by explicit summation; independent of numpy.fft."""
    v = np.asarray(v, dtype=complex)
    n = v.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ v


def direct_idft(f):
    f = np.asarray(f, dtype=complex)
    n = f.size
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) @ f / n


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def rel_err(a, b):
    ref = np.linalg.norm(np.ravel(b))
    diff = np.linalg.norm(np.ravel(a) - np.ravel(b))
    return diff / ref if ref else diff


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        status = "REPORT" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {detail}")
