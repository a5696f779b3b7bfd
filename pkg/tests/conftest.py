import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_spectrum(rng, n, scale=1.0, min_gap=1e-3):
    """Strictly increasing random spectrum with relative gaps at least ``min_gap``."""
    while True:
        lam = np.sort(rng.standard_normal(n)) * scale
        if n == 1 or np.min(np.diff(lam)) > min_gap * scale:
            return lam


def random_unitary(rng, n, complex_=False):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def dense_rank_one(lam, v):
    return np.linalg.eigvalsh(np.diag(lam) + np.outer(v, np.conj(v)))


def dense_bordered(lam, v, c):
    n = len(lam)
    t = np.zeros((n + 1, n + 1), dtype=np.result_type(np.asarray(v), float))
    t[np.arange(n), np.arange(n)] = lam
    t[:n, n] = v
    t[n, :n] = np.conj(v)
    t[n, n] = c
    return np.linalg.eigvalsh(t)


@st.composite
def spectra(draw, min_n=1, max_n=6):
    """Strict spectra with gaps in [0.05, 3]."""
    n = draw(st.integers(min_n, max_n))
    start = draw(st.floats(-5, 5))
    gaps = draw(st.lists(st.floats(0.05, 3.0), min_size=n - 1, max_size=n - 1))
    return np.cumsum([start] + gaps)


@st.composite
def rank_one_targets(draw, min_n=1, max_n=6):
    """(lam, mu) with mu strictly inside the rank-one box."""
    lam = draw(spectra(min_n, max_n))
    n = lam.size
    fr = draw(st.lists(st.floats(0.05, 0.95), min_size=n, max_size=n))
    upper = np.append(lam[1:], lam[-1] + draw(st.floats(0.1, 5.0)))
    return lam, lam + np.array(fr) * (upper - lam)


@st.composite
def bordered_targets(draw, min_n=1, max_n=6):
    """(lam, mu) with mu strictly inside the bordered box."""
    lam = draw(spectra(min_n, max_n))
    n = lam.size
    fr = draw(st.lists(st.floats(0.05, 0.95), min_size=n + 1, max_size=n + 1))
    lo = np.concatenate([[lam[0] - draw(st.floats(0.1, 5.0))], lam])
    hi = np.concatenate([lam, [lam[-1] + draw(st.floats(0.1, 5.0))]])
    return lam, lo + np.array(fr) * (hi - lo)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
