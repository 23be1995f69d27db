import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crackle.dataset import SyntheticConfig, build_corpus, generate_synthetic_corpus

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_synth():
    """A few short recordings; quick enough for per-test use."""
    cfg = SyntheticConfig(n_recordings=4, n_crackles=24, duration_s=5.0, seed=7)
    return generate_synthetic_corpus(cfg)


@pytest.fixture(scope="session")
def small_corpus(small_synth):
    recordings, annotations = small_synth
    return build_corpus(recordings, annotations, seed=3, normal_count=30)


@pytest.fixture(scope="session")
def full_synth():
    """35 recordings of 15 s holding 175 annotated crackles."""
    return generate_synthetic_corpus(SyntheticConfig())


@pytest.fixture(scope="session")
def full_corpus(full_synth):
    recordings, annotations = full_synth
    return build_corpus(recordings, annotations, seed=0, normal_count=208)
