import numpy as np
import pytest

from socioinfo.corpus import apply_scaler, extract_features, fit_scaler, load_manifest
from socioinfo.synth import SynthConfig, generate_corpus

SMALL_COUNTS = {"human": 60, "bot_random": 30, "bot_clone": 3, "bot_star": 3}


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("small_corpus")
    return generate_corpus(SynthConfig(counts=SMALL_COUNTS, seed=11, output_dir=out))


@pytest.fixture(scope="session")
def small_matrix(small_corpus):
    return extract_features(load_manifest(small_corpus), k=2)


@pytest.fixture(scope="session")
def small_scaled(small_matrix):
    return apply_scaler(fit_scaler(small_matrix), small_matrix)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        passed, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} ({detail})")
