import numpy as np
import pytest

from sparsegenre.audio_io import scan_dataset
from sparsegenre.corpus import synth_corpus, write_synth_corpus
from sparsegenre.evaluation import FeatureCache

CORPUS_CLASSES = 4
CORPUS_CLIPS = 50
CORPUS_SEED = 0


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return write_synth_corpus(root, CORPUS_CLASSES, CORPUS_CLIPS, CORPUS_SEED)


@pytest.fixture(scope="session")
def corpus_index(corpus_dir):
    return scan_dataset(corpus_dir)


@pytest.fixture(scope="session")
def corpus_clips():
    """In-memory clips (not quantized), same generator as ``corpus_dir``."""
    return synth_corpus(CORPUS_CLASSES, CORPUS_CLIPS, CORPUS_SEED)


@pytest.fixture(scope="session")
def shared_cache():
    return FeatureCache()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
