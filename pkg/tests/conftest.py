import pytest

from shakekey.evaluation import PairDataset
from shakekey.signal import SynthConfig, synth_subject_shakes

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def recordings():
    """Ten subjects by fifteen shakes, the layout of the recorded dataset."""
    return synth_subject_shakes(SynthConfig(), 10, 15, seed=2015)


@pytest.fixture(scope="session")
def dataset(recordings):
    return PairDataset.from_recordings(recordings, n_negatives=300, seed=7)


@pytest.fixture(scope="session")
def small_dataset():
    recs = synth_subject_shakes(SynthConfig(), 5, 5, seed=11)
    return PairDataset.from_recordings(recs, n_negatives=25, seed=3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
