import numpy as np
import pytest

from wavediag import pipeline, synth


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def default_corpus():
    return synth.generate_dataset(synth.SynthConfig())


@pytest.fixture(scope="session")
def default_run(default_corpus):
    """The full default pipeline, trained once per session (about 20 s)."""
    return pipeline.run_training(default_corpus)


acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[acceptance_key] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        def order(line):
            tag = line.split()[1].rstrip(":")
            return int(tag) if tag.isdigit() else 99

        for line in sorted(lines, key=order):
            terminalreporter.write_line(line)
