import warnings

import pytest

from tweetmine.ingest import matched_keywords, split_corpus
from tweetmine.synth import condition_corpora, two_topic_corpus
from tweetmine.textprep import preprocess_all


def _prepared(sc):
    topic, control = split_corpus(sc.records, sc.keywords, "synthetic")
    return {
        "corpus": sc,
        "topic": topic,
        "control": control,
        "topic_docs": preprocess_all(topic.records),
        "control_docs": preprocess_all(control.records),
        "matches": [matched_keywords(r.text, sc.keywords) for r in topic.records],
    }


@pytest.fixture(scope="session")
def two_topic():
    """10k-tweet seeded corpus, 5k per class."""
    return _prepared(two_topic_corpus(5000, 5000, seed=1))


@pytest.fixture(scope="session")
def small_two_topic():
    return _prepared(two_topic_corpus(600, 600, seed=2))


@pytest.fixture(scope="session")
def polysemous():
    return _prepared(two_topic_corpus(4000, 4000, seed=4, polysemous="adhd"))


@pytest.fixture(scope="session")
def conditions():
    a, b, ka, kb = condition_corpora(2000, seed=2)
    return preprocess_all(a), preprocess_all(b), ka, kb


@pytest.fixture(autouse=True)
def _quiet_short_vocab():
    # synthetic lexicons are smaller than the default vocabulary size
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="only .* terms available")
        yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
