import pytest
from acceptance_log import RESULTS
from hypothesis import settings

from ghlab.config import PunctureConfig, chen_chen, generate_config

settings.register_profile("ghlab", deadline=None, max_examples=50)
settings.load_profile("ghlab")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        ok, title, detail = RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {title} ({detail})")


@pytest.fixture
def single():
    return PunctureConfig([[0.0, 0.0, 0.0]], [-1], label="single")


@pytest.fixture
def cc():
    return chen_chen()


@pytest.fixture
def gz():
    return generate_config("geometric_z", ratio=2.0, count=20)


@pytest.fixture
def ball():
    return generate_config("random_ball", radius=1.0, count=10, seed=7)
