from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from mpsgrok.mps import encode_dataset

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

REPO = Path(__file__).resolve().parents[1]


def random_dataset(n_samples, n_sites, label_dim=3, seed=0, scale=np.pi / 2):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0, 1, size=(n_samples, n_sites))
    labels = rng.integers(0, label_dim, size=n_samples)
    return encode_dataset(raw, labels, label_dim, scale)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


# -- acceptance summary -----------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE[props["criterion"]] = (props.get("title", ""), verdict,
                                           props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, verdict, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{verdict}] {number}. {title}: {detail}")
