"""Shared fixtures; collects acceptance verdicts and prints them at the end of the run."""
from __future__ import annotations

import functools

import numpy as np
import pytest

from nitschefem import StudyConfig, build_mesh, build_space, run_study

_VERDICTS: list[tuple[str, str, bool, str]] = []


def record(criterion: str, label: str, passed: bool, detail: str = "") -> bool:
    """Register one acceptance verdict and print it immediately."""
    _VERDICTS.append((criterion, label, bool(passed), detail))
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance {criterion}] {status} {label} {detail}".rstrip())
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, label, passed, detail in sorted(_VERDICTS, key=lambda v: v[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{criterion:>4} {status} {label} {detail}".rstrip())


@functools.lru_cache(maxsize=None)
def cached_study(**kwargs):
    """``run_study`` memoised on its keyword arguments (configs are rebuilt each call)."""
    return run_study(StudyConfig(timing=False, **kwargs))


@functools.lru_cache(maxsize=None)
def cached_space(dim: int, level: int, k: int, grading: float = 1.0):
    return build_space(build_mesh(dim, level, grading), k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
