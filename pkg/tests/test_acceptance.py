"""Every exit criterion at its stated tolerance; one PASS/FAIL line each (see ``pytest -s``)."""

import pytest

from volmax import _backend, acceptance

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("check", [c for c, _ in acceptance.CRITERIA], ids=lambda c: c.__name__)
def test_criterion(check):
    result = check()
    print(f"\n[{_backend.NAME}] {result.line()}")
    assert result.passed, result.line()


@pytest.mark.skipif(len(_backend.BACKENDS) < 2, reason="only one backend available")
@pytest.mark.parametrize("check", [c for c, tier in acceptance.CRITERIA if tier == "fast"],
                         ids=lambda c: c.__name__)
def test_fast_criteria_on_python_kernels(check):
    previous = _backend.use("python")
    try:
        result = check()
    finally:
        _backend.use(previous)
    print(f"\n[python] {result.line()}")
    assert result.passed, result.line()
