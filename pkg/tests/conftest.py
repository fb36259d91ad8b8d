import sys

import pytest

from nyquist_tdm import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run a test once per available kernel backend."""
    previous = kernels.active_backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def pytest_terminal_summary(terminalreporter):
    verdicts = {}
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            verdicts.update(getattr(mod, "VERDICTS", {}))
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for key in sorted(verdicts):
            terminalreporter.write_line(verdicts[key])
