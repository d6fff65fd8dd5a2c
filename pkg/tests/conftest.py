import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="Run acceptance-scale tests (full Keister sweep, d up to 1024). "
        "Used before tagging a release.",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
