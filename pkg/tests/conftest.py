"""Shared fixtures and the acceptance pass/fail reporter."""

import numpy as np
import pytest

import roughvol as rv


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): criterion checked by the acceptance gate"
    )


def pytest_runtest_logreport(report):
    # One visible line per acceptance criterion, printed as results come in.
    if report.when != "call":
        return
    marker_name = getattr(report, "_acceptance_name", None)
    if marker_name is None:
        return
    if hasattr(report, "wasxfail"):
        status = "FAIL (expected, documented in the decisions ledger)"
    else:
        status = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {marker_name}: {status}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and marker.args:
        report._acceptance_name = marker.args[0]


@pytest.fixture(scope="session")
def small_sim_series():
    """One simulated series reused by objective-level tests (n = 256)."""
    spec = rv.FouSpec(
        hurst=0.1, eta=1.0, alpha=0.001, c=-3.2,
        delta=1.0 / 250.0, m=80, n_days=257, seed=7,
    )
    _, log_price = rv.simulate_fou_price(spec)
    series = rv.realized_variance(log_price, 80, 1.0 / 250.0)
    return rv.log_rv_increments(series)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(123456789)
