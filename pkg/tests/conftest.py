import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from loadscope import stdb, synth  # noqa: E402


def build_store(seed=0, **config):
    res = synth.generate(config or None, seed=seed)
    table = stdb.impute(stdb.assemble(res.series, target="load"), seed=0)
    return res, table


@pytest.fixture(scope="session")
def synth_store():
    """Imputed synthetic store, seed 0, default generator settings."""
    return build_store(0)


@pytest.fixture(scope="session")
def synth_full(synth_store):
    """Synthetic store with seven load lags and date features."""
    _, table = synth_store
    return stdb.add_date_features(stdb.add_lag_features(table, "load", range(1, 8)))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
