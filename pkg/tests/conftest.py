import numpy as np
import pytest

from congrec.data import (
    SyntheticConfig,
    aggregate_ema,
    build_cohort,
    bundled_correlation,
    bundled_taxonomy,
    generate_synthetic,
)


@pytest.fixture(scope="session")
def taxonomy():
    return bundled_taxonomy()


@pytest.fixture(scope="session")
def correlation(taxonomy):
    return bundled_correlation(taxonomy)


@pytest.fixture(scope="session")
def small_cohort(taxonomy, correlation):
    """A quick 40-user cohort for tests that just need realistic records."""
    cfg = SyntheticConfig(cohort_size=40, seed=7, ema_days=4)
    participants, events = generate_synthetic(cfg, correlation, taxonomy)
    counts, _ = aggregate_ema(events, taxonomy)
    return build_cohort(participants, counts, taxonomy)


@pytest.fixture(scope="session")
def planted_cohort(taxonomy, correlation):
    """The 150-user seed-42 cohort used by the ordering experiments."""
    cfg = SyntheticConfig(cohort_size=150, seed=42)
    participants, events = generate_synthetic(cfg, correlation, taxonomy)
    counts, _ = aggregate_ema(events, taxonomy)
    return build_cohort(participants, counts, taxonomy)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" in getattr(rep, "nodeid", ""):
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if status == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
