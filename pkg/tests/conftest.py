import time

import pytest

from botforensics.fixture import generate_fixture, write_fixture
from botforensics.pipeline import PipelineConfig, run_pipeline

# filled by test_acceptance.criterion(); printed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def reference_fixture(tmp_path_factory):
    """Default-target fixture on disk plus one pipeline run (workers=1), timed together."""
    d = tmp_path_factory.mktemp("reference")
    t = time.perf_counter()
    paths = write_fixture(generate_fixture(seed=0), d)
    cfg = PipelineConfig(input=paths["corpus"], scores=paths["scores"], labmt=paths["labmt"],
                         stopwords=paths["stopwords"], out=str(d / "report"), workers=1)
    bundle = run_pipeline(cfg)
    elapsed = time.perf_counter() - t
    return paths, cfg, bundle, elapsed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
