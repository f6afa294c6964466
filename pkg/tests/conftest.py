import os
import time

import pytest

from gaborset.fixture import generate_fixture, load_fixture
from gaborset.pipeline import ingest, run_pipeline


@pytest.fixture(scope="session", autouse=True)
def _clean_seed_env():
    # a stray seed override in the environment would silently shift every
    # determinism assertion in the suite
    saved = os.environ.pop("GABORSET_SEED", None)
    yield
    if saved is not None:
        os.environ["GABORSET_SEED"] = saved


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("fx")
    t0 = time.perf_counter()
    generate_fixture(root, seed=1234)
    (root / "gen_elapsed.txt").write_text(repr(time.perf_counter() - t0))
    return root


@pytest.fixture(scope="session")
def fixture_bundle(fixture_dir):
    return load_fixture(fixture_dir)


@pytest.fixture(scope="session")
def fixture_training_set(fixture_bundle):
    cfg, manifest, _ = fixture_bundle
    return ingest(cfg, manifest)


@pytest.fixture(scope="session")
def fixture_run(fixture_dir, fixture_bundle, tmp_path_factory):
    cfg, manifest, labels = fixture_bundle
    out = tmp_path_factory.mktemp("fx_out")
    t0 = time.perf_counter()
    report = run_pipeline(cfg, manifest, out, labels=labels)
    elapsed = time.perf_counter() - t0
    gen_elapsed = float((fixture_dir / "gen_elapsed.txt").read_text())
    return {
        "report": report,
        "out": out,
        "elapsed": elapsed,
        "gen_elapsed": gen_elapsed,
        "cfg": cfg,
        "manifest": manifest,
        "labels": labels,
    }
