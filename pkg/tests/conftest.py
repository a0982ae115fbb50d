"""Shared fixtures: finished pipeline runs reused across test modules.

The pipeline fixtures run at 730-hour resolution (12 periods) so a full
six-stage, multi-pathway run stays under ten seconds; tests that need
the paper-scale 24-hour resolution build their own runs.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest
import yaml

sys.path.insert(0, str(Path(__file__).parent))

from nearopt.pipeline import RunConfig, run_pipeline


def _make_run(root: Path, **settings) -> RunConfig:
    config = {
        "epsilon": 0.1,
        "resolution": 730,
        "n_samples": 2000,
        "tree_depth": 3,
        "output_dir": "out",
    }
    config.update(settings)
    path = root / "run.yaml"
    path.write_text(yaml.safe_dump(config))
    cfg = RunConfig.from_file(path)
    run_pipeline(cfg)
    return cfg


@pytest.fixture(scope="session")
def two_pathway_run(tmp_path_factory) -> RunConfig:
    """Hydrogen + methanol shipping, seed 7, with cost verification on."""
    return _make_run(
        tmp_path_factory.mktemp("two_pathway"),
        pathways=["hydrogen_shipping", "methanol_shipping"],
        seed=7,
        clusters=3,
        verify_fraction=0.05,
    )


@pytest.fixture(scope="session")
def three_carrier_run(tmp_path_factory) -> RunConfig:
    """Ammonia + methane + methanol shipping, seed 11, no verification."""
    return _make_run(
        tmp_path_factory.mktemp("three_carrier"),
        pathways=["ammonia_shipping", "methane_shipping", "methanol_shipping"],
        seed=11,
        clusters=4,
        verify_fraction=0.0,
    )


@pytest.fixture(scope="session")
def service_client(two_pathway_run):
    from fastapi.testclient import TestClient

    from nearopt.service.app import create_app

    app = create_app(two_pathway_run.output_dir)
    with TestClient(app) as client:
        yield client
