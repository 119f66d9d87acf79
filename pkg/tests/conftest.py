import os
import sys
from pathlib import Path

import pytest
import yaml

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def configs_dir():
    return ROOT / "configs"


@pytest.fixture
def write_yaml(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False))
        return path

    return write


@pytest.fixture
def two_region_file(write_yaml):
    """Two regions with 30% / 70% of hash power."""
    return write_yaml(
        "regions2.yaml",
        {
            "regions": [
                {"region_id": "a", "download_mbps": 10, "upload_mbps": 5, "node_count": 1, "mine_power_share": 0.3},
                {"region_id": "b", "download_mbps": 10, "upload_mbps": 5, "node_count": 1, "mine_power_share": 0.7},
            ],
            "latency_ms": {"a": {"a": 10, "b": 80}, "b": {"b": 10}},
        },
    )


# ---- acceptance verdict lines and the slow marker ----

ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def check(cid: str, ok: bool, detail: str) -> None:
        line = f"{cid:<7} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return check


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CHAINSIM_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="long run; set CHAINSIM_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
