import subprocess
import sys

import pytest

SYNTHETIC = """delay_ms,block_index,mean_offset_ms,runs
0,1,10.85,5
0,10,10.85,5
0,97,10.85,5
2000,1,4056,5
2000,10,7893,5
2000,97,28674,5
3500,1,8778,5
3500,10,19801,5
3500,97,126680,5
"""

HALTED = """delay_ms,block_index,mean_offset_ms,runs
0,1,10.85,1
0,10,10.85,1
0,97,10.85,1
3580,1,9650,1
"""


@pytest.fixture()
def synthetic_csv(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text(SYNTHETIC)
    return path


@pytest.fixture()
def halted_csv(tmp_path):
    path = tmp_path / "halted.csv"
    path.write_text(HALTED)
    return path


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    """A real summary produced by the simulator CLI (the only interface
    this package consumes)."""
    out = tmp_path_factory.mktemp("sweep") / "summary.csv"
    subprocess.run(
        [
            sys.executable,
            "-m",
            "eovsim",
            "sweep",
            "--config",
            "twocloud_sweep",
            "--delays",
            "0,1000,2000,2500,3000,3500",
            "--reps",
            "1",
            "--out",
            str(out),
        ],
        check=True,
        capture_output=True,
    )
    return out
