import subprocess
from pathlib import Path

import pytest


def generate_dataset(out: Path, **kwargs) -> Path:
    """Invoke the primary toolkit's CLI; the manifest is the only contract."""
    defaults = dict(train=6, val=2, test=2, width=64, height=64, seed=123)
    defaults.update(kwargs)
    cmd = ["ordcal", "generate", "--out", str(out)]
    for key, value in defaults.items():
        cmd += [f"--{key.replace('_', '-')}", str(value)]
    result = subprocess.run(cmd, capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    return out / "manifest.jsonl"


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory) -> Path:
    return generate_dataset(tmp_path_factory.mktemp("dataset"))
