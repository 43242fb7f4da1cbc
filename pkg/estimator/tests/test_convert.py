"""The local conversion/MDLD math must match the primary toolkit's vectors."""

import json
import subprocess

import numpy as np
import pytest

from ordest.convert import ConversionFailure, levels_to_coefficients, mdld_between
from ordest.data import read_manifest


def run_primary(*argv) -> dict:
    result = subprocess.run(["ordcal", *argv, "--json"], capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    return json.loads(result.stdout)


class TestLevelsToCoefficients:
    def test_matches_primary_cli_on_random_vectors(self):
        rng = np.random.default_rng(11)
        radii = np.array([0.125, 0.375, 0.625, 0.875])
        for _ in range(20):
            k_true = np.concatenate([rng.uniform(0.05, 1.0, 1), rng.uniform(-0.1, 0.1, 3)])
            levels = 1.0 + sum(
                k_true[i] * radii ** (2 * (i + 1)) for i in range(4)
            )
            local = levels_to_coefficients(levels, radii)
            primary = run_primary(
                "convert",
                "--levels", ",".join(repr(float(v)) for v in levels),
                "--radii", ",".join(repr(float(v)) for v in radii),
            )
            np.testing.assert_allclose(local, primary["k"], atol=1e-8)
            np.testing.assert_allclose(local, k_true, atol=1e-9)

    def test_degenerate_radii_fail_cleanly(self):
        with pytest.raises(ConversionFailure):
            levels_to_coefficients([1.1, 1.1], [0.5, 0.5])


class TestMdld:
    def test_matches_primary_cli(self):
        k_est = (0.3, 0.05, -0.02, 0.01)
        k_true = (0.25, 0.02, 0.0, 0.0)
        width = height = 64
        r_norm = 0.5 * float(np.hypot(width, height))
        local = mdld_between(k_est, k_true, (width, height), (32.0, 32.0), r_norm)
        primary = run_primary(
            "eval",
            "--k-est", ",".join(str(v) for v in k_est),
            "--k-true", ",".join(str(v) for v in k_true),
            "--width", str(width), "--height", str(height),
        )
        assert local == pytest.approx(primary["mdld"], abs=1e-8)

    def test_batch_eval_agrees_on_manifest(self, toy_manifest, tmp_path):
        """Predictions written by this package feed the primary batch
        evaluator; both sides must report the same MDLD."""
        record = read_manifest(toy_manifest)[0]
        k_est = np.asarray(record.k) * 1.01
        pred_path = tmp_path / "pred.jsonl"
        pred_path.write_text(json.dumps({"id": record.id, "k": list(k_est)}) + "\n")
        result = subprocess.run(
            ["ordcal", "eval", "--manifest", str(toy_manifest), "--pred", str(pred_path)],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        primary_value = json.loads(result.stdout.splitlines()[0])["mdld"]
        width = height = 64
        center = (record.principal_point[0] + 0.5, record.principal_point[1] + 0.5)
        local = mdld_between(k_est, record.k, (width, height), center, record.r_norm)
        assert local == pytest.approx(primary_value, abs=1e-8)
