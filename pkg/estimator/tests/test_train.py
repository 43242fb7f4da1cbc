import math

import numpy as np
import pytest
import torch

from ordest.config import NetworkConfig, TrainConfig
from ordest.data import load_samples, read_manifest, stack_samples
from ordest.evaluate import evaluate
from ordest.loss import ordinal_loss
from ordest.model import build_model
from ordest.train import load_checkpoint, train


class TestDeterminism:
    def test_same_seed_same_first_epoch_loss(self, toy_manifest, tmp_path):
        cfg = TrainConfig(epochs=1, batch_size=8, seed=5)
        a = train(toy_manifest, tmp_path / "a", "ordinal", train_cfg=cfg)
        b = train(toy_manifest, tmp_path / "b", "ordinal", train_cfg=cfg)
        assert a.stats[0].train_loss == b.stats[0].train_loss
        assert a.stats[0].val_loss == b.stats[0].val_loss

    def test_loss_csv_schema(self, toy_manifest, tmp_path):
        cfg = TrainConfig(epochs=2, batch_size=8, seed=5)
        result = train(toy_manifest, tmp_path, "parameter", train_cfg=cfg)
        lines = result.curve_path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss"
        assert len(lines) == 3


class TestOverfitSanity:
    def test_single_sample_reaches_loss_floor(self, toy_manifest, tmp_path):
        """200 steps on one sample: the network loss must come within 1e-2 of
        the floor obtained by optimizing the objective directly over the
        output vector (no network)."""
        samples = load_samples(toy_manifest, "train", 4, element_indices=(3,))[:1]
        globals_, locals_, levels, _ = stack_samples(samples)

        net_cfg = NetworkConfig()
        model = build_model(net_cfg, globals_.shape[-1], locals_.shape[-1], seed=0)
        optimizer = torch.optim.Adam(model.parameters(), lr=2e-3)
        import torch.nn.functional as F

        def objective(pred, logits):
            return F.smooth_l1_loss(pred, levels) + 0.5 * ordinal_loss(logits)

        final = math.inf
        for _ in range(200):
            optimizer.zero_grad()
            loss = objective(*model.forward_with_logits(globals_, locals_))
            loss.backward()
            optimizer.step()
            final = float(loss)

        # floor: optimize the objective directly over free output vectors
        free_levels = levels.clone().requires_grad_(True)
        free_logits = torch.zeros_like(levels).requires_grad_(True)
        free_opt = torch.optim.Adam([free_levels, free_logits], lr=0.05)
        for _ in range(500):
            free_opt.zero_grad()
            floor_loss = objective(free_levels, free_logits)
            floor_loss.backward()
            free_opt.step()
        floor = float(objective(free_levels, free_logits))

        assert final <= floor + 1e-2


class TestEvaluate:
    class _Stub(torch.nn.Module):
        """Fixed-output predictor standing in for a trained network."""

        def __init__(self, outputs: torch.Tensor, n=4):
            super().__init__()
            self.outputs = outputs
            self.cfg = NetworkConfig(n=n)

        def forward(self, globals_, locals_):
            return self.outputs[: globals_.shape[0]]

    def test_truth_checkpoint_scores_zero(self, toy_manifest):
        records = [r for r in read_manifest(toy_manifest) if r.split == "test"]
        outputs = torch.tensor([r.ordinal for r in records], dtype=torch.float32)
        report = evaluate(None, toy_manifest, model=self._Stub(outputs), mode="ordinal")
        assert report.conversion_failures == 0
        assert report.mean_mdld == pytest.approx(0.0, abs=1e-5)

    def test_uniform_offset_matches_primary_value(self, toy_manifest, tmp_path):
        """levels + 0.05 must score exactly what the primary CLI computes."""
        import json
        import subprocess

        records = [r for r in read_manifest(toy_manifest) if r.split == "test"]
        outputs = torch.tensor(
            np.stack([np.asarray(r.ordinal) + 0.05 for r in records]), dtype=torch.float32
        )
        report = evaluate(
            None, toy_manifest, model=self._Stub(outputs), mode="ordinal",
            predictions_path=tmp_path / "pred.jsonl",
        )
        result = subprocess.run(
            ["ordcal", "eval", "--manifest", str(toy_manifest),
             "--pred", str(tmp_path / "pred.jsonl")],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        primary = [json.loads(line)["mdld"] for line in result.stdout.splitlines()]
        local = [entry["mdld"] for entry in report.per_sample]
        np.testing.assert_allclose(local, primary, atol=1e-6)
        assert report.mean_mdld > 0.0

    def test_training_beats_random_init(self, toy_manifest, tmp_path):
        cfg = TrainConfig(epochs=8, batch_size=8, seed=1)
        result = train(toy_manifest, tmp_path, "ordinal", train_cfg=cfg)
        model, mode = load_checkpoint(result.checkpoint_path)
        trained = evaluate(None, toy_manifest, split="test", model=model, mode=mode)

        untrained = build_model(NetworkConfig(), 32, 8, seed=99)
        random_report = evaluate(
            None, toy_manifest, split="test", model=untrained, mode="ordinal"
        )
        assert trained.mean_mdld < random_report.mean_mdld
