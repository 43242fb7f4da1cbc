"""Training loop for the two learning representations.

``ordinal`` mode regresses the distortion levels with smooth-L1 plus the
ranking loss as auxiliary supervision (the ranking term alone cannot pin
absolute level values). ``parameter`` mode regresses the raw coefficient
vector with smooth-L1 and no magnitude normalization, reproducing the
representation being compared against. Runs are deterministic for a fixed
seed: model init, batch order, and optimizer state all derive from it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .config import NetworkConfig, TrainConfig
from .convert import (
    ConversionFailure,
    levels_to_coefficients,
    mdld_between,
    project_levels,
)
from .data import ManifestRecord, load_samples, read_manifest, stack_samples
from .loss import ordinal_loss
from .model import OrdinalEstimator, build_model

MODES = ("ordinal", "parameter")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_mdld: float


@dataclass
class TrainResult:
    checkpoint_path: Path
    curve_path: Path
    stats: list[EpochStats]
    mode: str


def _target(mode: str, levels: torch.Tensor, ks: torch.Tensor) -> torch.Tensor:
    return levels if mode == "ordinal" else ks


def _loss(mode: str, pred, logits, target, net_cfg: NetworkConfig, train_cfg: TrainConfig):
    loss = F.smooth_l1_loss(pred, target, beta=train_cfg.smooth_l1_beta)
    if mode == "ordinal" and net_cfg.ablations.ordinal_supervision:
        loss = loss + train_cfg.ordinal_weight * ordinal_loss(logits)
    return loss


def _val_mdld(
    model: OrdinalEstimator,
    mode: str,
    batch,
    records: dict[str, ManifestRecord],
    ids: list[str],
    image_size: tuple[int, int],
) -> float:
    globals_, locals_, _, _ = batch
    with torch.no_grad():
        pred = model(globals_, locals_).numpy()
    values = []
    for row, record_id in zip(pred, ids):
        record = records[record_id]
        center = (record.principal_point[0] + 0.5, record.principal_point[1] + 0.5)
        try:
            if mode == "ordinal":
                k_est = levels_to_coefficients(project_levels(row), np.asarray(record.radii))
            else:
                k_est = np.asarray(row, dtype=np.float64)
            values.append(
                mdld_between(k_est, record.k, image_size, center, record.r_norm)
            )
        except ConversionFailure:
            continue
    return float(np.mean(values)) if values else math.inf


def train(
    manifest_path,
    out_dir,
    mode: str = "ordinal",
    net_cfg: NetworkConfig | None = None,
    train_cfg: TrainConfig | None = None,
) -> TrainResult:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    net_cfg = net_cfg or NetworkConfig()
    train_cfg = train_cfg or TrainConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = {r.id: r for r in read_manifest(manifest_path)}
    use_masks = net_cfg.ablations.region_mask
    train_samples = load_samples(
        manifest_path, "train", net_cfg.n, use_masks,
        flip_normalized=net_cfg.ablations.flip_op,
    )
    if not train_samples:
        raise ValueError("manifest has no train split")
    # evaluation uses one element only: the canonical bottom-right one
    val_samples = load_samples(
        manifest_path, "val", net_cfg.n, use_masks,
        flip_normalized=net_cfg.ablations.flip_op, element_indices=(3,),
    )

    element_size = train_samples[0].global_ctx.shape[-1]
    block_size = train_samples[0].local_ctxs.shape[-1]
    image_size = (element_size * 2, train_samples[0].global_ctx.shape[-2] * 2)

    train_batch = stack_samples(train_samples)
    val_batch = stack_samples(val_samples) if val_samples else None
    val_ids = [s.record_id for s in val_samples]

    torch.manual_seed(train_cfg.seed)
    model = build_model(net_cfg, element_size, block_size, train_cfg.seed)
    if train_cfg.output_bias_init == "target-mean":
        with torch.no_grad():
            targets = _target(mode, train_batch[2], train_batch[3])
            model.output.bias.copy_(targets.mean(dim=0))
    if train_cfg.optimizer != "adam":
        raise ValueError(f"unsupported optimizer {train_cfg.optimizer!r}")
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.learning_rate)
    scheduler = None
    if train_cfg.decay_every_epochs > 0:
        scheduler = torch.optim.lr_scheduler.StepLR(
            optimizer, step_size=train_cfg.decay_every_epochs,
            gamma=1.0 / train_cfg.decay_factor,
        )

    order_rng = np.random.default_rng(train_cfg.seed)
    stats: list[EpochStats] = []
    count = len(train_samples)
    for epoch in range(1, train_cfg.epochs + 1):
        model.train()
        permutation = order_rng.permutation(count)
        total = 0.0
        batches = 0
        for start in range(0, count, train_cfg.batch_size):
            idx = torch.from_numpy(permutation[start : start + train_cfg.batch_size])
            globals_ = train_batch[0][idx]
            locals_ = train_batch[1][idx]
            target = _target(mode, train_batch[2][idx], train_batch[3][idx])
            optimizer.zero_grad()
            pred, logits = model.forward_with_logits(globals_, locals_)
            loss = _loss(mode, pred, logits, target, net_cfg, train_cfg)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        if scheduler is not None:
            scheduler.step()

        model.eval()
        if val_batch is not None:
            with torch.no_grad():
                val_pred, val_logits = model.forward_with_logits(val_batch[0], val_batch[1])
                val_target = _target(mode, val_batch[2], val_batch[3])
                val_loss = float(
                    _loss(mode, val_pred, val_logits, val_target, net_cfg, train_cfg)
                )
            val_mdld = _val_mdld(model, mode, val_batch, records, val_ids, image_size)
        else:
            val_loss = math.nan
            val_mdld = math.nan
        stats.append(EpochStats(epoch, total / max(batches, 1), val_loss, val_mdld))

    checkpoint_path = out_dir / f"{mode}.pt"
    torch.save(
        {
            "state_dict": model.state_dict(),
            "mode": mode,
            "net_cfg": net_cfg,
            "element_size": element_size,
            "block_size": block_size,
        },
        checkpoint_path,
    )
    curve_path = out_dir / f"{mode}_loss.csv"
    with open(curve_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for row in stats:
            writer.writerow([row.epoch, f"{row.train_loss:.9g}", f"{row.val_loss:.9g}"])
    mdld_path = out_dir / f"{mode}_val_mdld.csv"
    with open(mdld_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "val_mdld"])
        for row in stats:
            writer.writerow([row.epoch, f"{row.val_mdld:.9g}"])
    return TrainResult(checkpoint_path, curve_path, stats, mode)


def load_checkpoint(path) -> tuple[OrdinalEstimator, str]:
    payload = torch.load(path, weights_only=False)
    model = OrdinalEstimator(
        payload["net_cfg"], payload["element_size"], payload["block_size"]
    )
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["mode"]
