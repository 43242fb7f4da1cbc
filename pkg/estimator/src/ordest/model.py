"""Local-global ordinal-distortion estimation network (toy scale).

A global perception branch reads one flip-normalized image element (plus
its region masks) while n Siamese local branches read the radially ordered
blocks; all local branches share their convolutional stack, pyramid
residual blocks, and header. A distortion-aware perception layer, when
enabled, filters each input with a kernel sized by its radial position
(small filters for inner blocks, large for outer, the global in between).
Features fuse through two fully connected layers into a final linear layer
of width n.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import NetworkConfig

IN_CHANNELS = 5  # RGB + box mask + blob mask


class PerceptionLayer(nn.Module):
    """Channel-preserving conv with a configurable odd kernel size."""

    def __init__(self, kernel_size: int):
        super().__init__()
        self.conv = nn.Conv2d(IN_CHANNELS, IN_CHANNELS, kernel_size,
                              padding=kernel_size // 2)
        self.act = nn.ReLU()

    def forward(self, x):
        return self.act(self.conv(x))


def _norm(channels: int) -> nn.GroupNorm:
    # GroupNorm keeps runs deterministic and batch-size independent.
    return nn.GroupNorm(min(4, channels), channels)


class ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.norm1 = _norm(channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.norm2 = _norm(channels)
        self.act = nn.ReLU()

    def forward(self, x):
        out = self.act(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return self.act(out + x)


def _header(in_features: int, units: tuple[int, int, int]) -> nn.Sequential:
    layers: list[nn.Module] = []
    previous = in_features
    for width in units:
        layers.append(nn.Linear(previous, width))
        layers.append(nn.ReLU())
        previous = width
    return nn.Sequential(*layers)


class GlobalModule(nn.Module):
    """Conv backbone plus a three-layer fully connected header."""

    def __init__(self, cfg: NetworkConfig, input_size: int):
        super().__init__()
        layers: list[nn.Module] = []
        previous = IN_CHANNELS
        size = input_size
        for channels in cfg.backbone_channels:
            layers.append(nn.Conv2d(previous, channels, 3, stride=2, padding=1))
            layers.append(_norm(channels))
            layers.append(nn.ReLU())
            previous = channels
            size = (size + 1) // 2
        self.backbone = nn.Sequential(*layers)
        self.header = _header(previous * size * size, cfg.header_units)

    def forward(self, x):
        features = self.backbone(x)
        return self.header(features.flatten(1))


class LocalSiamese(nn.Module):
    """Shared two-conv stack, shared pyramid residual blocks, shared header."""

    def __init__(self, cfg: NetworkConfig, input_size: int):
        super().__init__()
        c1, c2 = cfg.local_channels
        self.conv1 = nn.Conv2d(IN_CHANNELS, c1, 3, stride=2, padding=1)
        self.norm1 = _norm(c1)
        self.conv2 = nn.Conv2d(c1, c2, 3, stride=2, padding=1)
        self.norm2 = _norm(c2)
        self.act = nn.ReLU()
        self.pyramid = nn.Sequential(*[ResidualBlock(c2) for _ in range(cfg.pyramid_blocks)])
        size = (input_size + 3) // 4
        self.header = _header(c2 * size * size, cfg.header_units)

    def forward(self, x):
        out = self.act(self.norm1(self.conv1(x)))
        out = self.act(self.norm2(self.conv2(out)))
        out = self.pyramid(out)
        return self.header(out.flatten(1))


class OrdinalEstimator(nn.Module):
    """Full estimation network; output width is n (levels or coefficients)."""

    def __init__(self, cfg: NetworkConfig, element_size: int, block_size: int):
        super().__init__()
        self.cfg = cfg
        if cfg.ablations.distortion_aware_layer:
            self.global_perception = PerceptionLayer(cfg.global_filter_size)
            self.local_perception = nn.ModuleList(
                PerceptionLayer(size) for size in cfg.local_filter_sizes
            )
        else:
            self.global_perception = None
            self.local_perception = None
        self.global_module = GlobalModule(cfg, element_size)
        self.local_module = LocalSiamese(cfg, block_size)
        fusion_in = cfg.header_units[-1] * (1 + cfg.n)
        f1, f2 = cfg.fusion_units
        self.fusion = nn.Sequential(
            nn.Linear(fusion_in, f1), nn.ReLU(), nn.Linear(f1, f2), nn.ReLU()
        )
        self.output = nn.Linear(f2, cfg.n)
        # Ranking logits get their own projection of the shared features:
        # margins can grow freely there without dragging the calibrated
        # level outputs apart.
        self.ranking = nn.Linear(f2, cfg.n)

    def local_features(self, local_ctxs: torch.Tensor) -> list[torch.Tensor]:
        """Per-block features before fusion; exposed for the sharing tests."""
        features = []
        for idx in range(self.cfg.n):
            block = local_ctxs[:, idx]
            if self.local_perception is not None:
                block = self.local_perception[idx](block)
            features.append(self.local_module(block))
        return features

    def forward(self, global_ctx: torch.Tensor, local_ctxs: torch.Tensor) -> torch.Tensor:
        """``global_ctx``: (B, 5, H/2, W/2); ``local_ctxs``: (B, n, 5, h, w)."""
        return self.forward_with_logits(global_ctx, local_ctxs)[0]

    def forward_with_logits(
        self, global_ctx: torch.Tensor, local_ctxs: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Levels plus the ranking logits the ordinal loss supervises."""
        if local_ctxs.shape[1] != self.cfg.n:
            raise ValueError(f"expected {self.cfg.n} blocks, got {local_ctxs.shape[1]}")
        g = global_ctx
        if self.global_perception is not None:
            g = self.global_perception(g)
        fused = torch.cat([self.global_module(g), *self.local_features(local_ctxs)], dim=1)
        features = self.fusion(fused)
        return self.output(features), self.ranking(features)


def build_model(cfg: NetworkConfig, element_size: int, block_size: int, seed: int) -> OrdinalEstimator:
    """Seeded construction so weights are reproducible."""
    generator_state = torch.random.get_rng_state()
    torch.manual_seed(seed)
    model = OrdinalEstimator(cfg, element_size, block_size)
    torch.random.set_rng_state(generator_state)
    return model
