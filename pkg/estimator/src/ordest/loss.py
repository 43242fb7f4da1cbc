"""Ordinal ranking loss over predicted distortion levels.

For logits chi_0..chi_{n-1} whose ground truth is increasing, the pairwise
probability P_i^k = sigmoid(chi_i - chi_k) should be high for k < i and low for
k >= i. Each position accumulates log P_i^k over k < i plus log(1 - P_i^k)
over k >= i — the k = i self term log(1 - sigmoid(0)) is kept exactly as
written, contributing a constant log 2 floor — and the loss is the negated
average, so L >= ln 2 always.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F

LOSS_FLOOR = math.log(2.0)


def ordinal_loss(logits: torch.Tensor, ascending_rank: torch.Tensor | None = None) -> torch.Tensor:
    """Ranking loss of a batch of level vectors.

    ``logits``: (batch, n) or (n,). ``ascending_rank`` optionally gives the
    index order that sorts the ground truth ascending; by default the
    natural order is taken as already ascending (blocks are radially
    ordered and levels increase outward for the default conventions).
    """
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
    if not torch.isfinite(logits).all():
        raise ValueError("logits must be finite")
    if ascending_rank is not None:
        logits = logits[:, ascending_rank]
    n = logits.shape[1]

    # diff[b, i, k] = chi_i - chi_k
    diff = logits.unsqueeze(2) - logits.unsqueeze(1)
    log_p = F.logsigmoid(diff)
    log_not_p = F.logsigmoid(-diff)

    index = torch.arange(n, device=logits.device)
    below = (index.unsqueeze(1) > index.unsqueeze(0)).to(logits.dtype)  # k < i
    at_or_above = 1.0 - below  # k >= i, self term included

    per_position = (log_p * below + log_not_p * at_or_above).sum(dim=2)
    return -(per_position.sum(dim=1) / n).mean()
