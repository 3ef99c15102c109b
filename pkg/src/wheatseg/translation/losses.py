"""Least-squares adversarial loss and L1 cycle-consistency terms."""

from __future__ import annotations

import torch

from ..errors import TrainingError


def adversarial_loss(scores: torch.Tensor, target: float) -> torch.Tensor:
    """Mean squared distance between patch scores and a scalar target.

    Real patches aim at 1, fakes at 0 (for the discriminator) and the
    generator pushes its fakes toward 1.
    """
    loss = torch.mean((scores - target) ** 2)
    if not torch.isfinite(loss):
        raise TrainingError("adversarial loss is not finite")
    return loss


def cycle_loss(
    recon_image: torch.Tensor,
    image: torch.Tensor,
    recon_mask: torch.Tensor | None = None,
    mask: torch.Tensor | None = None,
    lambda_image: float = 10.0,
    lambda_mask: float = 10.0,
) -> tuple[torch.Tensor, dict[str, float]]:
    """Weighted L1 reconstruction penalty with per-term raw values.

    The mask pair is optional: the real-side cycle has no annotation to
    recover, so it compares images only. Mask terms are computed in
    [0, 1] mask space. Returns (weighted total, {"image": raw, "mask": raw}).
    """
    if (recon_mask is None) != (mask is None):
        raise ValueError("recon_mask and mask must be given together")
    image_term = torch.mean(torch.abs(recon_image - image))
    total = lambda_image * image_term
    components = {"image": float(image_term.detach())}
    if recon_mask is not None:
        mask_term = torch.mean(torch.abs(recon_mask - mask))
        total = total + lambda_mask * mask_term
        components["mask"] = float(mask_term.detach())
    if not torch.isfinite(total):
        raise TrainingError("cycle loss is not finite")
    return total, components
