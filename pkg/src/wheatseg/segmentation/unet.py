"""U-Net for binary segmentation.

Encoder halves resolution and doubles width at each level; the decoder
mirrors it with skip connections. Group normalization keeps inference
free of any state that updates outside the optimizer, so a zero
learning rate provably leaves the model untouched.

The network wants sides divisible by 2**depth; `predict` reflection-pads
arbitrary inputs up to the next multiple and crops the output back.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from ..checkpoint import read_checkpoint, write_checkpoint
from ..errors import ConfigError
from ..imaging import BinaryMask, ImageBuffer


@dataclass(frozen=True)
class SegmentationConfig:
    depth: int = 4
    base_width: int = 32
    in_channels: int = 3

    def __post_init__(self):
        if not 1 <= self.depth <= 6:
            raise ConfigError(f"depth must be in [1, 6], got {self.depth}")
        if self.base_width < 1:
            raise ConfigError(f"base_width must be >= 1, got {self.base_width}")
        if self.in_channels < 1:
            raise ConfigError(f"in_channels must be >= 1, got {self.in_channels}")


def _groups(channels: int) -> int:
    for g in (8, 4, 2):
        if channels % g == 0:
            return g
    return 1


def _double_conv(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.GroupNorm(_groups(cout), cout),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.GroupNorm(_groups(cout), cout),
        nn.ReLU(inplace=True),
    )


class UNet(nn.Module):
    def __init__(self, config: SegmentationConfig | None = None):
        super().__init__()
        self.config = config or SegmentationConfig()
        c = self.config
        widths = [c.base_width * 2**i for i in range(c.depth + 1)]
        self.encoders = nn.ModuleList()
        cin = c.in_channels
        for w in widths[:-1]:
            self.encoders.append(_double_conv(cin, w))
            cin = w
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = _double_conv(widths[-2], widths[-1])
        self.upsamples = nn.ModuleList()
        self.decoders = nn.ModuleList()
        for w in reversed(widths[:-1]):
            self.upsamples.append(nn.ConvTranspose2d(w * 2, w, 2, stride=2))
            self.decoders.append(_double_conv(w * 2, w))
        self.head = nn.Conv2d(widths[0], 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Returns logits, shape Nx1xHxW. H and W must be multiples of 2**depth."""
        factor = 2**self.config.depth
        if x.shape[-1] % factor or x.shape[-2] % factor:
            raise ValueError(f"input sides {tuple(x.shape[-2:])} not divisible by {factor}")
        skips = []
        for enc in self.encoders:
            x = enc(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for up, dec, skip in zip(self.upsamples, self.decoders, reversed(skips)):
            x = up(x)
            x = dec(torch.cat([skip, x], dim=1))
        return self.head(x)

    def probabilities(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.forward(x))


def build_model(config: SegmentationConfig | None = None, seed: int = 0) -> UNet:
    """Same (config, seed) always yields identical initial weights."""
    torch.manual_seed(seed)
    return UNet(config)


def predict(
    model: UNet, image: ImageBuffer, threshold: float = 0.5
) -> tuple[BinaryMask, np.ndarray]:
    """Segment one image: returns (thresholded mask, float32 probability map).

    threshold 0 marks every pixel foreground; 1 requires saturated confidence.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must be in [0, 1], got {threshold}")
    factor = 2**model.config.depth
    h, w = image.height, image.width
    pad_h = (-h) % factor
    pad_w = (-w) % factor
    x = torch.from_numpy(np.transpose(image.data, (2, 0, 1))).unsqueeze(0)
    if pad_h or pad_w:
        x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
    model.eval()
    with torch.no_grad():
        probs = model.probabilities(x)[0, 0, :h, :w].numpy()
    return BinaryMask((probs >= threshold).astype(np.uint8)), probs


def save_seg_checkpoint(model: UNet, path, epoch: int = 0, extra: dict | None = None):
    write_checkpoint(
        {
            "kind": "segmentation",
            "config": asdict(model.config),
            "epoch": int(epoch),
            "state": model.state_dict(),
            "extra": extra or {},
        },
        path,
    )


def load_seg_checkpoint(path, config: SegmentationConfig | None = None) -> tuple[UNet, int]:
    payload = read_checkpoint(path)
    if payload.get("kind") != "segmentation":
        raise ConfigError(f"{path}: not a segmentation checkpoint")
    stored = SegmentationConfig(**payload["config"])
    if config is not None and config != stored:
        raise ConfigError(f"{path}: checkpoint config {stored} does not match requested {config}")
    model = UNet(stored)
    model.load_state_dict(payload["state"])
    return model, int(payload["epoch"])
