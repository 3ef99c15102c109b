"""Generator and discriminator architectures for image translation.

The generator is a ResNet encoder/decoder: a 7x7 stem, two stride-2
downsampling convs, a stack of residual blocks at the bottleneck, and two
upsampling stages. Instance normalization throughout. When the output
carries a mask channel alongside RGB, the two groups get different output
activations: tanh for color, sigmoid for the mask.

The discriminator is a patch classifier: stacked 4x4 stride-2 convs that
map an input to a grid of realism scores rather than a single logit.
"""

from __future__ import annotations

import torch
from torch import nn


def weights_init(module: nn.Module) -> None:
    """Gaussian(0, 0.02) init for conv weights, zeros for biases."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)


class ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


class ResnetGenerator(nn.Module):
    """Encoder / residual bottleneck / decoder generator.

    `mask_channels` of the output are squashed with sigmoid into [0, 1];
    the rest use tanh into [-1, 1]. With mask_channels=0 this is a plain
    image-to-image generator.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        base_width: int = 64,
        n_blocks: int = 6,
        mask_channels: int = 0,
    ):
        super().__init__()
        if not 0 <= mask_channels <= out_channels:
            raise ValueError(f"mask_channels {mask_channels} outside [0, {out_channels}]")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.mask_channels = mask_channels
        w = base_width
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(in_channels, w, 7),
            nn.InstanceNorm2d(w),
            nn.ReLU(inplace=True),
        ]
        for _ in range(2):  # downsample
            layers += [
                nn.Conv2d(w, w * 2, 3, stride=2, padding=1),
                nn.InstanceNorm2d(w * 2),
                nn.ReLU(inplace=True),
            ]
            w *= 2
        layers += [ResidualBlock(w) for _ in range(n_blocks)]
        for _ in range(2):  # upsample
            layers += [
                nn.Upsample(scale_factor=2, mode="nearest"),
                nn.Conv2d(w, w // 2, 3, padding=1),
                nn.InstanceNorm2d(w // 2),
                nn.ReLU(inplace=True),
            ]
            w //= 2
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(w, out_channels, 7)]
        self.net = nn.Sequential(*layers)
        self.apply(weights_init)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        raw = self.net(x)
        if self.mask_channels == 0:
            return torch.tanh(raw)
        split = self.out_channels - self.mask_channels
        return torch.cat([torch.tanh(raw[:, :split]), torch.sigmoid(raw[:, split:])], dim=1)


class PatchDiscriminator(nn.Module):
    """Maps (N, C, H, W) to a grid of per-patch realism scores."""

    def __init__(self, in_channels: int, base_width: int = 64, n_layers: int = 3):
        super().__init__()
        w = base_width
        layers: list[nn.Module] = [
            nn.Conv2d(in_channels, w, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        for _ in range(n_layers - 1):
            layers += [
                nn.Conv2d(w, w * 2, 4, stride=2, padding=1),
                nn.InstanceNorm2d(w * 2),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            w *= 2
        layers += [nn.Conv2d(w, 1, 4, stride=1, padding=1)]
        self.net = nn.Sequential(*layers)
        self.apply(weights_init)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)
