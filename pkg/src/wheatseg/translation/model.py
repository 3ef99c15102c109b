"""The four-network translation model and its checkpoint format.

Domain S is synthetic: an RGB image plus its binary mask. Domain R is
real: RGB only. Four networks cooperate:

  g_s2r : (image, mask) -> realistic image
  g_r2s : image -> (synthetic-looking image, soft mask)
  d_s   : judges (image, mask) pairs
  d_r   : judges images

Images live in [-1, 1] inside the networks; masks are carried as an
extra channel rescaled from [0, 1] to [-1, 1] on the way in, while
g_r2s emits its mask channel directly in [0, 1].

Checkpoints use the digest-guarded container from `wheatseg.checkpoint`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch

from ..checkpoint import read_checkpoint, write_checkpoint
from ..errors import ConfigError, ShapeError
from ..imaging import BinaryMask, ImageBuffer
from .networks import PatchDiscriminator, ResnetGenerator

IMAGE_CHANNELS = 3
PAIR_CHANNELS = 4  # image + mask


@dataclass(frozen=True)
class TranslationConfig:
    base_width: int = 64
    n_blocks: int = 6
    disc_width: int = 64
    disc_layers: int = 3

    def __post_init__(self):
        for name in ("base_width", "n_blocks", "disc_width", "disc_layers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")


def image_to_tensor(image: ImageBuffer) -> torch.Tensor:
    """HxWx3 in [0,1] -> 1x3xHxW in [-1,1]."""
    arr = np.transpose(image.data, (2, 0, 1))
    return torch.from_numpy(arr).unsqueeze(0) * 2.0 - 1.0


def mask_to_tensor(mask: BinaryMask) -> torch.Tensor:
    """HxW {0,1} -> 1x1xHxW in [0,1] float."""
    return torch.from_numpy(mask.data.astype(np.float32)).unsqueeze(0).unsqueeze(0)


def tensor_to_image(t: torch.Tensor) -> ImageBuffer:
    """1x3xHxW in [-1,1] -> ImageBuffer, clamped."""
    arr = t.detach().squeeze(0).permute(1, 2, 0).clamp(-1.0, 1.0).numpy()
    return ImageBuffer((arr + 1.0) / 2.0)

def tensor_to_mask(t: torch.Tensor, threshold: float = 0.5) -> BinaryMask:
    """1x1xHxW in [0,1] -> BinaryMask via threshold."""
    arr = t.detach().squeeze(0).squeeze(0).numpy()
    return BinaryMask((arr >= threshold).astype(np.uint8))


class TranslationModel:
    def __init__(self, config: TranslationConfig | None = None, seed: int = 0):
        self.config = config or TranslationConfig()
        torch.manual_seed(seed)
        c = self.config
        self.g_s2r = ResnetGenerator(PAIR_CHANNELS, IMAGE_CHANNELS, c.base_width, c.n_blocks)
        self.g_r2s = ResnetGenerator(
            IMAGE_CHANNELS, PAIR_CHANNELS, c.base_width, c.n_blocks, mask_channels=1
        )
        self.d_s = PatchDiscriminator(PAIR_CHANNELS, c.disc_width, c.disc_layers)
        self.d_r = PatchDiscriminator(IMAGE_CHANNELS, c.disc_width, c.disc_layers)

    def networks(self) -> dict[str, torch.nn.Module]:
        return {"g_s2r": self.g_s2r, "g_r2s": self.g_r2s, "d_s": self.d_s, "d_r": self.d_r}

    def train(self):
        for net in self.networks().values():
            net.train()

    def eval(self):
        for net in self.networks().values():
            net.eval()

    @staticmethod
    def pack_pair(image: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Concat an image batch with a mask batch, mask rescaled to [-1,1]."""
        if image.ndim != 4 or image.shape[1] != IMAGE_CHANNELS:
            raise ShapeError(f"expected Nx{IMAGE_CHANNELS}xHxW image, got {tuple(image.shape)}")
        if mask.ndim != 4 or mask.shape[1] != 1:
            raise ShapeError(f"expected Nx1xHxW mask, got {tuple(mask.shape)}")
        if image.shape[0] != mask.shape[0] or image.shape[2:] != mask.shape[2:]:
            raise ShapeError(
                f"image {tuple(image.shape)} and mask {tuple(mask.shape)} do not align"
            )
        return torch.cat([image, mask * 2.0 - 1.0], dim=1)

    def forward_s2r(self, image: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Translate a synthetic (image, mask) pair into a realistic image."""
        return self.g_s2r(self.pack_pair(image, mask))

    def forward_r2s(self, image: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Translate a real image into a synthetic-looking image plus soft mask."""
        if image.ndim != 4 or image.shape[1] != IMAGE_CHANNELS:
            raise ShapeError(f"expected Nx{IMAGE_CHANNELS}xHxW image, got {tuple(image.shape)}")
        out = self.g_r2s(image)
        return out[:, :IMAGE_CHANNELS], out[:, IMAGE_CHANNELS:]

    def translate_sample(self, image: ImageBuffer, mask: BinaryMask) -> ImageBuffer:
        """Convenience single-sample path used by the dataset translator."""
        self.g_s2r.eval()
        with torch.no_grad():
            out = self.forward_s2r(image_to_tensor(image), mask_to_tensor(mask))
        return tensor_to_image(out)


def save_checkpoint(model: TranslationModel, path, step: int = 0, extra: dict | None = None):
    payload = {
        "kind": "translation",
        "config": asdict(model.config),
        "step": int(step),
        "state": {name: net.state_dict() for name, net in model.networks().items()},
        "extra": extra or {},
    }
    write_checkpoint(payload, path)


def load_checkpoint(path, config: TranslationConfig | None = None) -> tuple[TranslationModel, int]:
    """Rebuild a TranslationModel from a checkpoint; returns (model, step).

    If `config` is given it must match the stored one exactly.
    """
    payload = read_checkpoint(path)
    if payload.get("kind") != "translation":
        raise ConfigError(f"{path}: not a translation checkpoint")
    stored = TranslationConfig(**payload["config"])
    if config is not None and config != stored:
        raise ConfigError(f"{path}: checkpoint config {stored} does not match requested {config}")
    model = TranslationModel(stored)
    for name, net in model.networks().items():
        net.load_state_dict(payload["state"][name])
    return model, int(payload["step"])
