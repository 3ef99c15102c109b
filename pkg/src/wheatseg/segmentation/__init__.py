from .training import SegTrainConfig, SegTrainResult, bce_loss, fine_tune, train
from .unet import (
    SegmentationConfig,
    UNet,
    build_model,
    load_seg_checkpoint,
    predict,
    save_seg_checkpoint,
)

__all__ = [
    "SegTrainConfig",
    "SegTrainResult",
    "bce_loss",
    "fine_tune",
    "train",
    "SegmentationConfig",
    "UNet",
    "build_model",
    "load_seg_checkpoint",
    "predict",
    "save_seg_checkpoint",
]
