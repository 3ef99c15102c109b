from .losses import adversarial_loss, cycle_loss
from .model import TranslationConfig, TranslationModel, load_checkpoint, save_checkpoint
from .networks import PatchDiscriminator, ResnetGenerator
from .training import LossReport, TranslationTrainer
from .translate import translate_dataset

__all__ = [
    "adversarial_loss",
    "cycle_loss",
    "TranslationConfig",
    "TranslationModel",
    "load_checkpoint",
    "save_checkpoint",
    "PatchDiscriminator",
    "ResnetGenerator",
    "LossReport",
    "TranslationTrainer",
    "translate_dataset",
]
