"""The seven pipeline stages behind the CLI.

Each stage owns one directory under the workdir, checks its
prerequisites with errors that name the missing artifact and the stage
that makes it, and finishes by writing a run record. A stage whose
record matches the current config hash returns its existing outputs
untouched.

    synth      -> workdir/synth/          images, masks, manifest.jsonl
    train-gan  -> workdir/gan/            model.ckpt, telemetry.csv
    translate  -> workdir/translated/     images, masks, manifest.jsonl
    train-seg  -> workdir/seg/            model.ckpt, history.csv
    curate     -> workdir/curation/       candidate store
    finetune   -> workdir/finetuned/      model.ckpt, history.csv
    eval       -> workdir/eval/           report.json
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch

from .. import metrics
from ..curation.candidates import generate_candidates
from ..curation.export import export_curated
from ..curation.store import CurationStore
from ..errors import ConfigError, DataError
from ..imaging import (
    BinaryMask,
    ImageBuffer,
    MaskedSample,
    extract_frames,
    load_image,
    load_mask,
    save_image,
)
from ..manifest import DatasetManifest, load_manifest, split_manifest
from ..segmentation.training import SegTrainConfig, fine_tune, train
from ..segmentation.unet import SegmentationConfig, build_model, load_seg_checkpoint, save_seg_checkpoint
from ..synthesis import SynthesisParams, extract_cutouts, synthesize_dataset
from ..translation.model import (
    TranslationConfig,
    TranslationModel,
    image_to_tensor,
    load_checkpoint,
    mask_to_tensor,
    save_checkpoint,
)
from ..translation.training import TrainerConfig, TranslationTrainer
from ..translation.translate import translate_dataset
from .config import PipelineConfig
from .runrecord import stage_complete, write_record

log = logging.getLogger(__name__)


def _section_params(cfg: PipelineConfig, name: str, allowed: dict):
    """Pull a config section, rejecting unknown keys, applying defaults."""
    section = cfg.section(name)
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    out = dict(allowed)
    out.update(section)
    return out


def _require_artifact(path: Path, producer: str) -> Path:
    if not path.exists():
        raise DataError(f"missing prerequisite {path}; run the '{producer}' stage first")
    return path


def _materialize_video(video: Path, stride: int, out_dir: Path) -> Path:
    """Extract frames to PNGs once; an already-populated directory is reused."""
    if out_dir.is_dir() and any(out_dir.glob("*.png")):
        return out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for i, frame in enumerate(extract_frames(video, stride)):
        save_image(frame, out_dir / f"frame_{i:05d}.png")
        count += 1
    log.info("extracted %d frames from %s into %s", count, video, out_dir)
    return out_dir


def _frames_dir(cfg: PipelineConfig, role: str) -> Path:
    """Directory of frames for `role` (backgrounds|real): a dir or a video."""
    explicit = cfg.optional_path(f"inputs.{role}_dir")
    if explicit is not None:
        return explicit
    video = cfg.optional_path(f"inputs.{role}_video")
    if video is None:
        raise ConfigError(f"config needs inputs.{role}_dir or inputs.{role}_video")
    stride = int(cfg.get(f"inputs.{role}_stride", 1))
    return _materialize_video(video, stride, cfg.workdir / "frames" / role)


def _frame_paths(frames_dir: Path) -> list[Path]:
    paths = sorted(
        p for pattern in ("*.png", "*.jpg", "*.jpeg") for p in frames_dir.glob(pattern)
    )
    if not paths:
        raise DataError(f"no frames found under {frames_dir}")
    return paths


def _annotated_sample(cfg: PipelineConfig) -> tuple[MaskedSample, Path, Path]:
    """The single annotated frame: (sample, image path, mask path)."""
    mask_path = cfg.input_path("inputs.annotated_mask")
    image_path = cfg.optional_path("inputs.annotated_image")
    if image_path is None:
        video = cfg.optional_path("inputs.annotated_video")
        if video is None:
            raise ConfigError("config needs inputs.annotated_image or inputs.annotated_video")
        index = int(cfg.get("inputs.annotated_frame_index", 0))
        image_path = cfg.workdir / "frames" / "annotated.png"
        if not image_path.exists():
            for i, frame in enumerate(extract_frames(video)):
                if i == index:
                    image_path.parent.mkdir(parents=True, exist_ok=True)
                    save_image(frame, image_path)
                    break
            else:
                raise DataError(f"video {video} has no frame {index}")
    sample = MaskedSample(
        image=load_image(image_path), mask=load_mask(mask_path), source_id=image_path.stem
    )
    return sample, image_path, mask_path


def cmd_synth(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "synth"
    manifest_path = stage_dir / "manifest.jsonl"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("synth already complete, skipping")
        return manifest_path
    annotated, image_path, mask_path = _annotated_sample(cfg)
    library = extract_cutouts(annotated)
    backgrounds = _frame_paths(_frames_dir(cfg, "backgrounds"))
    knobs = _section_params(
        cfg,
        "synthesis",
        {
            "count": None,
            "output_size": 256,
            "heads_min": 20,
            "heads_max": 60,
            "scale_min": 0.7,
            "scale_max": 1.3,
            "rotation_deg": 180.0,
            "allow_flip": True,
        },
    )
    count = knobs.pop("count")
    if count is None:
        raise ConfigError("config is missing required key 'synthesis.count'")
    try:
        params = SynthesisParams(seed=cfg.stage_seed("synth"), **knobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    synthesize_dataset(backgrounds, library, params, int(count), stage_dir)
    write_record(
        stage_dir,
        "synth",
        cfg.config_hash(),
        cfg.stage_seed("synth"),
        inputs={"annotated_image": image_path, "annotated_mask": mask_path},
        outputs=[str(manifest_path)],
    )
    return manifest_path


def _random_crop(rng: np.random.Generator, arr: np.ndarray, size: int) -> tuple[int, int]:
    h, w = arr.shape[:2]
    if h < size or w < size:
        raise DataError(f"frame {h}x{w} smaller than training crop {size}")
    return int(rng.integers(0, h - size + 1)), int(rng.integers(0, w - size + 1))


def cmd_train_gan(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "gan"
    ckpt_path = stage_dir / "model.ckpt"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("train-gan already complete, skipping")
        return ckpt_path
    manifest_path = _require_artifact(cfg.workdir / "synth" / "manifest.jsonl", "synth")
    manifest = load_manifest(manifest_path, split="train")
    real_paths = _frame_paths(_frames_dir(cfg, "real"))
    knobs = _section_params(
        cfg,
        "translation",
        {
            "steps": None,
            "batch_size": 2,
            "crop_size": 64,
            "base_width": 32,
            "n_blocks": 4,
            "disc_width": 32,
            "disc_layers": 3,
            "lr": 2e-4,
            "lambda_adv": 1.0,
            "lambda_cycle_image": 10.0,
            "lambda_cycle_mask": 10.0,
            "buffer_size": 50,
        },
    )
    steps = knobs.pop("steps")
    if steps is None:
        raise ConfigError("config is missing required key 'translation.steps'")
    steps = int(steps)
    seed = cfg.stage_seed("train-gan")
    model = TranslationModel(
        TranslationConfig(
            base_width=int(knobs["base_width"]),
            n_blocks=int(knobs["n_blocks"]),
            disc_width=int(knobs["disc_width"]),
            disc_layers=int(knobs["disc_layers"]),
        ),
        seed=seed,
    )
    trainer = TranslationTrainer(
        model,
        TrainerConfig(
            lr=float(knobs["lr"]),
            lambda_adv=float(knobs["lambda_adv"]),
            lambda_cycle_image=float(knobs["lambda_cycle_image"]),
            lambda_cycle_mask=float(knobs["lambda_cycle_mask"]),
            buffer_size=int(knobs["buffer_size"]),
            total_steps=steps,
            seed=seed,
        ),
        telemetry_path=stage_dir / "telemetry.csv",
    )
    batch_size = int(knobs["batch_size"])
    crop = int(knobs["crop_size"])
    rng = np.random.default_rng(seed)
    cache: dict[str, object] = {}

    def cached(loader, path):
        key = str(path)
        if key not in cache:
            cache[key] = loader(path)
        return cache[key]

    def make_batch():
        s_imgs, s_masks, r_imgs = [], [], []
        for _ in range(batch_size):
            entry = manifest.entries[int(rng.integers(0, len(manifest.entries)))]
            image = cached(load_image, manifest.image_path(entry))
            mask = cached(load_mask, manifest.mask_path(entry))
            top, left = _random_crop(rng, image.data, crop)
            s_imgs.append(
                image_to_tensor(ImageBuffer(image.data[top : top + crop, left : left + crop]))
            )
            s_masks.append(
                mask_to_tensor(BinaryMask(mask.data[top : top + crop, left : left + crop]))
            )
            real = cached(load_image, real_paths[int(rng.integers(0, len(real_paths)))])
            top, left = _random_crop(rng, real.data, crop)
            r_imgs.append(
                image_to_tensor(ImageBuffer(real.data[top : top + crop, left : left + crop]))
            )
        return torch.cat(s_imgs), torch.cat(s_masks), torch.cat(r_imgs)

    trainer.fit(make_batch, steps)
    save_checkpoint(
        model,
        ckpt_path,
        step=trainer.step_count,
        extra={
            "loss_weights": {
                "lambda_adv": float(knobs["lambda_adv"]),
                "lambda_cycle_image": float(knobs["lambda_cycle_image"]),
                "lambda_cycle_mask": float(knobs["lambda_cycle_mask"]),
            }
        },
    )
    write_record(
        stage_dir,
        "train-gan",
        cfg.config_hash(),
        seed,
        inputs={"synth_manifest": manifest_path},
        outputs=[str(ckpt_path), str(stage_dir / "telemetry.csv")],
    )
    return ckpt_path


def cmd_translate(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "translated"
    manifest_path = stage_dir / "manifest.jsonl"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("translate already complete, skipping")
        return manifest_path
    ckpt_path = _require_artifact(cfg.workdir / "gan" / "model.ckpt", "train-gan")
    synth_manifest_path = _require_artifact(cfg.workdir / "synth" / "manifest.jsonl", "synth")
    model, _ = load_checkpoint(ckpt_path)
    manifest = load_manifest(synth_manifest_path, split="train")
    translate_dataset(model, manifest, stage_dir)
    write_record(
        stage_dir,
        "translate",
        cfg.config_hash(),
        cfg.stage_seed("translate"),
        inputs={"gan_checkpoint": ckpt_path, "synth_manifest": synth_manifest_path},
        outputs=[str(manifest_path)],
    )
    return manifest_path


def _seg_knobs(cfg: PipelineConfig, section: str, defaults: dict) -> dict:
    return _section_params(cfg, section, defaults)


def cmd_train_seg(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "seg"
    ckpt_path = stage_dir / "model.ckpt"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("train-seg already complete, skipping")
        return ckpt_path
    manifest_path = _require_artifact(
        cfg.workdir / "translated" / "manifest.jsonl", "translate"
    )
    manifest = load_manifest(manifest_path, split="train")
    knobs = _seg_knobs(
        cfg,
        "segmentation",
        {
            "depth": 4,
            "base_width": 32,
            "epochs": 20,
            "batch_size": 4,
            "lr": 1e-3,
            "threshold": 0.5,
            "val_count": 0,
        },
    )
    seed = cfg.stage_seed("train-seg")
    model = build_model(
        SegmentationConfig(depth=int(knobs["depth"]), base_width=int(knobs["base_width"])),
        seed=seed,
    )
    val_count = int(knobs["val_count"])
    train_m, val_m = (manifest, None)
    if val_count:
        train_m, val_m = split_manifest(manifest, val_count)
    result = train(
        model,
        train_m,
        val_m,
        SegTrainConfig(
            epochs=int(knobs["epochs"]),
            batch_size=int(knobs["batch_size"]),
            lr=float(knobs["lr"]),
            threshold=float(knobs["threshold"]),
            seed=seed,
        ),
        history_path=stage_dir / "history.csv",
    )
    save_seg_checkpoint(result.model, ckpt_path, epoch=result.best_epoch)
    write_record(
        stage_dir,
        "train-seg",
        cfg.config_hash(),
        seed,
        inputs={"translated_manifest": manifest_path},
        outputs=[str(ckpt_path), str(stage_dir / "history.csv")],
    )
    return ckpt_path


def cmd_curate(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "curation"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("curate already complete, skipping")
        return stage_dir
    ckpt_path = _require_artifact(cfg.workdir / "seg" / "model.ckpt", "train-seg")
    frames_dir = _frames_dir(cfg, "real")
    knobs = _section_params(cfg, "curation", {"sample_count": None, "threshold": 0.5})
    sample_count = knobs["sample_count"]
    if sample_count is None:
        raise ConfigError("config is missing required key 'curation.sample_count'")
    model, _ = load_seg_checkpoint(ckpt_path)
    store = CurationStore(stage_dir)
    if store.candidates():
        raise DataError(
            f"curation store {stage_dir} already has candidates from another config; "
            "point the pipeline at a fresh workdir or remove the store"
        )
    generate_candidates(
        model,
        frames_dir,
        store,
        int(sample_count),
        seed=cfg.stage_seed("curate"),
        threshold=float(knobs["threshold"]),
        model_tag=f"seg-{cfg.config_hash()}",
    )
    write_record(
        stage_dir,
        "curate",
        cfg.config_hash(),
        cfg.stage_seed("curate"),
        inputs={"seg_checkpoint": ckpt_path},
        outputs=[str(store.candidates_path)],
    )
    return stage_dir


def _curated_manifest(cfg: PipelineConfig) -> Path:
    """The pseudo-label dataset: an existing export, or export accepted now."""
    curated_path = cfg.workdir / "curated" / "manifest.jsonl"
    if curated_path.exists():
        return curated_path
    store_dir = cfg.workdir / "curation"
    if not (store_dir / "candidates.jsonl").exists():
        raise DataError(
            f"missing prerequisite {store_dir / 'candidates.jsonl'}; run the 'curate' stage first"
        )
    store = CurationStore(store_dir)
    if not store.accepted():
        raise DataError(
            "no accepted candidates to fine-tune on; review candidates "
            "(POST /candidates/{id}/decision) before running finetune"
        )
    export_curated(store, cfg.workdir / "curated")
    return curated_path


def cmd_finetune(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "finetuned"
    ckpt_path = stage_dir / "model.ckpt"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("finetune already complete, skipping")
        return ckpt_path
    seg_ckpt = _require_artifact(cfg.workdir / "seg" / "model.ckpt", "train-seg")
    curated_path = _curated_manifest(cfg)
    manifest = load_manifest(curated_path, split="pseudo-label")
    knobs = _seg_knobs(
        cfg,
        "finetune",
        {"epochs": 10, "batch_size": 4, "lr": 1e-4, "threshold": 0.5},
    )
    model, start_epoch = load_seg_checkpoint(seg_ckpt)
    seed = cfg.stage_seed("finetune")
    result = fine_tune(
        model,
        manifest,
        config=SegTrainConfig(
            epochs=int(knobs["epochs"]),
            batch_size=int(knobs["batch_size"]),
            lr=float(knobs["lr"]),
            threshold=float(knobs["threshold"]),
            seed=seed,
        ),
        history_path=stage_dir / "history.csv",
        start_epoch=start_epoch + 1,
    )
    save_seg_checkpoint(result.model, ckpt_path, epoch=start_epoch + 1 + int(knobs["epochs"]))
    write_record(
        stage_dir,
        "finetune",
        cfg.config_hash(),
        seed,
        inputs={"seg_checkpoint": seg_ckpt, "curated_manifest": curated_path},
        outputs=[str(ckpt_path), str(stage_dir / "history.csv")],
    )
    return ckpt_path


def cmd_eval(cfg: PipelineConfig) -> Path:
    stage_dir = cfg.workdir / "eval"
    report_path = stage_dir / "report.json"
    if stage_complete(stage_dir, cfg.config_hash()):
        log.info("eval already complete, skipping")
        return report_path
    knobs = _section_params(
        cfg,
        "eval",
        {"manifest": None, "threshold": 0.5, "dataset_tag": "eval", "use": "auto"},
    )
    if knobs["manifest"] is None:
        raise ConfigError("config is missing required key 'eval.manifest'")
    eval_manifest_path = cfg.input_path("eval.manifest")
    use = str(knobs["use"])
    if use not in ("auto", "seg", "finetune"):
        raise ConfigError(f"eval.use must be auto|seg|finetune, got {use!r}")
    finetuned = cfg.workdir / "finetuned" / "model.ckpt"
    if use == "seg":
        ckpt_path, model_tag = cfg.workdir / "seg" / "model.ckpt", "seg"
    elif use == "finetune":
        ckpt_path, model_tag = finetuned, "finetuned"
    elif finetuned.exists():
        ckpt_path, model_tag = finetuned, "finetuned"
    else:
        ckpt_path, model_tag = cfg.workdir / "seg" / "model.ckpt", "seg"
    _require_artifact(ckpt_path, "train-seg" if model_tag == "seg" else "finetune")
    model, _ = load_seg_checkpoint(ckpt_path)
    manifest = load_manifest(eval_manifest_path, split="test")
    report = metrics.evaluate(
        model,
        manifest,
        threshold=float(knobs["threshold"]),
        model_tag=model_tag,
        dataset_tag=str(knobs["dataset_tag"]),
    )
    report.save(report_path)
    write_record(
        stage_dir,
        "eval",
        cfg.config_hash(),
        cfg.stage_seed("eval"),
        inputs={"checkpoint": ckpt_path, "eval_manifest": eval_manifest_path},
        outputs=[str(report_path)],
    )
    return report_path


STAGE_FUNCS = {
    "synth": cmd_synth,
    "train-gan": cmd_train_gan,
    "translate": cmd_translate,
    "train-seg": cmd_train_seg,
    "curate": cmd_curate,
    "finetune": cmd_finetune,
    "eval": cmd_eval,
}
