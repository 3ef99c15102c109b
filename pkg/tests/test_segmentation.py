import math

import numpy as np
import pytest
import torch
from torch import nn

from toyworld import toy_scene, write_labeled_dir
from wheatseg.errors import ConfigError, DataError, TrainingError
from wheatseg.imaging import ImageBuffer
from wheatseg.manifest import DatasetManifest
from wheatseg.metrics import dice
from wheatseg.segmentation.training import SegTrainConfig, bce_loss, fine_tune, train
from wheatseg.segmentation.unet import (
    SegmentationConfig,
    UNet,
    build_model,
    load_seg_checkpoint,
    predict,
    save_seg_checkpoint,
)
from wheatseg.translation.model import TranslationConfig, TranslationModel
from wheatseg.translation.model import save_checkpoint as save_translation_checkpoint

SMALL = SegmentationConfig(depth=2, base_width=8)


def labeled_dir(tmp_path, rng, count, size=32, name="data"):
    samples = [toy_scene(rng, size, size) for _ in range(count)]
    return write_labeled_dir(samples, tmp_path / name)


class TestModelContract:
    def test_probabilities_shape_and_range(self):
        model = build_model(SMALL, seed=0)
        probs = model.probabilities(torch.rand(2, 3, 32, 32))
        assert probs.shape == (2, 1, 32, 32)
        assert probs.min() >= 0.0 and probs.max() <= 1.0

    def test_same_seed_same_weights(self):
        a = build_model(SMALL, seed=7)
        b = build_model(SMALL, seed=7)
        for key, value in a.state_dict().items():
            assert torch.equal(value, b.state_dict()[key])

    def test_different_seed_differs(self):
        a = build_model(SMALL, seed=0)
        b = build_model(SMALL, seed=1)
        assert any(
            not torch.equal(v, b.state_dict()[k]) for k, v in a.state_dict().items()
        )

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SegmentationConfig(depth=0)
        with pytest.raises(ConfigError):
            SegmentationConfig(depth=7)
        with pytest.raises(ConfigError):
            SegmentationConfig(base_width=0)

    def test_forward_rejects_indivisible_sides(self):
        model = build_model(SMALL)
        with pytest.raises(ValueError):
            model(torch.rand(1, 3, 30, 32))

    def test_normalization_carries_no_running_stats(self):
        model = build_model(SegmentationConfig())
        assert not any(isinstance(m, nn.BatchNorm2d) for m in model.modules())
        assert len(list(model.buffers())) == 0


class TestBceLoss:
    def test_uniform_half_is_log_two(self):
        probs = torch.full((1, 1, 4, 4), 0.5)
        targets = (torch.rand(1, 1, 4, 4) < 0.5).float()
        assert float(bce_loss(probs, targets)) == pytest.approx(math.log(2.0), rel=1e-6)

    def test_perfect_prediction_is_bounded_by_clamp(self):
        targets = torch.tensor([[[[0.0, 1.0], [1.0, 0.0]]]])
        loss = float(bce_loss(targets.clone(), targets))
        bound = -math.log(float(np.float32(1.0) - np.float32(1e-7)))
        assert 0.0 < loss <= bound + 1e-12

    def test_confident_miss_is_clamped_finite(self):
        probs = torch.zeros(1, 1, 2, 2)
        targets = torch.ones(1, 1, 2, 2)
        loss = float(bce_loss(probs, targets))
        assert loss == pytest.approx(-math.log(1e-7), rel=1e-6)

    def test_non_finite_probs_rejected(self):
        probs = torch.tensor([[[[float("nan")]]]])
        with pytest.raises(TrainingError):
            bce_loss(probs, torch.zeros(1, 1, 1, 1))

    def test_gradient_matches_finite_differences(self):
        torch.manual_seed(1)
        model = UNet(SegmentationConfig(depth=1, base_width=2)).double()
        x = torch.rand(1, 3, 8, 8, dtype=torch.float64)
        y = (torch.rand(1, 1, 8, 8, dtype=torch.float64) < 0.5).double()

        def loss_fn():
            return bce_loss(torch.sigmoid(model(x)), y)

        loss_fn().backward()
        checked = 0
        for p in model.parameters():
            flat, grad = p.view(-1), p.grad.view(-1)
            idx = flat.numel() // 2
            eps = 1e-6
            with torch.no_grad():
                orig = float(flat[idx])
                flat[idx] = orig + eps
                up = float(loss_fn())
                flat[idx] = orig - eps
                down = float(loss_fn())
                flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            analytic = float(grad[idx])
            assert abs(numeric - analytic) <= 1e-3 * max(abs(numeric), abs(analytic)) + 1e-8
            checked += 1
            if checked >= 6:
                break
        assert checked >= 4


class TestPredict:
    def test_threshold_zero_marks_everything(self, rng):
        model = build_model(SMALL)
        image = ImageBuffer(rng.random((32, 32, 3), dtype=np.float32))
        mask, probs = predict(model, image, threshold=0.0)
        assert mask.data.all()
        assert probs.shape == (32, 32) and probs.dtype == np.float32

    def test_threshold_bounds_enforced(self, rng):
        model = build_model(SMALL)
        image = ImageBuffer(rng.random((32, 32, 3), dtype=np.float32))
        for bad in (-0.1, 1.1):
            with pytest.raises(ConfigError):
                predict(model, image, threshold=bad)

    def test_mask_agrees_with_probability_map(self, rng):
        model = build_model(SMALL)
        image = ImageBuffer(rng.random((32, 32, 3), dtype=np.float32))
        mask, probs = predict(model, image, threshold=0.5)
        assert np.array_equal(mask.data, (probs >= 0.5).astype(np.uint8))

    def test_padding_matches_explicit_reflect_pad(self, rng):
        model = build_model(SegmentationConfig(depth=4, base_width=4), seed=2)
        data = rng.random((250, 250, 3), dtype=np.float32)
        _, probs = predict(model, ImageBuffer(data))
        x = torch.from_numpy(np.transpose(data, (2, 0, 1))).unsqueeze(0)
        x = torch.nn.functional.pad(x, (0, 6, 0, 6), mode="reflect")
        model.eval()
        with torch.no_grad():
            direct = model.probabilities(x)[0, 0, :250, :250].numpy()
        assert probs.shape == (250, 250)
        assert np.array_equal(probs, direct)


class TestTraining:
    def test_loss_decreases_on_toy_data(self, tmp_path, rng):
        manifest = labeled_dir(tmp_path, rng, 3)
        model = build_model(SMALL, seed=0)
        result = train(
            model, manifest, config=SegTrainConfig(epochs=8, batch_size=2, lr=5e-3, seed=0)
        )
        assert len(result.history) == 8
        assert result.history[-1]["train_bce"] < result.history[0]["train_bce"]

    def test_zero_lr_leaves_state_bit_unchanged(self, tmp_path, rng):
        manifest = labeled_dir(tmp_path, rng, 2)
        model = build_model(SMALL, seed=0)
        before = {k: v.clone() for k, v in model.state_dict().items()}
        train(model, manifest, config=SegTrainConfig(epochs=2, lr=0.0, seed=0))
        for key, value in model.state_dict().items():
            assert torch.equal(value, before[key]), f"{key} changed under lr=0"

    def test_best_epoch_restored(self, tmp_path, rng):
        train_m = labeled_dir(tmp_path, rng, 3, name="train")
        val_m = labeled_dir(tmp_path, rng, 2, name="val")
        model = build_model(SMALL, seed=0)
        config = SegTrainConfig(epochs=5, batch_size=2, lr=5e-3, seed=0)
        result = train(model, train_m, val_m, config)
        val_curve = [row["val_dice"] for row in result.history]
        assert result.best_val_dice == max(val_curve)
        assert result.history[result.best_epoch]["val_dice"] == result.best_val_dice
        assert result.best_val_dice >= val_curve[-1]
        redone = []
        for entry in val_m.entries:
            from wheatseg.imaging import load_image, load_mask

            pred, _ = predict(model, load_image(val_m.image_path(entry)), config.threshold)
            redone.append(dice(pred, load_mask(val_m.mask_path(entry))))
        assert float(np.mean(redone)) == pytest.approx(result.best_val_dice, abs=1e-12)

    def test_history_csv(self, tmp_path, rng):
        manifest = labeled_dir(tmp_path, rng, 2)
        model = build_model(SMALL, seed=0)
        path = tmp_path / "history.csv"
        train(model, manifest, config=SegTrainConfig(epochs=2, seed=0), history_path=path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_bce,val_dice,val_iou"
        assert len(lines) == 3

    def test_fine_tune_continues_epoch_numbering(self, tmp_path, rng):
        manifest = labeled_dir(tmp_path, rng, 2)
        model = build_model(SMALL, seed=0)
        result = fine_tune(
            model, manifest, config=SegTrainConfig(epochs=2, seed=0), start_epoch=5
        )
        assert [row["epoch"] for row in result.history] == [5.0, 6.0]

    def test_empty_manifest_rejected(self, tmp_path):
        empty = DatasetManifest(entries=[], split="train", root=tmp_path)
        model = build_model(SMALL, seed=0)
        with pytest.raises(DataError):
            train(model, empty, config=SegTrainConfig(epochs=1))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SegTrainConfig(epochs=0)
        with pytest.raises(ConfigError):
            SegTrainConfig(batch_size=0)


class TestSegCheckpoints:
    def test_round_trip_bit_exact(self, tmp_path):
        model = build_model(SMALL, seed=4)
        save_seg_checkpoint(model, tmp_path / "m.ckpt", epoch=9)
        loaded, epoch = load_seg_checkpoint(tmp_path / "m.ckpt")
        assert epoch == 9
        for key, value in model.state_dict().items():
            assert torch.equal(value, loaded.state_dict()[key])

    def test_config_mismatch_rejected(self, tmp_path):
        save_seg_checkpoint(build_model(SMALL), tmp_path / "m.ckpt")
        with pytest.raises(ConfigError):
            load_seg_checkpoint(tmp_path / "m.ckpt", config=SegmentationConfig(depth=3))

    def test_wrong_kind_rejected(self, tmp_path):
        other = TranslationModel(
            TranslationConfig(base_width=8, n_blocks=1, disc_width=8, disc_layers=2), seed=0
        )
        save_translation_checkpoint(other, tmp_path / "t.ckpt")
        with pytest.raises(ConfigError):
            load_seg_checkpoint(tmp_path / "t.ckpt")
