"""Adversarial training loop for the translation model.

Each step updates the two generators jointly (adversarial terms plus both
cycle reconstructions), then each discriminator against a history buffer
of past fakes. Learning rates hold steady for the first half of training
and decay linearly to zero over the second half.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
import torch

from ..errors import TrainingError
from .losses import adversarial_loss, cycle_loss
from .model import TranslationModel


@dataclass(frozen=True)
class TrainerConfig:
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    lambda_adv: float = 1.0
    lambda_cycle_image: float = 10.0
    lambda_cycle_mask: float = 10.0
    buffer_size: int = 50
    total_steps: int = 200
    seed: int = 0


class HistoryBuffer:
    """Pool of past generator outputs used to steady discriminator training.

    Until full, every query stores and returns the new fake. Once full,
    half the time the new fake passes through, half the time it swaps
    with a random stored one and the old tensor is returned.
    """

    def __init__(self, capacity: int, rng: np.random.Generator):
        self.capacity = capacity
        self.rng = rng
        self.items: list[torch.Tensor] = []

    def query(self, fake: torch.Tensor) -> torch.Tensor:
        if self.capacity == 0:
            return fake
        out = []
        for sample in fake.detach():
            sample = sample.unsqueeze(0)
            if len(self.items) < self.capacity:
                self.items.append(sample)
                out.append(sample)
            elif self.rng.random() < 0.5:
                idx = int(self.rng.integers(0, self.capacity))
                out.append(self.items[idx])
                self.items[idx] = sample
            else:
                out.append(sample)
        return torch.cat(out, dim=0)


@dataclass
class LossReport:
    rows: list[dict[str, float]] = field(default_factory=list)

    def mean(self, key: str, start: int | None = None, stop: int | None = None) -> float:
        window = self.rows[start:stop]
        if not window:
            raise ValueError("empty window")
        return float(np.mean([row[key] for row in window]))

    def last(self) -> dict[str, float]:
        return self.rows[-1]


def _set_requires_grad(nets, flag: bool):
    for net in nets:
        for p in net.parameters():
            p.requires_grad_(flag)


class TranslationTrainer:
    def __init__(
        self,
        model: TranslationModel,
        config: TrainerConfig | None = None,
        telemetry_path=None,
    ):
        self.model = model
        self.config = config or TrainerConfig()
        c = self.config
        betas = (c.beta1, c.beta2)
        gen_params = list(model.g_s2r.parameters()) + list(model.g_r2s.parameters())
        self.opt_g = torch.optim.Adam(gen_params, lr=c.lr, betas=betas)
        self.opt_d_s = torch.optim.Adam(model.d_s.parameters(), lr=c.lr, betas=betas)
        self.opt_d_r = torch.optim.Adam(model.d_r.parameters(), lr=c.lr, betas=betas)
        rng = np.random.default_rng(c.seed)
        self.buffer_s = HistoryBuffer(c.buffer_size, rng)
        self.buffer_r = HistoryBuffer(c.buffer_size, rng)
        self.step_count = 0
        self.report = LossReport()
        self.telemetry_path = Path(telemetry_path) if telemetry_path else None
        self._telemetry_fh = None

    def lr_factor(self, step: int) -> float:
        """1.0 through the first half, then linear down to 0 at total_steps."""
        half = self.config.total_steps // 2
        if step < half or self.config.total_steps <= half:
            return 1.0
        return max(0.0, 1.0 - (step - half) / (self.config.total_steps - half))

    def _apply_lr(self):
        lr = self.config.lr * self.lr_factor(self.step_count)
        for opt in (self.opt_g, self.opt_d_s, self.opt_d_r):
            for group in opt.param_groups:
                group["lr"] = lr

    def train_step(
        self, s_image: torch.Tensor, s_mask: torch.Tensor, r_image: torch.Tensor
    ) -> dict[str, float]:
        """One optimization step on a synthetic batch and a real batch."""
        m = self.model
        c = self.config
        m.train()
        self._apply_lr()

        # Generators: fool both discriminators and close both cycles.
        _set_requires_grad([m.d_s, m.d_r], False)
        self.opt_g.zero_grad(set_to_none=True)
        fake_r = m.forward_s2r(s_image, s_mask)
        fake_s_img, fake_s_mask = m.forward_r2s(r_image)
        adv_g = adversarial_loss(m.d_r(fake_r), 1.0) + adversarial_loss(
            m.d_s(m.pack_pair(fake_s_img, fake_s_mask)), 1.0
        )
        rec_s_img, rec_s_mask = m.forward_r2s(fake_r)
        cyc_s, cyc_s_parts = cycle_loss(
            rec_s_img, s_image, rec_s_mask, s_mask, c.lambda_cycle_image, c.lambda_cycle_mask
        )
        rec_r = m.forward_s2r(fake_s_img, fake_s_mask)
        cyc_r, cyc_r_parts = cycle_loss(rec_r, r_image, lambda_image=c.lambda_cycle_image)
        loss_g = c.lambda_adv * adv_g + cyc_s + cyc_r
        if not torch.isfinite(loss_g):
            raise TrainingError(f"generator loss diverged at step {self.step_count}")
        loss_g.backward()
        self.opt_g.step()

        # Discriminators: real pairs toward 1, buffered fakes toward 0.
        _set_requires_grad([m.d_s, m.d_r], True)
        self.opt_d_r.zero_grad(set_to_none=True)
        pool_r = self.buffer_r.query(fake_r)
        loss_d_r = 0.5 * (
            adversarial_loss(m.d_r(r_image), 1.0) + adversarial_loss(m.d_r(pool_r), 0.0)
        )
        loss_d_r.backward()
        self.opt_d_r.step()

        self.opt_d_s.zero_grad(set_to_none=True)
        real_pair = m.pack_pair(s_image, s_mask)
        pool_s = self.buffer_s.query(m.pack_pair(fake_s_img, fake_s_mask))
        loss_d_s = 0.5 * (
            adversarial_loss(m.d_s(real_pair), 1.0) + adversarial_loss(m.d_s(pool_s), 0.0)
        )
        loss_d_s.backward()
        self.opt_d_s.step()

        self.step_count += 1
        row = {
            "step": float(self.step_count),
            "loss_g": float(loss_g.detach()),
            "loss_d_s": float(loss_d_s.detach()),
            "loss_d_r": float(loss_d_r.detach()),
            "adv_g": float(adv_g.detach()),
            "cycle_s_image": cyc_s_parts["image"],
            "cycle_s_mask": cyc_s_parts["mask"],
            "cycle_r_image": cyc_r_parts["image"],
        }
        self.report.rows.append(row)
        self._log_row(row)
        return row

    def fit(
        self,
        batches: Iterator[tuple[torch.Tensor, torch.Tensor, torch.Tensor]]
        | Callable[[], tuple[torch.Tensor, torch.Tensor, torch.Tensor]],
        steps: int,
    ) -> LossReport:
        """Run `steps` updates pulling (s_image, s_mask, r_image) batches."""
        for _ in range(steps):
            batch = batches() if callable(batches) else next(batches)
            self.train_step(*batch)
        self.close()
        return self.report

    def _log_row(self, row: dict[str, float]):
        if self.telemetry_path is None:
            return
        if self._telemetry_fh is None:
            self.telemetry_path.parent.mkdir(parents=True, exist_ok=True)
            fresh = not self.telemetry_path.exists()
            self._telemetry_fh = open(self.telemetry_path, "a", newline="")
            self._writer = csv.DictWriter(self._telemetry_fh, fieldnames=list(row))
            if fresh:
                self._writer.writeheader()
        self._writer.writerow(row)
        self._telemetry_fh.flush()

    def close(self):
        if self._telemetry_fh is not None:
            self._telemetry_fh.close()
            self._telemetry_fh = None
