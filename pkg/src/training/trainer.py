"""Part-based multitask training: one head at a time, then all heads jointly."""
import logging
import math
from collections.abc import Sequence

import numpy as np

from src.config.run_config import LossConfig, TmpSchedule
from src.models.reports import PhaseReport, TrainReport
from src.network.model import HEAD_OUTPUTS, OneTrackNet
from src.storage.interface import StorageInterface
from src.training.dataset import TrainingSample
from src.training.losses import combined_loss
from src.training.optimizer import OptimizerState, opt_step
from src.utils.error_handlers import ConfigError, ContractError, TrainingAbortedError, log_event

logger = logging.getLogger(__name__)

TMP_PHASES = ("heatmap", "dims", "disp", "joint")

_PHASE_WEIGHTS: dict[str, tuple[float, float, float]] = {
    "heatmap": (1.0, 0.0, 0.0),
    "dims": (0.0, 1.0, 0.0),
    "disp": (0.0, 0.0, 1.0),
    "joint": (1.0, 1.0, 1.0),
}


def phase_weights(phase: str) -> tuple[float, float, float]:
    """Loss weights (w1, w2, w3) active in ``phase``."""
    if phase not in _PHASE_WEIGHTS:
        raise ConfigError(f"unknown training phase '{phase}'", {"phases": list(TMP_PHASES)})
    return _PHASE_WEIGHTS[phase]


def frozen_prefixes(phase: str) -> list[str]:
    """Head prefixes excluded from updates in ``phase``; the trunk always trains."""
    phase_weights(phase)
    if phase == "joint":
        return []
    return [f"heads.{kind}" for kind in HEAD_OUTPUTS if kind != phase]


class EarlyStopping:
    """Stops once the best loss has not improved for ``patience`` consecutive epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.stale_epochs = 0

    def update(self, loss: float) -> bool:
        if loss < self.best:
            self.best = loss
            self.stale_epochs = 0
        else:
            self.stale_epochs += 1
        return self.stale_epochs >= self.patience


class Trainer:
    """Drives the phased schedule over one model and one sample set."""

    def __init__(
        self,
        model: OneTrackNet,
        samples: Sequence[TrainingSample],
        loss_cfg: LossConfig,
        schedule: TmpSchedule,
        seed: int = 0,
        storage: StorageInterface | None = None,
        checkpoint_prefix: str = "checkpoints",
        run_id: str = "",
    ):
        if not samples:
            raise ContractError("training data is empty")
        self.model = model
        self.samples = list(samples)
        self.loss_cfg = loss_cfg
        self.schedule = schedule
        self.rng = np.random.default_rng(seed)
        self.storage = storage
        self.checkpoint_prefix = checkpoint_prefix
        self.run_id = run_id

    def _gated_loss_config(self, phase: str) -> LossConfig:
        w1, w2, w3 = phase_weights(phase)
        return self.loss_cfg.model_copy(update={"w1": w1, "w2": w2, "w3": w3})

    def _run_epoch(self, phase: str, loss_cfg: LossConfig, state: OptimizerState) -> float:
        """One pass over the shuffled samples; returns the mean sample loss."""
        accumulation = self.schedule.accumulation
        order = self.rng.permutation(len(self.samples))
        total = 0.0
        self.model.zero_grad()
        for position, index in enumerate(order, start=1):
            sample = self.samples[index]
            loss = combined_loss(self.model(sample.window), sample.targets, loss_cfg)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingAbortedError(
                    phase, state.step, f"non-finite loss {value} on {sample.sequence} frame {sample.frame}"
                )
            total += value
            batch_start = (position - 1) // accumulation * accumulation
            (loss * (1.0 / min(accumulation, len(order) - batch_start))).backward()
            if position % accumulation == 0 or position == len(order):
                grads = {name: p.grad for name, p in self.model.params.items()}
                opt_step(self.model.params, grads, state, self.model.frozen)
                self.model.zero_grad()
        return total / len(order)

    def run_phase(self, phase: str, epochs: int) -> PhaseReport:
        """Train ``phase`` for up to ``epochs`` epochs with early stopping."""
        weights = phase_weights(phase)
        self.model.freeze(frozen_prefixes(phase))
        loss_cfg = self._gated_loss_config(phase)
        state = OptimizerState.from_schedule(self.schedule)
        stopper = EarlyStopping(self.schedule.patience)
        report = PhaseReport(phase=phase, loss_weights=weights)

        try:
            for epoch in range(1, epochs + 1):
                try:
                    mean_loss = self._run_epoch(phase, loss_cfg, state)
                except TrainingAbortedError as e:
                    raise TrainingAbortedError(phase, epoch, e.details["diagnostic"]) from e
                if not math.isfinite(mean_loss):
                    raise TrainingAbortedError(phase, epoch, f"non-finite mean loss {mean_loss}")
                report.loss_curve.append(mean_loss)
                report.epochs_run = epoch
                log_event("epoch_end", self.run_id or None, phase=phase, epoch=epoch, loss=mean_loss)
                if stopper.update(mean_loss):
                    report.stop_reason = "patience"
                    break
        finally:
            self.model.unfreeze_all()

        if epochs == 0:
            report.stop_reason = "empty"
        report.checkpoint = self._save_checkpoint(phase)
        log_event(
            "phase_end",
            self.run_id or None,
            phase=phase,
            epochs_run=report.epochs_run,
            stop_reason=report.stop_reason,
            final_loss=report.loss_curve[-1] if report.loss_curve else None,
        )
        return report

    def _save_checkpoint(self, phase: str) -> str | None:
        if self.storage is None:
            return None
        key = f"{self.checkpoint_prefix}/{phase}.otmw"
        self.storage.save_file(key, self.model.to_bytes())
        return key

    def train_tmp(self) -> TrainReport:
        """Run heatmap, dims, disp then joint phases, or one joint phase when TMP is off."""
        schedule = self.schedule
        report = TrainReport(run_id=self.run_id, use_tmp=schedule.use_tmp)
        plan = [(p, schedule.epochs_per_phase) for p in TMP_PHASES] if schedule.use_tmp else [("joint", schedule.joint_epochs)]
        if all(epochs == 0 for _, epochs in plan):
            logger.info("Schedule has no epochs; model left unchanged")
            return report
        for phase, epochs in plan:
            report.phases.append(self.run_phase(phase, epochs))
        report.final_checkpoint = report.phases[-1].checkpoint
        return report


def run_phase(
    model: OneTrackNet,
    samples: Sequence[TrainingSample],
    phase: str,
    schedule: TmpSchedule,
    loss_cfg: LossConfig | None = None,
    seed: int = 0,
) -> PhaseReport:
    """Train one phase of the schedule on ``samples``."""
    trainer = Trainer(model, samples, loss_cfg or LossConfig(), schedule, seed=seed)
    return trainer.run_phase(phase, schedule.epochs_per_phase)


def train_tmp(
    model: OneTrackNet,
    samples: Sequence[TrainingSample],
    schedule: TmpSchedule,
    loss_cfg: LossConfig | None = None,
    seed: int = 0,
    storage: StorageInterface | None = None,
    checkpoint_prefix: str = "checkpoints",
    run_id: str = "",
) -> TrainReport:
    """Run the full training schedule and return per-phase reports."""
    trainer = Trainer(model, samples, loss_cfg or LossConfig(), schedule, seed, storage, checkpoint_prefix, run_id)
    report = trainer.train_tmp()
    report.seed = seed
    return report
