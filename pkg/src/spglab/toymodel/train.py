"""Clean-sample regression training with condition dropout and SGD + momentum."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from spglab.core import NoiseSchedule, q_sample
from spglab.toymodel.denoiser import TinyDenoiser

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch_size: int = 64
    lr: float = 1e-3
    momentum: float = 0.9
    cond_dropout: float = 0.1
    seed: int = 0
    log_every: int = 0

    def __post_init__(self):
        if not 0 <= self.cond_dropout < 1:
            raise ValueError(f"cond_dropout must lie in [0, 1), got {self.cond_dropout}")
        if self.steps < 0 or self.batch_size < 1 or self.lr < 0:
            raise ValueError("steps >= 0, batch_size >= 1 and lr >= 0 required")


@dataclass
class TrainResult:
    model: TinyDenoiser
    losses: list[float] = field(default_factory=list)
    initial_loss: float = float("nan")
    final_loss: float = float("nan")


def dropout_rows(labels: np.ndarray, p: float, null_index: int, rng: np.random.Generator) -> np.ndarray:
    """Replace each label by the null row with probability ``p``."""
    drop = rng.random(len(labels)) < p
    return np.where(drop, null_index, labels)


def draw_batch(X, labels, schedule: NoiseSchedule, batch_size, p_drop, null_index, rng):
    idx = rng.integers(0, len(X), batch_size)
    x0 = X[idx]
    t = rng.integers(1, schedule.T + 1, batch_size)
    eps = rng.standard_normal(x0.shape)
    ab = schedule.alpha_bar[t][:, None, None]
    x_t = np.sqrt(ab) * x0 + np.sqrt(1 - ab) * eps
    rows = dropout_rows(labels[idx], p_drop, null_index, rng)
    return x_t, t, rows, x0


def probe_loss(model: TinyDenoiser, X, labels, schedule: NoiseSchedule, n=512, seed=12345) -> float:
    """Loss on a fixed noised subset, comparable across training."""
    rng = np.random.default_rng(seed)
    x_t, t, rows, x0 = draw_batch(X, labels, schedule, n, 0.0, model.null_index, rng)
    loss, _ = model.loss_and_grad(x_t, t, rows, x0)
    return loss


def train(model: TinyDenoiser, dataset, schedule: NoiseSchedule, config: TrainConfig) -> TrainResult:
    """Fit ``model`` in place. ``dataset`` is ``(X, labels)`` or a list of ``(Trajectory, Condition)``."""
    X, labels = _as_arrays(dataset)
    if len(X) == 0:
        raise ValueError("empty dataset")
    if schedule.T != model.T:
        raise ValueError(f"schedule has T={schedule.T}, model expects T={model.T}")
    model.supports_null = config.cond_dropout > 0
    rng = np.random.default_rng(config.seed)
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}
    result = TrainResult(model, initial_loss=probe_loss(model, X, labels, schedule))
    for step in range(config.steps):
        x_t, t, rows, x0 = draw_batch(X, labels, schedule, config.batch_size,
                                      config.cond_dropout, model.null_index, rng)
        with np.errstate(over="ignore", invalid="ignore"):  # divergence is reported below
            loss, grads = model.loss_and_grad(x_t, t, rows, x0)
        if not np.isfinite(loss):
            tail = result.losses[-5:]
            raise TrainingDiverged(f"loss became {loss} at step {step}; last losses {tail}")
        result.losses.append(loss)
        for k, g in grads.items():
            v = velocity[k]
            v *= config.momentum
            v -= config.lr * g
            model.params[k] += v
        if config.log_every and (step + 1) % config.log_every == 0:
            log.info("step %d loss %.5f", step + 1, np.mean(result.losses[-config.log_every:]))
    result.final_loss = probe_loss(model, X, labels, schedule)
    return result


def _as_arrays(dataset):
    if isinstance(dataset, tuple) and len(dataset) == 2 and isinstance(dataset[0], np.ndarray):
        return dataset
    X = np.stack([tr.data for tr, _ in dataset])
    labels = np.array([c.class_id for _, c in dataset])
    return X, labels
