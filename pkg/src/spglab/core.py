"""Trajectory containers plus the noise schedule and its diffusion primitives.

All array operations act on the last two axes ``(J, N)`` (channels, frames),
so a leading batch axis is carried through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, Union, runtime_checkable

import numpy as np


class ScheduleError(ValueError):
    pass


class NullConditionUnsupported(ValueError):
    """Raised by denoisers that were never trained on the null condition."""


@dataclass(frozen=True)
class Trajectory:
    """A ``J x N`` trajectory with its frame rate (metadata only)."""

    data: np.ndarray
    frame_rate: float = 20.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"trajectory must be a non-empty J x N matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("trajectory contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def J(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class Condition:
    """Denoiser condition: a class label or a raw embedding, plus the null condition.

    Build instances through the classmethods or the module-level :data:`NULL`.
    """

    kind: str
    class_id: int | None = None
    vector: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def label(cls, class_id: int) -> "Condition":
        if int(class_id) < 0:
            raise ValueError(f"class id must be non-negative, got {class_id}")
        return cls("class", class_id=int(class_id))

    @classmethod
    def embedding(cls, vector) -> "Condition":
        return cls("embedding", vector=np.asarray(vector, dtype=np.float64).copy())

    @property
    def is_null(self) -> bool:
        return self.kind == "null"

    def __eq__(self, other):
        if not isinstance(other, Condition) or self.kind != other.kind:
            return False
        if self.kind == "embedding":
            return np.array_equal(self.vector, other.vector)
        return self.class_id == other.class_id

    def __hash__(self):
        if self.kind == "embedding":
            return hash((self.kind, self.vector.tobytes()))
        return hash((self.kind, self.class_id))


NULL = Condition("null")

Conditions = Union[Condition, Sequence[Condition]]


@runtime_checkable
class Denoiser(Protocol):
    """Anything that maps ``(x_t, t, c)`` to a clean-sample prediction.

    ``x_t`` is ``(J, N)`` or ``(B, J, N)``; ``c`` is a single condition
    (broadcast over the batch) or one condition per batch row. The output has
    the shape of ``x_t`` and must be a pure function of the inputs.
    """

    def predict_x0(self, x_t: np.ndarray, t: int, c: Conditions) -> np.ndarray: ...


def conditions_for(c: Conditions, batch: int | None) -> list[Condition]:
    """Expand ``c`` to a list with one entry per batch row."""
    if isinstance(c, Condition):
        return [c] * (1 if batch is None else batch)
    c = list(c)
    if batch is None:
        if len(c) != 1:
            raise ValueError("unbatched input takes exactly one condition")
    elif len(c) != batch:
        raise ValueError(f"got {len(c)} conditions for a batch of {batch}")
    return c


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Variance schedule indexed by diffusion step ``t = 0..T``.

    Index 0 holds the ``alpha_bar[0] = 1`` convention (``beta[0] = 0``), so
    ``beta[t]`` is the increment of step ``t`` for ``t >= 1``.
    """

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    posterior_var: np.ndarray

    @property
    def T(self) -> int:
        return len(self.beta) - 1

    @classmethod
    def from_betas(cls, betas) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or len(betas) < 2:
            raise ScheduleError("need at least two steps")
        if not np.all((betas > 0) & (betas < 1)):
            raise ScheduleError("every beta must lie in (0, 1)")
        beta = np.concatenate([[0.0], betas])
        alpha = 1.0 - beta
        alpha_bar = np.cumprod(alpha)
        post = np.zeros_like(beta)
        post[1:] = (1.0 - alpha_bar[:-1]) * beta[1:] / (1.0 - alpha_bar[1:])
        for arr in (beta, alpha, alpha_bar, post):
            arr.setflags(write=False)
        return cls(beta, alpha, alpha_bar, post)

    def check_step(self, t: int) -> int:
        t = int(t)
        if not 1 <= t <= self.T:
            raise ScheduleError(f"step {t} outside 1..{self.T}")
        return t

    def posterior_coefficients(self, t: int) -> tuple[float, float]:
        """Coefficients ``(on x0_hat, on x_t)`` of the DDPM posterior mean."""
        t = self.check_step(t)
        if t == 1:
            # alpha_bar[0] = 1 makes these exactly (1, 0); skip the rounding of beta / (1 - alpha)
            return 1.0, 0.0
        ab, ab_prev = self.alpha_bar[t], self.alpha_bar[t - 1]
        c0 = np.sqrt(ab_prev) * self.beta[t] / (1.0 - ab)
        ct = np.sqrt(self.alpha[t]) * (1.0 - ab_prev) / (1.0 - ab)
        return float(c0), float(ct)


def make_linear_schedule(T: int = 50, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    if T < 2:
        raise ScheduleError(f"T must be >= 2, got {T}")
    if not 0 < beta_start <= beta_end < 1:
        raise ScheduleError(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
    return NoiseSchedule.from_betas(np.linspace(beta_start, beta_end, T))


def make_scaled_linear_schedule(T: int = 50, beta_start: float = 1e-4, beta_end: float = 0.02,
                                reference_T: int = 1000) -> NoiseSchedule:
    """Linear schedule whose betas are given for ``reference_T`` steps and rescaled to ``T``.

    ``(1e-4, 0.02)`` at ``T=50`` becomes ``(0.002, 0.4)``, which drives
    ``alpha_bar[T]`` close to zero like the 1000-step original.
    """
    scale = reference_T / T
    return make_linear_schedule(T, beta_start * scale, min(beta_end * scale, 0.999))


def _check_shapes(a: np.ndarray, b: np.ndarray, what: str):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"{what}: shape mismatch {np.shape(a)} vs {np.shape(b)}")


def q_sample(x0: np.ndarray, t: int, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """Sample the forward marginal ``q(x_t | x0)`` with the given noise."""
    _check_shapes(x0, eps, "q_sample")
    t = schedule.check_step(t)
    ab = schedule.alpha_bar[t]
    return np.sqrt(ab) * np.asarray(x0) + np.sqrt(1.0 - ab) * np.asarray(eps)


def posterior_mean(x_t: np.ndarray, x0_hat: np.ndarray, t: int, schedule: NoiseSchedule) -> np.ndarray:
    _check_shapes(x_t, x0_hat, "posterior_mean")
    c0, ct = schedule.posterior_coefficients(t)
    return c0 * np.asarray(x0_hat) + ct * np.asarray(x_t)


def implied_eps(x_t: np.ndarray, x0_hat: np.ndarray, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Noise that maps ``x0_hat`` onto ``x_t`` at step ``t``."""
    _check_shapes(x_t, x0_hat, "implied_eps")
    t = schedule.check_step(t)
    ab = schedule.alpha_bar[t]
    if ab >= 1.0:
        raise ScheduleError(f"alpha_bar[{t}] == 1, implied noise is undefined")
    return (np.asarray(x_t) - np.sqrt(ab) * np.asarray(x0_hat)) / np.sqrt(1.0 - ab)
