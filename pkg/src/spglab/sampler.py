"""DDPM ancestral sampling with a guidance stack and per-step diagnostics."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from spglab.core import Conditions, Denoiser, NoiseSchedule, implied_eps, posterior_mean
from spglab.guidance import GuidanceStack, apply_stack


class NonFiniteState(FloatingPointError):
    """The chain produced NaN/inf; ``snapshot`` holds the offending step's state."""

    def __init__(self, msg, snapshot):
        super().__init__(msg)
        self.snapshot = snapshot


@dataclass
class ChainRNG:
    """Independent generators for ancestral noise and guidance perturbations."""

    ancestral: np.random.Generator
    perturb: np.random.Generator

    @classmethod
    def from_seed(cls, seed, chain: int = 0) -> "ChainRNG":
        anc, pert = np.random.SeedSequence([int(seed), int(chain)]).spawn(2)
        return cls(np.random.default_rng(anc), np.random.default_rng(pert))


class CountingDenoiser:
    """Wraps a denoiser and counts evaluations (a stacked evaluation of ``m`` queries counts ``m``)."""

    def __init__(self, inner: Denoiser):
        self.inner = inner
        self.calls = 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def predict_x0(self, x_t, t, c):
        self.calls += 1
        return self.inner.predict_x0(x_t, t, c)

    def predict_x0_many(self, queries):
        self.calls += len(queries)
        many = getattr(self.inner, "predict_x0_many", None)
        if many is None:
            return [self.inner.predict_x0(x, t, c) for x, t, c in queries]
        return many(queries)


@dataclass
class SampleDiagnostics:
    """``eps_norm[i]`` belongs to step ``T - i`` (sampling order)."""

    eps_norm: np.ndarray
    denoiser_calls: int = 0
    wall_time: float = 0.0
    steps: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_dict(self) -> dict:
        return {
            "steps": len(self.steps),
            "eps_norm": np.asarray(self.eps_norm).tolist(),
            "denoiser_calls": self.denoiser_calls,
            "wall_time_s": self.wall_time,
        }


def ddpm_sample(g: Denoiser, schedule: NoiseSchedule, stack: GuidanceStack, c: Conditions,
                rng: ChainRNG, shape: tuple[int, ...], clip_x0: float | None = None,
                spg_source: str = "conditional"):
    """Run the reverse chain ``x_T -> x_0``.

    ``shape`` is ``(J, N)`` for one chain or ``(B, J, N)`` for a vectorized
    batch (then ``c`` is a list of ``B`` conditions or one shared condition and
    ``eps_norm`` has shape ``(T, B)``).
    """
    if getattr(g, "T", schedule.T) != schedule.T:
        raise ValueError(f"denoiser expects T={g.T}, schedule has T={schedule.T}")
    counter = CountingDenoiser(g)
    start = time.perf_counter()
    x = rng.ancestral.standard_normal(shape)
    norms, steps = [], []
    for t in range(schedule.T, 0, -1):
        x0 = apply_stack(counter, stack, x, t, c, rng.perturb, schedule, spg_source=spg_source)
        if clip_x0 is not None:
            x0 = np.clip(x0, -clip_x0, clip_x0)
        eps = implied_eps(x, x0, t, schedule)
        norms.append(np.sqrt(np.sum(eps * eps, axis=(-2, -1))))
        steps.append(t)
        mean = posterior_mean(x, x0, t, schedule)
        if t > 1:
            z = rng.ancestral.standard_normal(shape)
            x = mean + np.sqrt(schedule.posterior_var[t]) * z
        else:
            x = mean
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"non-finite state at step {t}", {"t": t, "x_t": x, "x0_hat": x0})
    diag = SampleDiagnostics(np.array(norms), counter.calls, time.perf_counter() - start, steps)
    return x, diag


@dataclass
class ChainResult:
    index: int
    sample: np.ndarray | None
    diagnostics: SampleDiagnostics | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def batch_sample(g: Denoiser, schedule: NoiseSchedule, stack: GuidanceStack, conds, base_seed: int,
                 shape: tuple[int, int], workers: int = 1, **kwargs) -> list[ChainResult]:
    """One independent chain per condition; chain ``i`` seeds from ``(base_seed, i)``.

    A failing chain is reported in its :class:`ChainResult` without stopping the others.
    """
    conds = list(conds)
    if not conds:
        raise ValueError("need at least one condition")

    def run(i):
        try:
            x, d = ddpm_sample(g, schedule, stack, conds[i], ChainRNG.from_seed(base_seed, i), shape, **kwargs)
            return ChainResult(i, x, d)
        except Exception as exc:  # reported per chain
            return ChainResult(i, None, None, f"{type(exc).__name__}: {exc}")

    if workers <= 1:
        return [run(i) for i in range(len(conds))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(conds))))
