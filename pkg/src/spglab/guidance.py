"""Weak-model guidance terms and the additive stack that combines them.

Every method produces a weak prediction ``w`` and contributes
``s * (strong - w)`` on top of the shared conditional prediction ``strong``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from spglab.core import (
    NULL,
    Condition,
    Conditions,
    Denoiser,
    NoiseSchedule,
    NullConditionUnsupported,
    conditions_for,
    implied_eps,
    q_sample,
)
from spglab.smoothing import both_axes_smooth, temporal_smooth


class GuidanceUnavailable(RuntimeError):
    """The denoiser cannot provide the weak term this method needs."""


METHODS = ("none", "cfg", "spg", "sagdet", "icg", "sg")
SMOOTH_AXES = ("time", "both")


@dataclass(frozen=True)
class GuidanceSpec:
    method: str
    s: float = 0.0
    k: int | None = None
    delta_t: int | None = None
    icg_sigma: float | None = None
    axes: str = "time"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown guidance method {self.method!r}")
        if self.s < 0:
            raise ValueError(f"guidance scale must be >= 0, got {self.s}")
        smoothing = self.method in ("spg", "sagdet")
        if smoothing:
            if self.k is None or self.k < 1 or self.k % 2 == 0:
                raise ValueError(f"{self.method} needs an odd kernel size, got {self.k}")
            if self.axes not in SMOOTH_AXES:
                raise ValueError(f"axes must be one of {SMOOTH_AXES}, got {self.axes!r}")
        elif self.k is not None:
            raise ValueError(f"{self.method} takes no kernel size")
        if self.method == "sg":
            if self.delta_t is None or self.delta_t < 0:
                raise ValueError(f"sg needs delta_t >= 0, got {self.delta_t}")
        elif self.delta_t is not None:
            raise ValueError(f"{self.method} takes no delta_t")
        if self.method == "icg":
            if self.icg_sigma is None or self.icg_sigma < 0:
                raise ValueError(f"icg needs sigma >= 0, got {self.icg_sigma}")
        elif self.icg_sigma is not None:
            raise ValueError(f"{self.method} takes no icg_sigma")

    @classmethod
    def cfg(cls, s=1.5):
        return cls("cfg", s)

    @classmethod
    def spg(cls, s=0.3, k=5, axes="time"):
        return cls("spg", s, k=k, axes=axes)

    @classmethod
    def sagdet(cls, s=0.3, k=5, axes="time"):
        return cls("sagdet", s, k=k, axes=axes)

    @classmethod
    def icg(cls, s=1.5, sigma=1.0):
        return cls("icg", s, icg_sigma=sigma)

    @classmethod
    def sg(cls, s=0.7, delta_t=20):
        return cls("sg", s, delta_t=delta_t)

    def __str__(self):
        return format_spec(self)


def format_spec(spec: GuidanceSpec) -> str:
    m = spec.method
    if m == "none":
        return "none"
    parts = [m, _fmt(spec.s)]
    if m in ("spg", "sagdet"):
        parts.append(str(spec.k))
        if spec.axes != "time":
            parts.append(spec.axes)
    elif m == "sg":
        parts.append(str(spec.delta_t))
    elif m == "icg" and spec.icg_sigma != 1.0:
        parts.append(_fmt(spec.icg_sigma))
    return ":".join(parts)


def _fmt(v: float) -> str:
    return repr(float(v)).removesuffix(".0")


def parse_spec(text: str) -> GuidanceSpec:
    """Parse one ``method(:param)*`` term, e.g. ``spg:0.3:5`` or ``cfg:1.5``."""
    parts = [p.strip() for p in text.strip().split(":")]
    m = parts[0].lower()
    args = parts[1:]
    try:
        if m == "none" and not args:
            return GuidanceSpec("none")
        if m == "cfg" and len(args) <= 1:
            return GuidanceSpec.cfg(*map(float, args))
        if m in ("spg", "sagdet") and len(args) <= 3:
            s = float(args[0]) if args else 0.3
            k = int(args[1]) if len(args) > 1 else 5
            axes = args[2] if len(args) > 2 else "time"
            return GuidanceSpec(m, s, k=k, axes=axes)
        if m == "icg" and len(args) <= 2:
            s = float(args[0]) if args else 1.5
            sigma = float(args[1]) if len(args) > 1 else 1.0
            return GuidanceSpec.icg(s, sigma)
        if m == "sg" and len(args) <= 2:
            s = float(args[0]) if args else 0.7
            dt = int(args[1]) if len(args) > 1 else 20
            return GuidanceSpec.sg(s, dt)
    except ValueError as exc:
        raise ValueError(f"bad guidance term {text!r}: {exc}") from None
    raise ValueError(f"bad guidance term {text!r}")


class GuidanceStack(tuple):
    """Ordered guidance terms; at most one CFG entry."""

    def __new__(cls, specs: Sequence[GuidanceSpec] = ()):
        specs = tuple(s for s in specs if s.method != "none")
        if sum(s.method == "cfg" for s in specs) > 1:
            raise ValueError("a guidance stack holds at most one cfg term")
        return super().__new__(cls, specs)

    @classmethod
    def parse(cls, text: str) -> "GuidanceStack":
        """Parse ``cfg:1.5 + spg:0.3:5``; a leading ``guidance =`` is accepted."""
        text = re.sub(r"^\s*guidance\s*=", "", text).strip()
        if not text:
            return cls()
        return cls([parse_spec(term) for term in text.split("+")])

    def __str__(self):
        return " + ".join(map(format_spec, self)) if self else "none"

    def __repr__(self):
        return f"GuidanceStack({str(self)!r})"

    @property
    def cfg(self) -> GuidanceSpec | None:
        return next((s for s in self if s.method == "cfg"), None)

    def calls_per_step(self) -> int:
        """Denoiser evaluations per sampling step."""
        return 1 + len(self)


def combine(strong: np.ndarray, weak: np.ndarray, s: float) -> np.ndarray:
    """``strong + s * (strong - weak)``."""
    if np.shape(strong) != np.shape(weak):
        raise ValueError(f"shape mismatch {np.shape(strong)} vs {np.shape(weak)}")
    if s < 0:
        raise ValueError(f"guidance scale must be >= 0, got {s}")
    return strong + s * (strong - weak)


def predict_many(g: Denoiser, queries):
    """Evaluate ``g`` on several ``(x_t, t, c)`` queries, in one pass if ``g`` supports it."""
    many = getattr(g, "predict_x0_many", None)
    if many is not None:
        return many(queries)
    return [g.predict_x0(x, t, c) for x, t, c in queries]


def _null_like(c: Conditions):
    return NULL if isinstance(c, Condition) else [NULL] * len(c)


def cfg_pair(g: Denoiser, x_t, t, c: Conditions):
    """Return ``(g(x_t, c), g(x_t, null))``."""
    if getattr(g, "supports_null", True) is False:
        raise GuidanceUnavailable("CFG unavailable: denoiser was not trained with a null condition")
    try:
        strong, weak = predict_many(g, [(x_t, t, c), (x_t, t, _null_like(c))])
    except NullConditionUnsupported as exc:
        raise GuidanceUnavailable(f"CFG unavailable: {exc}") from exc
    return strong, weak


def _smoother(axes: str):
    return temporal_smooth if axes == "time" else both_axes_smooth


def spg_weak(g: Denoiser, x_t, t, c, k, rng, schedule: NoiseSchedule,
             x0_hat=None, eps=None, axes="time"):
    """Weak term from the smoothed prediction re-noised with fresh Gaussian noise.

    ``x0_hat`` reuses an already computed ``g(x_t, c)``. ``eps`` overrides the
    draw from ``rng`` (the generator is then left untouched).
    """
    if x0_hat is None:
        x0_hat = g.predict_x0(x_t, t, c)
    smooth = _smoother(axes)(x0_hat, k)
    if eps is None:
        eps = rng.standard_normal(np.shape(x_t))
    x_tilde = q_sample(smooth, t, eps, schedule)
    return g.predict_x0(x_tilde, t, c)


def sag_det_weak(g: Denoiser, x_t, t, c, k, schedule: NoiseSchedule, x0_hat=None, axes="time"):
    """As :func:`spg_weak`, re-noised with the noise implied by ``(x_t, x0_hat)``."""
    if x0_hat is None:
        x0_hat = g.predict_x0(x_t, t, c)
    eps = implied_eps(x_t, x0_hat, t, schedule)
    return spg_weak(g, x_t, t, c, k, None, schedule, x0_hat=x0_hat, eps=eps, axes=axes)


def icg_weak(g: Denoiser, x_t, t, c: Conditions, sigma: float, rng):
    """Evaluate ``g`` with the condition embedding jittered by ``sigma``-scaled noise."""
    batch = np.shape(x_t)[0] if np.ndim(x_t) == 3 else None
    conds = conditions_for(c, batch)
    if any(ci.is_null for ci in conds):
        raise GuidanceUnavailable("ICG is not applicable to the null condition")
    embed = getattr(g, "embed", None)
    if embed is None:
        raise GuidanceUnavailable("ICG needs a denoiser exposing condition embeddings")
    vecs = np.stack([embed(ci) for ci in conds])
    noisy = vecs + sigma * rng.standard_normal(vecs.shape)
    perturbed = [Condition.embedding(v) for v in noisy]
    return g.predict_x0(x_t, t, perturbed[0] if batch is None else perturbed)


def sg_weak(g: Denoiser, x_t, t, c, delta_t: int, T: int):
    """Evaluate ``g`` at the shifted step ``min(t + delta_t, T)``."""
    if delta_t < 0:
        raise ValueError(f"delta_t must be >= 0, got {delta_t}")
    return g.predict_x0(x_t, min(t + delta_t, T), c)


def apply_stack(g: Denoiser, stack: GuidanceStack, x_t, t, c, rng, schedule: NoiseSchedule,
                spg_source: str = "conditional"):
    """Guided clean prediction ``strong + sum_i s_i * (strong - weak_i)``.

    The conditional prediction is evaluated once and shared by every term.
    With ``spg_source="guided"`` the smoothing terms start from the
    CFG-combined prediction instead of the conditional one.
    """
    if spg_source not in ("conditional", "guided"):
        raise ValueError(f"unknown spg_source {spg_source!r}")
    cfg = stack.cfg
    if cfg is not None:
        strong, null = cfg_pair(g, x_t, t, c)
    else:
        strong, null = g.predict_x0(x_t, t, c), None
    smooth_from = strong
    if cfg is not None and spg_source == "guided":
        smooth_from = combine(strong, null, cfg.s)

    out = strong
    for spec in stack:
        m = spec.method
        if m == "cfg":
            weak = null
        elif m == "spg":
            weak = spg_weak(g, x_t, t, c, spec.k, rng, schedule, x0_hat=smooth_from, axes=spec.axes)
        elif m == "sagdet":
            weak = sag_det_weak(g, x_t, t, c, spec.k, schedule, x0_hat=smooth_from, axes=spec.axes)
        elif m == "icg":
            weak = icg_weak(g, x_t, t, c, spec.icg_sigma, rng)
        elif m == "sg":
            weak = sg_weak(g, x_t, t, c, spec.delta_t, schedule.T)
        else:  # pragma: no cover - GuidanceSpec validates methods
            raise ValueError(m)
        # s == 0 leaves the strong term bit-exact
        if spec.s:
            out = out + spec.s * (strong - weak)
    return out
