"""Synthetic harmonic trajectories with a slow "structure" band and a fast "detail" band."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from spglab.core import Condition, Trajectory


@dataclass(frozen=True)
class SyntheticMotionSpec:
    """Per-class harmonic table plus jitter.

    Frequencies are integer cycles per sequence so every harmonic sits on a
    DFT bin. Each class draws, per channel and harmonic, a nominal amplitude
    and phase from ``table_seed``. Base harmonics jitter the amplitude by a
    relative ``amp_jitter`` and the phase by ``phase_jitter`` (both uniform).
    Detail harmonics have Gaussian coefficients: a Rayleigh amplitude with
    mean square equal to the nominal amplitude squared, capped at
    ``detail_cap`` times nominal, and a uniform phase. ``detail_cap = 0``
    turns detail jitter off (nominal amplitude and phase).
    """

    num_classes: int = 3
    J: int = 6
    N: int = 64
    frame_rate: float = 20.0
    base_cycles: tuple[int, ...] = (1,)
    detail_cycles: tuple[int, ...] = (13,)
    base_amp: tuple[float, float] = (0.5, 0.9)
    detail_amp: tuple[float, float] = (0.1, 0.2)
    amp_jitter: float = 0.1
    phase_jitter: float = 0.4
    detail_cap: float = 2.5
    k_min: int = 5
    k_max: int = 11
    table_seed: int = 1234
    _table: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("base_cycles", "detail_cycles", "base_amp", "detail_amp"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.num_classes < 1 or self.J < 1 or self.N < 3:
            raise ValueError("need num_classes >= 1, J >= 1, N >= 3")
        if not self.base_cycles or not self.detail_cycles:
            raise ValueError("need at least one base and one detail harmonic")
        f_base = max(self.base_cycles) / self.N
        f_detail = min(self.detail_cycles) / self.N
        if not f_base < 1.0 / (2 * self.k_max):
            raise ValueError(f"base frequency {f_base:.4f} must be below 1/(2*k_max)")
        if not f_detail > 1.0 / self.k_min:
            raise ValueError(f"detail frequency {f_detail:.4f} must exceed 1/k_min")
        if max(self.detail_cycles) >= self.N / 2:
            raise ValueError("detail harmonics must stay below Nyquist")
        if f_detail < 4 * f_base:
            raise ValueError("base and detail bands must be separated by a factor of 4")
        if not 0 <= self.amp_jitter < 1:
            raise ValueError("amp_jitter must lie in [0, 1)")
        if self.max_abs() > 2.0:
            raise ValueError(f"harmonic table can reach {self.max_abs():.3f}, exceeding the [-2, 2] bound")

    def max_abs(self) -> float:
        base = len(self.base_cycles) * self.base_amp[1] * (1 + self.amp_jitter)
        detail = len(self.detail_cycles) * self.detail_amp[1] * max(self.detail_cap, 1.0)
        return base + detail

    def zero_jitter(self) -> "SyntheticMotionSpec":
        return replace(self, amp_jitter=0.0, phase_jitter=0.0, detail_cap=0.0)

    @property
    def band_split(self) -> float:
        """Frequency (cycles/frame) separating the low and high feature bands."""
        return float(np.sqrt(max(self.base_cycles) * min(self.detail_cycles))) / self.N

    @property
    def cycles(self) -> np.ndarray:
        return np.array(self.base_cycles + self.detail_cycles, dtype=np.float64)

    def table(self) -> dict:
        """Nominal ``amp`` and ``phase`` arrays of shape ``(classes, J, harmonics)``."""
        if self._table is None:
            rng = np.random.default_rng(self.table_seed)
            shape_b = (self.num_classes, self.J, len(self.base_cycles))
            shape_d = (self.num_classes, self.J, len(self.detail_cycles))
            amp = np.concatenate([rng.uniform(*self.base_amp, shape_b), rng.uniform(*self.detail_amp, shape_d)], -1)
            phase = rng.uniform(0, 2 * np.pi, amp.shape)
            object.__setattr__(self, "_table", {"amp": amp, "phase": phase})
        return self._table

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("_table")
        return d


def render(spec: SyntheticMotionSpec, amp: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Sum of cosines; ``amp``/``phase`` are ``(..., J, H)``, result ``(..., J, N)``."""
    n = np.arange(spec.N)
    arg = 2 * np.pi * spec.cycles[:, None] * n[None, :] / spec.N  # (H, N)
    return np.einsum("...jh,...jhn->...jn", amp, np.cos(arg + phase[..., None]))


def sample_arrays(spec: SyntheticMotionSpec, n: int, rng: np.random.Generator):
    """Draw ``n`` trajectories as a ``(n, J, N)`` array plus round-robin labels."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    tab = spec.table()
    labels = np.arange(n) % spec.num_classes
    amp = tab["amp"][labels]
    phase = tab["phase"][labels]
    nb = len(spec.base_cycles)
    scale = np.empty_like(amp)
    jit = np.empty_like(phase)
    scale[..., :nb] = 1 + rng.uniform(-spec.amp_jitter, spec.amp_jitter, amp[..., :nb].shape)
    jit[..., :nb] = rng.uniform(-spec.phase_jitter, spec.phase_jitter, phase[..., :nb].shape)
    shape_d = amp[..., nb:].shape
    if spec.detail_cap > 0:
        r = np.sqrt(-np.log1p(-rng.random(shape_d)))  # Rayleigh with E[r^2] = 1
        scale[..., nb:] = np.minimum(r, spec.detail_cap)
        jit[..., nb:] = rng.uniform(-np.pi, np.pi, shape_d)
    else:
        scale[..., nb:] = 1.0
        jit[..., nb:] = 0.0
    return render(spec, amp * scale, phase + jit), labels


def sample_dataset(spec: SyntheticMotionSpec, n: int, rng: np.random.Generator) -> list[tuple[Trajectory, Condition]]:
    X, labels = sample_arrays(spec, n, rng)
    return [(Trajectory(x, spec.frame_rate), Condition.label(int(y))) for x, y in zip(X, labels)]


def templates(spec: SyntheticMotionSpec) -> np.ndarray:
    """Jitter-free trajectory of every class, shape ``(classes, J, N)``."""
    tab = spec.table()
    return render(spec, tab["amp"], tab["phase"])
