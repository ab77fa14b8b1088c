"""Hand-crafted trajectory features and the set-level scores built on them.

The Fréchet score here is a Fréchet *feature* distance (FFD) over these
features, not an FID: there is no learned feature extractor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from spglab.toymodel.data import SyntheticMotionSpec, templates

FEATURES_PER_CHANNEL = ("mean", "std", "speed", "accel", "low_band", "high_band")


def _as_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"expected (J, N) or (B, J, N), got shape {x.shape}")
    if x.shape[-1] < 3:
        raise ValueError("need N >= 3 frames for acceleration features")
    return x


def band_amplitudes(x, band_split: float) -> tuple[np.ndarray, np.ndarray]:
    """Root-sum-square sinusoid amplitude below / at-or-above ``band_split`` cycles/frame.

    The DC bin is excluded. Shapes ``(B, J)``.
    """
    x = _as_batch(x)
    N = x.shape[-1]
    spec = np.fft.rfft(x, axis=-1)
    amp = 2.0 * np.abs(spec) / N
    freqs = np.arange(amp.shape[-1]) / N
    if N % 2 == 0:
        amp[..., -1] /= 2.0  # Nyquist bin is not doubled
    low = (freqs > 0) & (freqs < band_split)
    high = freqs >= band_split
    return (np.sqrt(np.sum(amp[..., low] ** 2, axis=-1)),
            np.sqrt(np.sum(amp[..., high] ** 2, axis=-1)))


def featurize(x, band_split: float) -> np.ndarray:
    """Feature vectors of one ``(J, N)`` trajectory or a ``(B, J, N)`` batch.

    Per channel: mean, std, mean |first difference|, mean |second difference|,
    low-band amplitude, high-band amplitude; grouped by feature kind, giving
    ``d = 6 J``.
    """
    single = np.ndim(x) == 2
    x = _as_batch(x)
    vel = np.diff(x, axis=-1)
    acc = np.diff(x, n=2, axis=-1)
    low, high = band_amplitudes(x, band_split)
    feats = np.concatenate([
        x.mean(-1), x.std(-1), np.abs(vel).mean(-1), np.abs(acc).mean(-1), low, high,
    ], axis=-1)
    return feats[0] if single else feats


@dataclass(frozen=True, eq=False)
class FeatureStats:
    mean: np.ndarray
    cov: np.ndarray
    n: int

    @property
    def d(self) -> int:
        return len(self.mean)

    @classmethod
    def from_features(cls, feats: np.ndarray) -> "FeatureStats":
        feats = np.asarray(feats, dtype=np.float64)
        if feats.ndim != 2 or len(feats) < 2:
            raise ValueError("need at least two feature vectors")
        cov = np.atleast_2d(np.cov(feats, rowvar=False))
        return cls(feats.mean(0), 0.5 * (cov + cov.T), len(feats))


def _psd_sqrt(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    if w.min(initial=0.0) < -tol * max(1.0, abs(w).max(initial=0.0)):
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    """``|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)``."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch {a.d} vs {b.d}")
    ra = _psd_sqrt(a.cov)
    _psd_sqrt(b.cov)  # validates b
    cross = _psd_sqrt(ra @ b.cov @ ra)
    diff = a.mean - b.mean
    val = diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross)
    return float(max(val, 0.0))


def diversity(feats: np.ndarray, pairs: int = 300, rng: np.random.Generator | None = None) -> float:
    """Mean Euclidean distance over ``pairs`` random disjoint pairs of feature vectors.

    When ``pairs`` exceeds ``len(feats) // 2`` several disjoint matchings are drawn.
    """
    feats = np.asarray(feats, dtype=np.float64)
    n = len(feats)
    if n < 2:
        raise ValueError("diversity needs at least two items")
    rng = rng if rng is not None else np.random.default_rng(0)
    per = n // 2
    i_idx, j_idx = [], []
    while len(i_idx) < pairs:
        perm = rng.permutation(n)
        i_idx.extend(perm[:per])
        j_idx.extend(perm[per:2 * per])
    i_idx, j_idx = np.array(i_idx[:pairs]), np.array(j_idx[:pairs])
    return float(np.linalg.norm(feats[i_idx] - feats[j_idx], axis=1).mean())


def all_pairs_diversity(feats: np.ndarray) -> float:
    feats = np.asarray(feats, dtype=np.float64)
    i, j = np.triu_indices(len(feats), k=1)
    return float(np.linalg.norm(feats[i] - feats[j], axis=1).mean())


def accel_profile(x, frame_rate: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean |speed| and mean |acceleration| over frames and the set.

    Speed is the first difference times ``frame_rate``; acceleration the
    second difference times ``frame_rate**2``.
    """
    x = _as_batch(x)
    speed = np.abs(np.diff(x, axis=-1)).mean(axis=(0, -1)) * frame_rate
    accel = np.abs(np.diff(x, n=2, axis=-1)).mean(axis=(0, -1)) * frame_rate ** 2
    return speed, accel


def condition_accuracy(x, labels, spec: SyntheticMotionSpec) -> float:
    """Fraction classified to their label by the nearest jitter-free class template."""
    x = _as_batch(x)
    labels = np.asarray(labels)
    if labels.shape != (len(x),):
        raise ValueError("need one label per trajectory")
    if np.any((labels < 0) | (labels >= spec.num_classes)):
        raise ValueError(f"labels must lie in 0..{spec.num_classes - 1}")
    tf = featurize(templates(spec), spec.band_split)
    xf = featurize(x, spec.band_split)
    d = np.linalg.norm(xf[:, None, :] - tf[None, :, :], axis=-1)
    return float(np.mean(np.argmin(d, axis=1) == labels))


@dataclass
class EvalReport:
    ffd: float
    diversity: float
    diversity_gap: float
    accuracy: float
    accel: float

    COLUMNS = ("FFD", "Diversity", "|Div-GT|", "Accuracy", "Accel")

    def row(self) -> list[float]:
        return [self.ffd, self.diversity, self.diversity_gap, self.accuracy, self.accel]

    def to_dict(self) -> dict:
        return dict(zip(("ffd", "diversity", "diversity_gap", "accuracy", "accel"), self.row()))


@dataclass
class Reference:
    """Ground-truth statistics that generated sets are scored against."""

    spec: SyntheticMotionSpec
    stats: FeatureStats
    diversity: float

    @classmethod
    def from_data(cls, X, spec: SyntheticMotionSpec, pairs: int = 300, seed: int = 0) -> "Reference":
        feats = featurize(X, spec.band_split)
        return cls(spec, FeatureStats.from_features(feats),
                   diversity(feats, pairs, np.random.default_rng(seed)))


def evaluate(x, labels, ref: Reference, pairs: int = 300, seed: int = 0) -> EvalReport:
    feats = featurize(x, ref.spec.band_split)
    div = diversity(feats, pairs, np.random.default_rng(seed))
    _, acc = accel_profile(x)
    return EvalReport(
        ffd=frechet_distance(FeatureStats.from_features(feats), ref.stats),
        diversity=div,
        diversity_gap=abs(div - ref.diversity),
        accuracy=condition_accuracy(x, labels, ref.spec),
        accel=float(acc.mean()),
    )


def format_table(rows: dict[str, EvalReport]) -> str:
    """Aligned plain-text table, one line per named report."""
    name_w = max([len("Guidance")] + [len(k) for k in rows])
    head = f"{'Guidance':<{name_w}}  " + "  ".join(f"{c:>10}" for c in EvalReport.COLUMNS)
    lines = [head, "-" * len(head)]
    for name, rep in rows.items():
        lines.append(f"{name:<{name_w}}  " + "  ".join(f"{v:>10.4f}" for v in rep.row()))
    return "\n".join(lines) + "\n"


def reports_json(rows: dict[str, EvalReport]) -> str:
    return json.dumps({k: v.to_dict() for k, v in rows.items()}, indent=2)
