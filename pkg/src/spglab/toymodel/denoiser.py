"""A small MLP clean-sample predictor with hand-written reverse-mode gradients."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from spglab.core import Condition, Conditions, NullConditionUnsupported, conditions_for
from spglab.trajio import atomic_write

MODEL_MAGIC = b"TDEN1"
PARAM_ORDER = ("W1", "b1", "W2", "b2", "W3", "b3", "emb")


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def time_embedding(t, dim: int) -> np.ndarray:
    """Sinusoidal embedding of integer steps, shape ``(len(t), dim)``."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(1000.0) * np.arange(half) / max(half - 1, 1))
    arg = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(arg), np.cos(arg)], axis=1)


def preconditioning(alpha_bar: np.ndarray, sigma_data: float, skip: bool):
    """Per-step ``(c_in, c_skip, c_out)``.

    ``c_in`` scales ``x_t`` to unit variance when the data have per-entry
    variance ``sigma_data**2``. With ``skip`` the clean prediction is
    ``c_skip * x_t`` (the best linear estimate) plus a scaled network residual;
    without it the network output is the prediction itself.
    """
    ab = np.asarray(alpha_bar, dtype=np.float64)
    var = ab * sigma_data ** 2 + (1.0 - ab)
    c_in = 1.0 / np.sqrt(var)
    if not skip:
        return c_in, np.zeros_like(ab), np.ones_like(ab)
    c_skip = np.sqrt(ab) * sigma_data ** 2 / var
    c_out = sigma_data * np.sqrt(1.0 - ab) / np.sqrt(var)
    return c_in, c_skip, c_out


class TinyDenoiser:
    """Two SiLU hidden layers over ``flatten(x_t) + time embedding + condition embedding``.

    The network output ``F`` is turned into a clean prediction
    ``c_skip[t] * x_t + c_out[t] * F`` (see :func:`preconditioning`). The
    condition table has one learned row per class plus a final row for the
    null condition.
    """

    def __init__(self, J: int, N: int, num_classes: int, alpha_bar, width: int = 256,
                 temb_dim: int = 32, cemb_dim: int = 16, sigma_data: float = 0.5,
                 skip: bool = False, seed: int = 0, supports_null: bool = True):
        self.alpha_bar = np.asarray(alpha_bar, dtype=np.float64)
        self.J, self.N, self.num_classes, self.T = J, N, num_classes, len(self.alpha_bar) - 1
        self.width, self.temb_dim, self.cemb_dim = width, temb_dim, cemb_dim
        self.sigma_data = float(sigma_data)
        self.skip = bool(skip)
        self.c_in, self.c_skip, self.c_out = preconditioning(self.alpha_bar, self.sigma_data, self.skip)
        self.supports_null = supports_null
        rng = np.random.default_rng(seed)
        d_in = J * N + temb_dim + cemb_dim
        d_out = J * N

        def dense(fan_in, fan_out, gain):
            return rng.standard_normal((fan_in, fan_out)) * np.sqrt(gain / fan_in)

        self.params = {
            "W1": dense(d_in, width, 2.0),
            "b1": np.zeros(width),
            "W2": dense(width, width, 2.0),
            "b2": np.zeros(width),
            "W3": dense(width, d_out, 0.1),
            "b3": np.zeros(d_out),
            "emb": rng.standard_normal((num_classes + 1, cemb_dim)),
        }

    @property
    def null_index(self) -> int:
        return self.num_classes

    def num_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def copy(self) -> "TinyDenoiser":
        other = object.__new__(TinyDenoiser)
        other.__dict__.update(self.__dict__)
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other

    def embed(self, c: Condition) -> np.ndarray:
        if c.kind == "embedding":
            if c.vector.shape != (self.cemb_dim,):
                raise ValueError(f"embedding must have length {self.cemb_dim}")
            return c.vector
        return self.params["emb"][self._row(c)]

    def _row(self, c: Condition) -> int:
        if c.is_null:
            if not self.supports_null:
                raise NullConditionUnsupported("model was trained without condition dropout")
            return self.null_index
        if c.kind != "class":
            raise ValueError(f"condition {c!r} has no table row")
        if not 0 <= c.class_id < self.num_classes:
            raise ValueError(f"class id {c.class_id} outside 0..{self.num_classes - 1}")
        return c.class_id

    # -- forward / backward on flat batches -------------------------------

    def forward(self, x_flat, t, cemb, cache=False):
        """``x_flat`` (B, J*N), ``t`` (B,), ``cemb`` (B, cemb_dim) -> clean prediction (B, J*N)."""
        p = self.params
        t = np.asarray(t)
        c_out = self.c_out[t][:, None]
        h0 = np.concatenate([x_flat * self.c_in[t][:, None], time_embedding(t, self.temb_dim), cemb], axis=1)
        a1 = h0 @ p["W1"] + p["b1"]
        s1 = _sigmoid(a1)
        h1 = a1 * s1
        a2 = h1 @ p["W2"] + p["b2"]
        s2 = _sigmoid(a2)
        h2 = a2 * s2
        out = self.c_skip[t][:, None] * x_flat + c_out * (h2 @ p["W3"] + p["b3"])
        if cache:
            return out, (h0, a1, s1, h1, a2, s2, h2, c_out)
        return out

    def backward(self, d_out, cache, rows):
        """Parameter gradients given ``dL/d out``; ``rows`` are embedding-table rows used."""
        p = self.params
        h0, a1, s1, h1, a2, s2, h2, c_out = cache
        d_out = d_out * c_out
        g = {"W3": h2.T @ d_out, "b3": d_out.sum(0)}
        dh2 = d_out @ p["W3"].T
        da2 = dh2 * s2 * (1 + a2 * (1 - s2))
        g["W2"] = h1.T @ da2
        g["b2"] = da2.sum(0)
        dh1 = da2 @ p["W2"].T
        da1 = dh1 * s1 * (1 + a1 * (1 - s1))
        g["W1"] = h0.T @ da1
        g["b1"] = da1.sum(0)
        dcemb = da1 @ p["W1"][-self.cemb_dim:].T
        demb = np.zeros_like(p["emb"])
        np.add.at(demb, rows, dcemb)
        g["emb"] = demb
        return g

    def loss_and_grad(self, x_t, t, rows, x0):
        """Batch mean of ``|g(x_t) - x0|^2`` (summed over entries) and its gradient.

        ``x_t``/``x0`` are (B, J, N), ``t`` (B,), ``rows`` (B,) embedding-table rows.
        """
        B = x_t.shape[0]
        x_flat = x_t.reshape(B, -1)
        target = x0.reshape(B, -1)
        out, cache = self.forward(x_flat, t, self.params["emb"][rows], cache=True)
        diff = out - target
        loss = float(np.sum(diff * diff) / B)
        grads = self.backward(2.0 * diff / B, cache, rows)
        return loss, grads

    # -- denoiser contract -------------------------------------------------

    def predict_x0(self, x_t, t, c: Conditions) -> np.ndarray:
        x_t = np.asarray(x_t, dtype=np.float64)
        batched = x_t.ndim == 3
        if x_t.shape[-2:] != (self.J, self.N):
            raise ValueError(f"expected (..., {self.J}, {self.N}) input, got {x_t.shape}")
        xb = x_t if batched else x_t[None]
        B = xb.shape[0]
        conds = conditions_for(c, B if batched else None)
        cemb = np.stack([self.embed(ci) for ci in conds])
        tt = np.full(B, int(t)) if np.ndim(t) == 0 else np.asarray(t)
        if tt.min() < 1 or tt.max() > self.T:
            raise ValueError(f"step outside 1..{self.T}")
        out = self.forward(xb.reshape(B, -1), tt, cemb).reshape(xb.shape)
        return out if batched else out[0]

    def predict_x0_many(self, queries):
        """Evaluate several same-step queries in one stacked forward pass."""
        ts = {int(t) for _, t, _ in queries}
        if len(ts) != 1:
            return [self.predict_x0(x, t, c) for x, t, c in queries]
        xs, cs, sizes = [], [], []
        for x, t, c in queries:
            x = np.asarray(x, dtype=np.float64)
            xb = x if x.ndim == 3 else x[None]
            xs.append(xb)
            cs.extend(conditions_for(c, xb.shape[0] if x.ndim == 3 else None))
            sizes.append((xb.shape[0], x.ndim == 3))
        out = self.predict_x0(np.concatenate(xs), ts.pop(), cs)
        res, i = [], 0
        for n, batched in sizes:
            chunk = out[i:i + n]
            res.append(chunk if batched else chunk[0])
            i += n
        return res

    __call__ = predict_x0

    # -- checkpoints -------------------------------------------------------

    def header(self) -> tuple[int, ...]:
        return (self.J, self.N, self.num_classes, self.T, self.width,
                self.temb_dim, self.cemb_dim, int(self.supports_null), int(self.skip))

    def to_bytes(self) -> bytes:
        """``TDEN1``, uint32 header length, int64 header, float64 sigma_data,
        float64 alpha_bar[0..T], then the parameters in ``PARAM_ORDER``."""
        head = self.header()
        parts = [MODEL_MAGIC, struct.pack("<I", len(head)), struct.pack(f"<{len(head)}q", *head),
                 struct.pack("<d", self.sigma_data), self.alpha_bar.astype("<f8").tobytes()]
        for name in PARAM_ORDER:
            parts.append(np.ascontiguousarray(self.params[name], dtype="<f8").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "TinyDenoiser":
        if buf[:5] != MODEL_MAGIC:
            raise ValueError("not a TDEN1 checkpoint")
        (n,) = struct.unpack_from("<I", buf, 5)
        head = struct.unpack_from(f"<{n}q", buf, 9)
        J, N, C, T, width, temb, cemb, null, skip = head
        off = 9 + 8 * n
        (sigma_data,) = struct.unpack_from("<d", buf, off)
        off += 8
        alpha_bar = np.frombuffer(buf, "<f8", T + 1, off).astype(np.float64)
        off += 8 * (T + 1)
        model = cls(J, N, C, alpha_bar, width=width, temb_dim=temb, cemb_dim=cemb,
                    sigma_data=sigma_data, skip=bool(skip), supports_null=bool(null))
        for name in PARAM_ORDER:
            shape = model.params[name].shape
            size = int(np.prod(shape))
            model.params[name] = np.frombuffer(buf, "<f8", size, off).reshape(shape).astype(np.float64)
            off += 8 * size
        if off != len(buf):
            raise ValueError(f"TDEN1 size mismatch: {len(buf)} bytes, expected {off}")
        return model

    def save(self, path):
        atomic_write(Path(path), self.to_bytes())

    @classmethod
    def load(cls, path) -> "TinyDenoiser":
        return cls.from_bytes(Path(path).read_bytes())
