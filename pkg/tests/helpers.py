"""Analytic denoisers used as oracles."""

import numpy as np


class IdentityDenoiser:
    """g(x, t, c) = x: makes every guidance composition hand-computable."""

    T = None

    def predict_x0(self, x_t, t, c):
        return np.array(x_t, dtype=np.float64, copy=True)


class ZeroDenoiser:
    def predict_x0(self, x_t, t, c):
        return np.zeros_like(x_t)


class LinearDenoiser:
    """g(x, t, c) = a_t * x + b_c, with a null-condition offset of zero."""

    def __init__(self, T, seed=0, shape=(1, 1)):
        rng = np.random.default_rng(seed)
        self.T = T
        self.a = rng.uniform(0.2, 0.9, T + 1)
        self.b = {None: np.zeros(shape)}
        for cls in range(4):
            self.b[cls] = rng.normal(size=shape)

    def predict_x0(self, x_t, t, c):
        key = None if c.is_null else c.class_id
        return self.a[t] * np.asarray(x_t) + self.b[key]


class EmbeddingDenoiser:
    """Returns the condition embedding broadcast along time; ignores x."""

    def __init__(self, J, N, dim=None):
        self.J, self.N = J, N
        self.table = {k: np.full(J, float(k + 1)) for k in range(4)}

    def embed(self, c):
        if c.kind == "embedding":
            return c.vector
        if c.is_null:
            return np.zeros(self.J)
        return self.table[c.class_id]

    def predict_x0(self, x_t, t, c):
        x_t = np.asarray(x_t)
        if x_t.ndim == 3:
            return np.stack([np.repeat(self.embed(ci)[:, None], self.N, axis=1) for ci in c])
        return np.repeat(self.embed(c)[:, None], self.N, axis=1)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
