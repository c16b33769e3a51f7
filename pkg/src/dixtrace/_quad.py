"""Composite Gauss-Legendre panels, mostly used in a logarithmic variable."""
import numpy as np

_X, _W = np.polynomial.legendre.leggauss(16)


def panels(a, b, width):
    """Nodes and weights of a composite 16-point rule on [a, b], flattened."""
    if b <= a:
        return np.empty(0), np.empty(0)
    m = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, m + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mid[:, None] + half[:, None] * _X[None, :]
    weights = half[:, None] * _W[None, :]
    return nodes.ravel(), weights.ravel()


def gl_interval(a, b):
    """16-point nodes/weights for each row of intervals [a_i, b_i]; shape (m, 16)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid[..., None] + half[..., None] * _X, half[..., None] * _W


def log_integral(logf, nodes, weights):
    """log of sum w exp(logf) without overflow; -inf when everything vanishes."""
    logf = np.asarray(logf, dtype=float)
    good = np.isfinite(logf) | (logf == np.inf)
    if not np.any(good):
        return -np.inf
    top = np.max(logf[good])
    if not np.isfinite(top):
        return top
    return top + np.log(np.sum(weights[good] * np.exp(logf[good] - top)))


class LogCumulative:
    """Running integral F(u) = int_{u0}^{u} h(s) ds on fixed panels.

    ``h`` is vectorized.  Values at arbitrary u are the cumulative panel sums
    plus one partial panel, so each lookup costs a single 16-point rule.
    """

    def __init__(self, h, u0, u1, width=0.25):
        self.h = h
        self.u0 = float(u0)
        m = max(1, int(np.ceil((u1 - u0) / width)))
        self.edges = np.linspace(u0, u0 + m * width, m + 1)
        x, w = gl_interval(self.edges[:-1], self.edges[1:])
        vals = h(x.ravel()).reshape(x.shape)
        self.cum = np.concatenate([[0.0], np.cumsum(np.sum(w * vals, axis=1))])

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u > self.edges[-1] + 1e-12) or np.any(u < self.u0 - 1e-12):
            raise ValueError("lookup outside the tabulated range")
        idx = np.clip(np.searchsorted(self.edges, u, side="right") - 1, 0, len(self.edges) - 2)
        x, w = gl_interval(self.edges[idx], u)
        part = np.sum(w * self.h(x.ravel()).reshape(x.shape), axis=1)
        return self.cum[idx] + part
