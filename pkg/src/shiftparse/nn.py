"""Self-contained numeric core on top of numpy arrays.

Everything that needs gradients is written out by hand: embedding gathers,
a standard non-peephole LSTM with exact backpropagation through time, a
single-ReLU-hidden-layer classifier, inverted dropout, negative log
softmax, and ADADELTA. A finite-difference checker verifies any of it
against central differences.

Parameters live in a ParamStore: each named array is paired with a
gradient accumulator and the two ADADELTA running averages. Matrices are
initialized Glorot-uniform, embeddings uniform in [-0.01, 0.01], LSTM
forget-gate biases at 1.0.

Gate layout inside the fused LSTM weight matrix is [input, forget,
output, candidate], each block H wide.
"""

from __future__ import annotations

import numpy as np

# When enabled, key ops assert their outputs are finite. Cheap insurance
# while training without gradient clipping.
debug_checks = False


def _check_finite(name, arr):
    if debug_checks and not np.all(np.isfinite(arr)):
        raise FloatingPointError("non-finite values in %s" % name)


class Param:
    __slots__ = ("name", "value", "grad", "eg2", "ed2")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)
        self.eg2 = np.zeros_like(value)   # E[g^2]
        self.ed2 = np.zeros_like(value)   # E[dx^2]


class ParamStore:
    """Named trainable arrays with gradient and optimizer state."""

    def __init__(self, dtype=np.float64):
        self.dtype = np.dtype(dtype)
        self._params: dict[str, Param] = {}

    def add(self, name: str, value: np.ndarray) -> Param:
        if name in self._params:
            raise ValueError("duplicate parameter name %r" % name)
        param = Param(name, np.ascontiguousarray(value, dtype=self.dtype))
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Param:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self):
        return iter(self._params.values())

    def names(self) -> list[str]:
        return list(self._params.keys())

    def num_values(self) -> int:
        return sum(p.value.size for p in self)

    def zero_grads(self):
        for p in self:
            p.grad[...] = 0.0

    def adadelta_step(self, rho: float = 0.99, eps: float = 1e-7, l2: float = 0.0):
        """One ADADELTA update over every parameter; clears gradients.

        Per coordinate: E[g2] <- rho E[g2] + (1-rho) g^2;
        dx = -sqrt(E[dx2]+eps)/sqrt(E[g2]+eps) * g;
        E[dx2] <- rho E[dx2] + (1-rho) dx^2; x <- x + dx.
        The update is elementwise, so parameter ordering cannot change it.
        """
        if not (0.0 < rho < 1.0):
            raise ValueError("rho must lie in (0, 1)")
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        for p in self:
            g = p.grad
            if l2:
                g = g + l2 * p.value
            p.eg2 *= rho
            p.eg2 += (1.0 - rho) * g * g
            dx = -np.sqrt(p.ed2 + eps) / np.sqrt(p.eg2 + eps) * g
            p.ed2 *= rho
            p.ed2 += (1.0 - rho) * dx * dx
            p.value += dx
            _check_finite(p.name, p.value)
            p.grad[...] = 0.0


# ---------------------------------------------------------------------------
# initializers
# ---------------------------------------------------------------------------

def glorot(rng: np.random.Generator, fan_in: int, fan_out: int,
           shape=None, dtype=np.float64) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def embedding_init(rng: np.random.Generator, rows: int, dims: int,
                   scale: float = 0.01, dtype=np.float64) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(rows, dims)).astype(dtype)


def lstm_init(rng: np.random.Generator, input_size: int, hidden: int,
              dtype=np.float64) -> tuple[np.ndarray, np.ndarray]:
    """Fused (input_size+hidden, 4H) weight matrix and (4H,) bias with the
    forget-gate block of the bias at 1.0."""
    w = glorot(rng, input_size + hidden, hidden, shape=(input_size + hidden, 4 * hidden),
               dtype=dtype)
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden:2 * hidden] = 1.0
    return w, b


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_step(w: np.ndarray, b: np.ndarray, x, h_prev, c_prev):
    """One LSTM step: i,f,o = sigmoid, g = tanh, c = f*c_prev + i*g,
    h = o*tanh(c). Returns (h, c)."""
    hidden = b.shape[0] // 4
    if x.shape[-1] + hidden != w.shape[0]:
        raise ValueError("input size %d does not match weight matrix %r"
                         % (x.shape[-1], w.shape))
    z = np.concatenate([x, h_prev]) @ w + b
    i = _sigmoid(z[:hidden])
    f = _sigmoid(z[hidden:2 * hidden])
    o = _sigmoid(z[2 * hidden:3 * hidden])
    g = np.tanh(z[3 * hidden:])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


def lstm_forward(w: np.ndarray, b: np.ndarray, xs: np.ndarray):
    """Run an LSTM over xs (n, input_size) from zero initial state.

    Returns (hs, cache) with hs of shape (n, H); the cache carries every
    per-step activation the backward pass needs.
    """
    n, input_size = xs.shape
    hidden = b.shape[0] // 4
    if input_size + hidden != w.shape[0]:
        raise ValueError("input size %d does not match weight matrix %r" % (input_size, w.shape))
    gates = np.empty((n, 4 * hidden), dtype=xs.dtype)   # activated i,f,o,g
    cs = np.empty((n, hidden), dtype=xs.dtype)
    tanh_cs = np.empty((n, hidden), dtype=xs.dtype)
    hs = np.empty((n, hidden), dtype=xs.dtype)
    h = np.zeros(hidden, dtype=xs.dtype)
    c = np.zeros(hidden, dtype=xs.dtype)
    for t in range(n):
        z = np.concatenate([xs[t], h]) @ w + b
        i = _sigmoid(z[:hidden])
        f = _sigmoid(z[hidden:2 * hidden])
        o = _sigmoid(z[2 * hidden:3 * hidden])
        g = np.tanh(z[3 * hidden:])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :hidden] = i
        gates[t, hidden:2 * hidden] = f
        gates[t, 2 * hidden:3 * hidden] = o
        gates[t, 3 * hidden:] = g
        cs[t] = c
        tanh_cs[t] = np.tanh(c)
        hs[t] = h
    _check_finite("lstm_forward", hs)
    cache = (xs, gates, cs, tanh_cs, hs)
    return hs, cache


def lstm_backward(w: np.ndarray, b: np.ndarray, cache, dhs: np.ndarray,
                  dw: np.ndarray, db: np.ndarray) -> np.ndarray:
    """Exact BPTT for lstm_forward. Accumulates into dw/db, returns dxs."""
    xs, gates, cs, tanh_cs, hs = cache
    n, input_size = xs.shape
    hidden = b.shape[0] // 4
    dxs = np.zeros_like(xs)
    dh_next = np.zeros(hidden, dtype=xs.dtype)
    dc_next = np.zeros(hidden, dtype=xs.dtype)
    for t in range(n - 1, -1, -1):
        i = gates[t, :hidden]
        f = gates[t, hidden:2 * hidden]
        o = gates[t, 2 * hidden:3 * hidden]
        g = gates[t, 3 * hidden:]
        dh = dhs[t] + dh_next
        do = dh * tanh_cs[t]
        dc = dc_next + dh * o * (1.0 - tanh_cs[t] ** 2)
        c_prev = cs[t - 1] if t > 0 else np.zeros(hidden, dtype=xs.dtype)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.empty(4 * hidden, dtype=xs.dtype)
        dz[:hidden] = di * i * (1.0 - i)
        dz[hidden:2 * hidden] = df * f * (1.0 - f)
        dz[2 * hidden:3 * hidden] = do * o * (1.0 - o)
        dz[3 * hidden:] = dg * (1.0 - g ** 2)
        h_prev = hs[t - 1] if t > 0 else np.zeros(hidden, dtype=xs.dtype)
        xh = np.concatenate([xs[t], h_prev])
        dw += np.outer(xh, dz)
        db += dz
        dxh = w @ dz
        dxs[t] = dxh[:input_size]
        dh_next = dxh[input_size:]
        dc_next = dc * f
    return dxs


# ---------------------------------------------------------------------------
# dropout, MLP, loss
# ---------------------------------------------------------------------------

def dropout_mask(rng: np.random.Generator, shape, p: float, dtype=np.float64) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability p, survivors scaled by
    1/(1-p), so the train-mode expectation equals the input."""
    if not (0.0 <= p < 1.0):
        raise ValueError("dropout probability must lie in [0, 1)")
    if p == 0.0:
        return np.ones(shape, dtype=dtype)
    keep = rng.random(shape) >= p
    return keep.astype(dtype) / (1.0 - p)


def dropout(x: np.ndarray, p: float, train: bool, rng: np.random.Generator | None = None):
    """Returns (y, mask); eval mode is the identity with a ones mask."""
    if not train or p == 0.0:
        return x, None
    mask = dropout_mask(rng, x.shape, p, dtype=x.dtype)
    return x * mask, mask


def mlp_forward(w1, b1, w2, b2, x: np.ndarray):
    """Affine -> ReLU -> affine. x is (m, in) or (in,)."""
    pre = x @ w1 + b1
    hid = np.maximum(pre, 0.0)
    scores = hid @ w2 + b2
    _check_finite("mlp_forward", scores)
    return scores, (x, pre, hid)


def mlp_backward(w1, b1, w2, b2, cache, dscores, dw1, db1, dw2, db2):
    """Backward for mlp_forward; accumulates into the d* arrays, returns dx."""
    x, pre, hid = cache
    if dscores.ndim == 1:
        dw2 += np.outer(hid, dscores)
        db2 += dscores
        dhid = w2 @ dscores
        dpre = dhid * (pre > 0)
        dw1 += np.outer(x, dpre)
        db1 += dpre
        return w1 @ dpre
    dw2 += hid.T @ dscores
    db2 += dscores.sum(axis=0)
    dhid = dscores @ w2.T
    dpre = dhid * (pre > 0)
    dw1 += x.T @ dpre
    db1 += dpre.sum(axis=0)
    return dpre @ w1.T


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def nll_softmax_loss(scores: np.ndarray, gold):
    """Negative log softmax, stabilized by max subtraction.

    scores may be (K,) with an int gold, or (m, K) with m gold indices;
    losses are summed over rows. Returns (loss, dscores) where dscores is
    softmax(scores) - onehot(gold).
    """
    if scores.ndim == 1:
        probs = softmax(scores)
        loss = -np.log(probs[gold])
        dscores = probs.copy()
        dscores[gold] -= 1.0
        return float(loss), dscores
    gold = np.asarray(gold)
    probs = softmax(scores)
    rows = np.arange(scores.shape[0])
    loss = float(-np.log(probs[rows, gold]).sum())
    dscores = probs
    dscores[rows, gold] -= 1.0
    return loss, dscores


# ---------------------------------------------------------------------------
# finite-difference checking
# ---------------------------------------------------------------------------

def grad_check(loss_fn, store: ParamStore, rng: np.random.Generator,
               samples_per_param: int = 25, h: float = 1e-5,
               tolerance: float = 1e-4, analytic: dict | None = None,
               min_magnitude: float = 0.0):
    """Compare analytic gradients against central finite differences.

    loss_fn() must be a deterministic pure forward pass over the store's
    current values. analytic maps parameter name -> gradient array; if
    None, the store's .grad fields are used (populate them first). For
    each parameter, samples_per_param coordinates are sampled (all of them
    for small tensors). The relative error uses an absolute floor so that
    near-zero coordinate pairs are compared on an absolute scale:
    |a - n| / max(|a|, |n|, 1e-3).

    A coordinate whose probe at h lands outside tolerance is re-probed at
    h/10 and h/100 and scored by its best probe: stepping across a ReLU
    kink biases the difference quotient at one step size but the bias
    vanishes as h shrinks, while a genuinely wrong gradient stays wrong at
    every step size.

    min_magnitude is for reduced precision: when both the analytic and the
    numeric value are below it the coordinate is counted as skipped rather
    than compared, since 32-bit differences cannot resolve it.

    Returns a report dict with the overall max and every offending
    coordinate above tolerance, identified by parameter name.
    """
    worst = 0.0
    by_param = {}
    failures = []
    skipped = 0

    def probe(flat_value, idx, step):
        orig = flat_value[idx]
        flat_value[idx] = orig + step
        up = loss_fn()
        flat_value[idx] = orig - step
        down = loss_fn()
        flat_value[idx] = orig
        return (up - down) / (2.0 * step)

    for p in store:
        grads = analytic[p.name] if analytic is not None else p.grad
        flat_value = p.value.reshape(-1)
        flat_grad = grads.reshape(-1)
        size = flat_value.size
        if size <= samples_per_param:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=samples_per_param, replace=False)
        param_worst = 0.0
        for idx in coords:
            idx = int(idx)
            a = float(flat_grad[idx])
            best_err = np.inf
            best_numeric = None
            for step in (h, h / 10.0, h / 100.0):
                numeric = probe(flat_value, idx, step)
                err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
                if err < best_err:
                    best_err = err
                    best_numeric = numeric
                if best_err <= tolerance:
                    break
            if max(abs(a), abs(best_numeric)) < min_magnitude:
                skipped += 1
                continue
            param_worst = max(param_worst, best_err)
            if best_err > tolerance:
                failures.append((p.name, idx, a, best_numeric, best_err))
        by_param[p.name] = param_worst
        worst = max(worst, param_worst)
    return {
        "max_rel_error": worst,
        "by_param": by_param,
        "failures": failures,
        "ok": not failures,
        "skipped": skipped,
        "tolerance": tolerance,
    }
