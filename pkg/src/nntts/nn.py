"""From-scratch feedforward network engine.

Covers everything the four learned stages need: logistic/tanh hidden
layers, linear or softmax outputs, minibatch SGD with momentum, central
finite-difference gradient verification, windowed (time-delay) input
assembly, and a versioned binary weight format. Recurrence is realized as
output feedback: a net may declare that k previous output frames are
appended to its input (teacher-forced in training, self-fed in
generation).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelError

_MAGIC = b"NNTW"
_VERSION = 1

_HIDDEN_ACTS = ("tanh", "logistic")
_OUTPUT_ACTS = ("linear", "softmax")
_LOSSES = ("mse", "cross_entropy")


@dataclass
class Network:
    sizes: list
    weights: list
    biases: list
    hidden_activation: str = "tanh"
    output_activation: str = "linear"
    feedback: int = 0  # previous output frames appended to the input

    def __post_init__(self):
        if self.hidden_activation not in _HIDDEN_ACTS:
            raise ModelError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in _OUTPUT_ACTS:
            raise ModelError(f"unknown output activation {self.output_activation!r}")
        if len(self.sizes) < 2:
            raise ModelError("need at least input and output sizes")
        if len(self.weights) != len(self.sizes) - 1 or len(self.biases) != len(
            self.weights
        ):
            raise ModelError("weight/bias count does not match layer sizes")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.sizes[l + 1], self.sizes[l]) or b.shape != (
                self.sizes[l + 1],
            ):
                raise ModelError(f"layer {l} shape mismatch: {w.shape} {b.shape}")
        if self.feedback < 0:
            raise ModelError("feedback depth must be >= 0")
        if self.feedback and self.base_input_size <= 0:
            raise ModelError("feedback frames leave no room for the base input")

    @property
    def input_size(self):
        return self.sizes[0]

    @property
    def output_size(self):
        return self.sizes[-1]

    @property
    def base_input_size(self):
        return self.sizes[0] - self.feedback * self.sizes[-1]

    def copy(self):
        return Network(
            sizes=list(self.sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
            feedback=self.feedback,
        )


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ModelError("learning rate must be >= 0")
        if self.epochs < 1:
            raise ModelError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ModelError("batch size must be >= 1")


@dataclass
class Sample:
    input: np.ndarray
    target: np.ndarray


def init_network(
    sizes,
    hidden_activation="tanh",
    output_activation="linear",
    feedback=0,
    seed=0,
    init_scale=1.0,
):
    """Weights uniform in +-init_scale/sqrt(fan_in); fully seed-determined."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = init_scale / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(
        sizes=list(sizes),
        weights=weights,
        biases=biases,
        hidden_activation=hidden_activation,
        output_activation=output_activation,
        feedback=feedback,
    )


def _hidden(net, z):
    if net.hidden_activation == "tanh":
        return np.tanh(z)
    return 1.0 / (1.0 + np.exp(-z))


def _hidden_deriv(net, a):
    if net.hidden_activation == "tanh":
        return 1.0 - a * a
    return a * (1.0 - a)


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_pass(net, x):
    """Returns the list of layer activations, input first, output last."""
    acts = [x]
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w.T + b
        if l < last:
            acts.append(_hidden(net, z))
        elif net.output_activation == "softmax":
            acts.append(_softmax(z))
        else:
            acts.append(z)
    return acts


def forward(net, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (net.input_size,):
        raise ModelError(
            f"input shape {x.shape} does not match net input {net.input_size}"
        )
    return _forward_pass(net, x[None, :])[-1][0]


def forward_batch(net, xs):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != net.input_size:
        raise ModelError(
            f"batch shape {xs.shape} does not match net input {net.input_size}"
        )
    return _forward_pass(net, xs)[-1]


def loss_value(net, xs, ts, loss):
    """Mean per-sample loss over a batch."""
    y = forward_batch(net, xs)
    if loss == "mse":
        return float(0.5 * np.sum((y - ts) ** 2) / len(xs))
    if loss == "cross_entropy":
        return float(-np.sum(ts * np.log(y + 1e-300)) / len(xs))
    raise ModelError(f"unknown loss {loss!r}")


def _grad_batch(net, xs, ts, loss):
    """Mean analytic gradient over a batch, as (dWs, dbs) lists."""
    if loss not in _LOSSES:
        raise ModelError(f"unknown loss {loss!r}")
    if loss == "cross_entropy" and net.output_activation != "softmax":
        raise ModelError("cross_entropy requires a softmax output")
    acts = _forward_pass(net, xs)
    n = len(xs)
    # For both mse+linear and cross-entropy+softmax, dL/dz_out = y - t.
    delta = (acts[-1] - ts) / n
    dws, dbs = [], []
    for l in range(len(net.weights) - 1, -1, -1):
        dws.append(delta.T @ acts[l])
        dbs.append(delta.sum(axis=0))
        if l > 0:
            delta = (delta @ net.weights[l]) * _hidden_deriv(net, acts[l])
    dws.reverse()
    dbs.reverse()
    return dws, dbs


def grad(net, sample, loss="mse"):
    """Exact analytic gradient of the per-sample loss."""
    xs = np.asarray(sample.input, dtype=float)[None, :]
    ts = np.asarray(sample.target, dtype=float)[None, :]
    return _grad_batch(net, xs, ts, loss)


def gradient_check(net, sample, loss="mse", eps=1e-5):
    """Max relative error of the analytic gradient vs central differences."""
    if eps <= 0:
        raise ModelError("eps must be positive")
    xs = np.asarray(sample.input, dtype=float)[None, :]
    ts = np.asarray(sample.target, dtype=float)[None, :]
    dws, dbs = _grad_batch(net, xs, ts, loss)
    analytic = np.concatenate(
        [d.ravel() for d in dws] + [d.ravel() for d in dbs]
    )
    params = net.weights + net.biases
    numeric = np.empty_like(analytic)
    i = 0
    for p in params:
        flat = p.ravel()
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up = loss_value(net, xs, ts, loss)
            flat[k] = orig - eps
            dn = loss_value(net, xs, ts, loss)
            flat[k] = orig
            numeric[i] = (up - dn) / (2 * eps)
            i += 1
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def train(net, xs, ts, cfg):
    """SGD with momentum; returns (trained copy, per-epoch mean loss).

    Identical (data, cfg) always produce bit-identical weights: the seed
    fixes shuffling, and the update order is fixed.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if len(xs) == 0:
        raise ModelError("empty training set")
    if xs.shape[1] != net.input_size or ts.shape[1] != net.output_size:
        raise ModelError(
            f"dataset dims {xs.shape[1]}/{ts.shape[1]} do not match net "
            f"{net.input_size}/{net.output_size}"
        )
    loss = "cross_entropy" if net.output_activation == "softmax" else "mse"
    out = net.copy()
    rng = np.random.default_rng(cfg.seed)
    vel_w = [np.zeros_like(w) for w in out.weights]
    vel_b = [np.zeros_like(b) for b in out.biases]
    curve = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(xs))
        epoch_loss = 0.0
        for start in range(0, len(xs), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            bx, bt = xs[idx], ts[idx]
            dws, dbs = _grad_batch(out, bx, bt, loss)
            for l in range(len(out.weights)):
                vel_w[l] = cfg.momentum * vel_w[l] - cfg.learning_rate * dws[l]
                vel_b[l] = cfg.momentum * vel_b[l] - cfg.learning_rate * dbs[l]
                out.weights[l] += vel_w[l]
                out.biases[l] += vel_b[l]
            epoch_loss += loss_value(out, bx, bt, loss) * len(bx)
        epoch_loss /= len(xs)
        if not np.isfinite(epoch_loss):
            raise ModelError(
                f"training diverged: loss {epoch_loss} at epoch {len(curve)}; "
                "lower the learning rate"
            )
        curve.append(epoch_loss)
    return out, curve


def assemble_window(frames, center, radius, pad):
    """Concatenate frames[center-radius ... center+radius], padding overruns."""
    if radius < 0:
        raise ModelError("radius must be >= 0")
    pad = np.asarray(pad, dtype=float)
    parts = []
    for i in range(center - radius, center + radius + 1):
        if 0 <= i < len(frames):
            parts.append(np.asarray(frames[i], dtype=float))
        else:
            parts.append(pad)
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# Weight file format: magic, version, activations, feedback depth, layer
# sizes, then per layer the row-major '<f8' weight matrix and bias vector.
# ---------------------------------------------------------------------------


def save_weights(net, path):
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", _VERSION))
        f.write(
            struct.pack(
                "<BBH",
                _HIDDEN_ACTS.index(net.hidden_activation),
                _OUTPUT_ACTS.index(net.output_activation),
                net.feedback,
            )
        )
        f.write(struct.pack("<I", len(net.sizes)))
        f.write(struct.pack(f"<{len(net.sizes)}I", *net.sizes))
        for w, b in zip(net.weights, net.biases):
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def _read_exactly(f, n, path, what):
    buf = f.read(n)
    if len(buf) != n:
        raise ModelError(f"{path}: truncated weight file while reading {what}")
    return buf


def load_weights(path):
    with open(path, "rb") as f:
        if _read_exactly(f, 4, path, "magic") != _MAGIC:
            raise ModelError(f"{path}: not a weight file (bad magic)")
        (version,) = struct.unpack("<I", _read_exactly(f, 4, path, "version"))
        if version != _VERSION:
            raise ModelError(
                f"{path}: weight format version {version}, expected {_VERSION}"
            )
        h, o, fb = struct.unpack("<BBH", _read_exactly(f, 4, path, "header"))
        if h >= len(_HIDDEN_ACTS) or o >= len(_OUTPUT_ACTS):
            raise ModelError(f"{path}: unknown activation codes {h}/{o}")
        (n_sizes,) = struct.unpack("<I", _read_exactly(f, 4, path, "size count"))
        if not 2 <= n_sizes <= 64:
            raise ModelError(f"{path}: implausible layer count {n_sizes}")
        sizes = list(
            struct.unpack(f"<{n_sizes}I", _read_exactly(f, 4 * n_sizes, path, "sizes"))
        )
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            wb = _read_exactly(f, 8 * fan_in * fan_out, path, "weights")
            weights.append(
                np.frombuffer(wb, dtype="<f8").reshape(fan_out, fan_in).copy()
            )
            bb = _read_exactly(f, 8 * fan_out, path, "biases")
            biases.append(np.frombuffer(bb, dtype="<f8").copy())
        if f.read(1):
            raise ModelError(f"{path}: trailing bytes after weight data")
    return Network(
        sizes=sizes,
        weights=weights,
        biases=biases,
        hidden_activation=_HIDDEN_ACTS[h],
        output_activation=_OUTPUT_ACTS[o],
        feedback=fb,
    )
