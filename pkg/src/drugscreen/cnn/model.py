"""Single-layer convolutional text classifier over word-vector windows.

Filters span the full embedding width and come in groups of different
heights. Each feature map is rectified and reduced by one-max pooling; the
pooled vector feeds a two-neuron softmax layer whose positive-class
probability is scored with a positive-weighted cross-entropy.
"""

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "CnnConfig",
    "ForwardResult",
    "init_params",
    "param_names",
    "param_shapes",
    "forward",
    "weighted_cross_entropy",
    "backward",
    "loss_and_grad",
    "Adam",
    "LOSS_EPS",
]

LOSS_EPS = 1e-12


@dataclass(frozen=True)
class CnnConfig:
    """Network shape and training hyperparameters."""

    window_length: int = 50
    embedding_dim: int = 400
    filter_heights: tuple = (3, 4, 5, 6, 7)
    filters_per_height: int = 64
    num_outputs: int = 2
    pos_weight: float = 1.0
    learning_rate: float = 1e-4
    batch_size: int = 64
    epochs: int = 10
    seed: int = 0
    threshold: float = 0.5
    stride: int = 25
    pad: str = "zero"
    shuffle: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    dtype: str = "float64"

    def __post_init__(self):
        object.__setattr__(self, "filter_heights", tuple(int(h) for h in self.filter_heights))
        if self.num_outputs != 2:
            raise ValueError("the classifier has exactly two output neurons")
        if not self.filter_heights or min(self.filter_heights) < 1:
            raise ValueError(f"filter heights must be positive, got {self.filter_heights}")
        if max(self.filter_heights) > self.window_length:
            raise ValueError("filter height exceeds the window length")
        if self.filters_per_height < 1 or self.embedding_dim < 1:
            raise ValueError("filters_per_height and embedding_dim must be positive")
        if self.pos_weight <= 0:
            raise ValueError(f"pos_weight must be > 0, got {self.pos_weight}")
        if not 1 <= self.stride <= self.window_length:
            raise ValueError(f"stride must lie in [1, window_length], got {self.stride}")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"dtype must be float64 or float32, got {self.dtype!r}")

    @property
    def n_features(self):
        return len(self.filter_heights) * self.filters_per_height

    def to_items(self):
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append((f.name, str(v)))
        return out

    @classmethod
    def from_items(cls, items):
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for k, v in items:
            if k not in types:
                continue
            default = getattr(cls, k)
            if isinstance(default, tuple):
                kw[k] = tuple(int(x) for x in v.split(","))
            elif isinstance(default, bool):
                kw[k] = v == "True"
            elif isinstance(default, int):
                kw[k] = int(v)
            elif isinstance(default, float):
                kw[k] = float(v)
            else:
                kw[k] = v
        return cls(**kw)


def param_names(config):
    names = []
    for h in config.filter_heights:
        names += [f"conv{h}.weight", f"conv{h}.bias"]
    return names + ["out.weight", "out.bias"]


def param_shapes(config):
    k, f = config.embedding_dim, config.filters_per_height
    shapes = {}
    for h in config.filter_heights:
        shapes[f"conv{h}.weight"] = (h, k, f)
        shapes[f"conv{h}.bias"] = (f,)
    shapes["out.weight"] = (config.n_features, config.num_outputs)
    shapes["out.bias"] = (config.num_outputs,)
    return shapes


def init_params(config, rng):
    """Glorot-uniform weights, zero biases, drawn in :func:`param_names` order."""
    dtype = np.dtype(config.dtype)
    params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape, dtype=dtype)
            continue
        if name == "out.weight":
            fan_in, fan_out = shape
        else:
            fan_in, fan_out = shape[0] * shape[1], shape[2]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
    return params


class ForwardResult(NamedTuple):
    logits: np.ndarray
    yhat: np.ndarray
    features: np.ndarray
    cache: dict


def _as_batch(x, config):
    x = getattr(x, "matrix", x)
    x = np.asarray(x)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (config.window_length, config.embedding_dim):
        raise ValueError(
            f"expected windows of shape ({config.window_length}, {config.embedding_dim}), "
            f"got {x.shape[-2:] if x.ndim >= 2 else x.shape}"
        )
    return x, single


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(x, params, config):
    """Run the network on one window ``(L, K)`` or a batch ``(B, L, K)``.

    Returns logits, the positive-class probability and the pooled feature
    vector (squeezed for a single window). ``cache`` keeps what
    :func:`backward` needs.
    """
    x, single = _as_batch(x, config)
    b, length, k = x.shape
    feats = []
    cache = {"x": x, "conv": {}}
    for h in config.filter_heights:
        w = params[f"conv{h}.weight"]
        p = length - h + 1
        z = np.broadcast_to(params[f"conv{h}.bias"], (b, p, w.shape[2])).copy()
        for r in range(h):
            z += x[:, r:r + p, :] @ w[r]
        a = np.maximum(z, 0.0)
        # argmax returns the first maximum, which fixes the tie rule
        idx = a.argmax(axis=1)
        pooled = np.take_along_axis(a, idx[:, None, :], axis=1)[:, 0, :]
        cache["conv"][h] = (idx, pooled > 0)
        feats.append(pooled)
    features = np.concatenate(feats, axis=1)
    logits = features @ params["out.weight"] + params["out.bias"]
    probs = _softmax(logits)
    cache["features"] = features
    cache["probs"] = probs
    yhat = probs[:, 1]
    if single:
        return ForwardResult(logits[0], yhat[0], features[0], cache)
    return ForwardResult(logits, yhat, features, cache)


def weighted_cross_entropy(y, yhat, pos_weight=1.0, eps=LOSS_EPS):
    """Per-example loss ``y*(-log yhat)*w + (1-y)*(-log(1-yhat))``.

    ``yhat`` is clamped to ``[eps, 1-eps]`` first.
    """
    if pos_weight <= 0:
        raise ValueError("pos_weight must be positive")
    y = np.asarray(y, dtype=np.float64)
    p = np.clip(np.asarray(yhat, dtype=np.float64), eps, 1.0 - eps)
    return y * (-np.log(p)) * pos_weight + (1.0 - y) * (-np.log(1.0 - p))


def backward(cache, y, params, config, eps=LOSS_EPS):
    """Gradients of the mean batch loss with respect to every parameter.

    Max pooling routes each feature map's gradient to its (first) argmax
    position only; examples whose probability sits on the clamp boundary
    contribute nothing.
    """
    x = cache["x"]
    probs = cache["probs"]
    b = x.shape[0]
    y = np.asarray(y).astype(int).reshape(-1)
    if y.shape[0] != b:
        raise ValueError(f"{y.shape[0]} labels for a batch of {b}")
    weight = np.where(y == 1, config.pos_weight, 1.0)
    p1 = probs[:, 1]
    live = (p1 > eps) & (p1 < 1.0 - eps)
    dlogits = probs.copy()
    dlogits[np.arange(b), y] -= 1.0
    dlogits *= (weight * live / b)[:, None]

    grads = {
        "out.weight": cache["features"].T @ dlogits,
        "out.bias": dlogits.sum(axis=0),
    }
    dfeat = dlogits @ params["out.weight"].T
    f = config.filters_per_height
    length, k = x.shape[1], x.shape[2]
    for gi, h in enumerate(config.filter_heights):
        idx, active = cache["conv"][h]
        g = dfeat[:, gi * f:(gi + 1) * f] * active
        p = length - h + 1
        dz = np.zeros((b, p, f), dtype=g.dtype)
        np.put_along_axis(dz, idx[:, None, :], g[:, None, :], axis=1)
        dz2 = dz.reshape(b * p, f)
        dw = np.empty((h, k, f), dtype=g.dtype)
        for r in range(h):
            dw[r] = x[:, r:r + p, :].reshape(b * p, k).T @ dz2
        grads[f"conv{h}.weight"] = dw
        grads[f"conv{h}.bias"] = g.sum(axis=0)
    return grads


def loss_and_grad(x, y, params, config):
    """Mean weighted loss over a batch and its parameter gradients."""
    res = forward(x, params, config)
    yhat = np.atleast_1d(res.yhat)
    loss = float(weighted_cross_entropy(y, yhat, config.pos_weight).mean())
    return loss, backward(res.cache, np.atleast_1d(y), params, config)


class Adam:
    """Adam optimiser with bias correction, updating parameters in place."""

    def __init__(self, learning_rate=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for name, g in grads.items():
            m = self.m.get(name)
            if m is None:
                m = self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params[name] -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)
