"""Feedforward perceptron with logistic hidden units and a linear output,
trained by full-batch resilient backpropagation.

Parameters of layer ``l`` are a weight matrix of shape
``(layer_sizes[l + 1], layer_sizes[l])`` and a bias vector. Everything is
plain numpy; a network is an immutable value and training works on a copy.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidArchitecture,
    InvalidConfig,
    LengthMismatch,
    NonFiniteError,
)


def sigmoid(n):
    # split by sign so large |n| never overflows exp
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    pos = n >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-n[pos]))
    e = np.exp(n[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True, eq=False)
class Network:
    layer_sizes: tuple
    weights: tuple
    biases: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        _check_architecture(sizes)
        ws = tuple(np.array(w, dtype=float) for w in self.weights)
        bs = tuple(np.array(b, dtype=float).reshape(-1) for b in self.biases)
        if len(ws) != len(sizes) - 1 or len(bs) != len(sizes) - 1:
            raise InvalidArchitecture("one weight matrix and bias per layer")
        for l, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise InvalidArchitecture(
                    f"layer {l}: weights {w.shape}, biases {b.shape} "
                    f"do not match sizes {sizes[l]}->{sizes[l + 1]}")
            w.flags.writeable = False
            b.flags.writeable = False
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat(self):
        """All parameters as one vector: per layer, weights row-major then biases."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    def with_flat(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise DimensionMismatch(f"expected {self.n_params} parameters")
        ws, bs, k = [], [], 0
        for w, b in zip(self.weights, self.biases):
            ws.append(theta[k:k + w.size].reshape(w.shape))
            k += w.size
            bs.append(theta[k:k + b.size])
            k += b.size
        return Network(self.layer_sizes, ws, bs)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.layer_sizes == other.layer_sizes
                and np.array_equal(self.flat(), other.flat()))

    __hash__ = None


def _check_architecture(sizes):
    if len(sizes) < 2:
        raise InvalidArchitecture("need at least an input and an output layer")
    if any(s < 1 for s in sizes):
        raise InvalidArchitecture("layer sizes must be positive")
    if sizes[-1] != 1:
        raise InvalidArchitecture("the output layer must have one unit")


def init_network(layer_sizes, seed):
    """Seeded network: weights uniform in +-1/sqrt(fan_in), biases zero."""
    sizes = tuple(int(s) for s in layer_sizes)
    _check_architecture(sizes)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(sizes, weights, biases)


def _check_inputs(network, X):
    X = np.asarray(X, dtype=float)
    squeeze = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != network.layer_sizes[0]:
        raise DimensionMismatch(
            f"network expects {network.layer_sizes[0]} inputs, got {X.shape[1]}")
    return X, squeeze


def _forward_pass(network, X):
    acts = [X]
    a = X
    last = len(network.weights) - 1
    for l, (w, b) in enumerate(zip(network.weights, network.biases)):
        n = a @ w.T + b
        a = n if l == last else sigmoid(n)
        acts.append(a)
    return acts


def forward(network, x):
    """Network output for one input vector (float) or a batch (1-D array)."""
    X, squeeze = _check_inputs(network, x)
    out = _forward_pass(network, X)[-1][:, 0]
    return float(out[0]) if squeeze else out


predict = forward


def mse(outputs, targets, convention="mean"):
    """Squared error between outputs and targets.

    ``"mean"`` is ``sum((d - y)**2) / n``; ``"half_sum"`` is
    ``0.5 * sum((d - y)**2)``, the quantity the gradients minimize.
    """
    y = np.asarray(outputs, dtype=float).ravel()
    d = np.asarray(targets, dtype=float).ravel()
    if y.size != d.size:
        raise LengthMismatch(f"{y.size} outputs vs {d.size} targets")
    if y.size == 0:
        raise EmptyInput("no outputs")
    sq = float(np.sum((d - y) ** 2))
    if convention == "mean":
        return sq / y.size
    if convention == "half_sum":
        return 0.5 * sq
    raise InvalidConfig(f"unknown mse convention {convention!r}")


def _batch(network, inputs, targets):
    X, _ = _check_inputs(network, inputs)
    d = np.asarray(targets, dtype=float).ravel()
    if d.size != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} inputs vs {d.size} targets")
    if d.size == 0:
        raise EmptyInput("empty batch")
    return X, d


def _backprop(network, X, d):
    acts = _forward_pass(network, X)
    y = acts[-1][:, 0]
    err = 0.5 * float(np.sum((y - d) ** 2))
    delta = (y - d)[:, None]  # linear output: derivative 1
    gw = [None] * len(network.weights)
    gb = [None] * len(network.weights)
    for l in range(len(network.weights) - 1, -1, -1):
        gw[l] = delta.T @ acts[l]
        gb[l] = delta.sum(axis=0)
        if l:
            a = acts[l]
            delta = (delta @ network.weights[l]) * a * (1.0 - a)
    return err, gw, gb


def gradient(network, inputs, targets):
    """Gradient of the half-sum error over the whole batch.

    Returns ``(weight_grads, bias_grads)``, lists shaped like the network's
    parameters.
    """
    X, d = _batch(network, inputs, targets)
    _, gw, gb = _backprop(network, X, d)
    return gw, gb


def flat_gradient(network, inputs, targets):
    X, d = _batch(network, inputs, targets)
    err, gw, gb = _backprop(network, X, d)
    parts = []
    for w, b in zip(gw, gb):
        parts += [w.ravel(), b]
    return err, np.concatenate(parts)


# --- Rprop ---------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta_init: float = 0.07
    delta_max: float = 50.0
    delta_min: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidConfig("epochs must be non-negative")
        if not 0 < self.eta_minus < 1 < self.eta_plus:
            raise InvalidConfig("require 0 < eta_minus < 1 < eta_plus")
        if not 0 < self.delta_min <= self.delta_init <= self.delta_max:
            raise InvalidConfig("require 0 < delta_min <= delta_init <= delta_max")
        if self.seed < 0:
            raise InvalidConfig("seed must be unsigned")


class Rprop:
    """Per-parameter Rprop state with weight backtracking.

    Call :meth:`step` with the current parameters and gradient; it returns
    the updated parameters.
    """

    def __init__(self, size, config):
        self.config = config
        self.delta = np.full(size, config.delta_init)
        self.prev_grad = np.zeros(size)
        self.prev_step = np.zeros(size)

    def step(self, theta, grad):
        c = self.config
        prod = self.prev_grad * grad
        up, down, flat = prod > 0, prod < 0, prod == 0

        self.delta[up] = np.minimum(self.delta[up] * c.eta_plus, c.delta_max)
        self.delta[down] = np.maximum(self.delta[down] * c.eta_minus, c.delta_min)

        step = np.zeros_like(theta)
        move = up | flat
        step[move] = -np.sign(grad[move]) * self.delta[move]
        # sign flip: take back the previous step, forget this gradient
        step[down] = -self.prev_step[down]

        self.prev_step = np.where(down, 0.0, step)
        self.prev_grad = np.where(down, 0.0, grad)
        return theta + step


@dataclass(frozen=True)
class TrainHistory:
    errors: np.ndarray  # half-sum training error at the start of each epoch
    final_error: float = float("nan")

    @property
    def best_so_far(self):
        if len(self.errors) == 0:
            return np.empty(0)
        return np.minimum.accumulate(self.errors)


def train_rprop(network, inputs, targets, config=TrainConfig(), callback=None):
    """Train for exactly ``config.epochs`` full-batch Rprop epochs.

    ``callback(epoch, error)`` is called once per epoch if given.

    Raises
    ------
    NonFiniteError
        If the error or any parameter stops being finite. The exception
        carries the network and history at the point of abort.
    """
    X, d = _batch(network, inputs, targets)
    theta = network.flat().copy()
    opt = Rprop(theta.size, config)
    errors = []
    current = network
    for epoch in range(config.epochs):
        with np.errstate(over="ignore", invalid="ignore"):
            err, g = flat_gradient(current, X, d)
        if not (math.isfinite(err) and np.all(np.isfinite(g))):
            raise NonFiniteError(f"non-finite error at epoch {epoch}",
                                 current, TrainHistory(np.array(errors)))
        errors.append(err)
        if callback is not None:
            callback(epoch, err)
        theta = opt.step(theta, g)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteError(f"non-finite parameters after epoch {epoch}",
                                 current, TrainHistory(np.array(errors)))
        current = network.with_flat(theta)
    final = mse(forward(current, X), d, "half_sum")
    return current, TrainHistory(np.array(errors), final)


# --- classification ------------------------------------------------------

def median_threshold_classify(outputs):
    """Threshold at the median output; outputs at or above it are class 1."""
    y = np.asarray(outputs, dtype=float).ravel()
    if y.size == 0:
        raise EmptyInput("no outputs")
    threshold = float(np.median(y))
    return threshold, (y >= threshold).astype(int)


@dataclass(frozen=True)
class EvalResult:
    architecture: tuple
    train_mse: float
    test_mse: float
    threshold: float
    correct_count: int
    total_count: int
    n_params: int = 0
    error: str = None
    network: Network = field(default=None, repr=False, compare=False)
    test_outputs: np.ndarray = field(default=None, repr=False, compare=False)
    history: TrainHistory = field(default=None, repr=False, compare=False)

    @property
    def classification_rate(self):
        return self.correct_count / self.total_count if self.total_count else float("nan")

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True)
class SearchResult:
    results: tuple
    best_index: int

    @property
    def best(self):
        return self.results[self.best_index]


def config_seed(seed, layer_sizes):
    """Seed for one architecture, derived from the run seed and the sizes."""
    ss = np.random.SeedSequence([int(seed), *map(int, layer_sizes)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def evaluate_architecture(layer_sizes, train, test, config=TrainConfig(),
                          threshold_on="test"):
    """Train one architecture and score it on the test sample.

    ``train`` and ``test`` are ``(inputs, targets)`` pairs.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    net = init_network(sizes, config_seed(config.seed, sizes))
    Xtr, dtr = train
    Xte, dte = test
    try:
        net, hist = train_rprop(net, Xtr, dtr, config)
    except NonFiniteError as exc:
        return EvalResult(sizes, float("nan"), float("nan"), float("nan"),
                          0, len(np.ravel(dte)), net.n_params, str(exc))
    out_tr = forward(net, Xtr)
    out_te = forward(net, Xte)
    if threshold_on == "test":
        threshold, _ = median_threshold_classify(out_te)
    elif threshold_on == "train":
        threshold, _ = median_threshold_classify(out_tr)
    else:
        raise InvalidConfig(f"threshold_on must be 'test' or 'train'")
    pred = (out_te >= threshold).astype(int)
    correct = int(np.sum(pred == np.asarray(dte).astype(int)))
    return EvalResult(sizes, mse(out_tr, dtr), mse(out_te, dte), threshold,
                      correct, len(pred), net.n_params, None, net, out_te, hist)


def architecture_search(train, test, space, config=TrainConfig(),
                        threshold_on="test", workers=1):
    """Train and evaluate every architecture in ``space``.

    Each configuration gets its own seed derived from ``config.seed`` and its
    layer sizes, so results do not depend on order or on ``workers``. A
    configuration whose training diverges is reported with ``error`` set.
    The best result has the lowest test MSE; ties go to fewer parameters,
    then to the earlier configuration.
    """
    space = [tuple(int(s) for s in arch) for arch in space]
    if not space:
        raise EmptyInput("empty architecture space")
    n_in = np.atleast_2d(np.asarray(train[0], dtype=float)).shape[1]
    for arch in space:
        _check_architecture(arch)
        if arch[0] != n_in:
            raise InvalidArchitecture(
                f"{format_architecture(arch)} does not start with input size {n_in}")

    def run(arch):
        return evaluate_architecture(arch, train, test, config, threshold_on)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(run, space))
    else:
        results = tuple(run(a) for a in space)

    ranked = [(r.test_mse, r.n_params, i) for i, r in enumerate(results)
              if r.ok and math.isfinite(r.test_mse)]
    if not ranked:
        raise NonFiniteError("every architecture failed to train")
    return SearchResult(results, min(ranked)[2])


# --- serialization and reports -------------------------------------------

NETWORK_HEADER = "creditlab-network 1"


def dump_network(network):
    """Plain-text parameters with 17 significant digits."""
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    lines = [NETWORK_HEADER,
             "layers " + " ".join(str(s) for s in network.layer_sizes)]
    for l, (w, b) in enumerate(zip(network.weights, network.biases)):
        lines.append(f"weights {l} {w.shape[0]} {w.shape[1]}")
        lines += [" ".join(fmt(v) for v in row) for row in w]
        lines.append(f"biases {l} {b.size}")
        lines.append(" ".join(fmt(v) for v in b))
    return "\n".join(lines) + "\n"


def parse_network(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != NETWORK_HEADER:
        raise InvalidConfig(f"not a network file (expected {NETWORK_HEADER!r})")
    try:
        key, *sizes = lines[1].split()
        if key != "layers":
            raise ValueError("missing layers line")
        sizes = [int(s) for s in sizes]
        ws, bs, k = [], [], 2
        for l in range(len(sizes) - 1):
            _, _, r, c = lines[k].split()
            r, c = int(r), int(c)
            ws.append(np.array([[float(v) for v in lines[k + 1 + i].split()]
                                for i in range(r)]).reshape(r, c))
            k += 1 + r
            bs.append(np.array([float(v) for v in lines[k + 1].split()]))
            k += 2
    except (IndexError, ValueError) as exc:
        raise InvalidConfig(f"malformed network file: {exc}") from None
    return Network(sizes, ws, bs)


def format_architecture(sizes):
    return "[" + " ".join(str(s) for s in sizes) + "]"


def search_rows(search):
    rows = [["network", "architecture", "total_layers", "hidden_layers",
             "train_mse", "test_mse", "threshold", "classification_rate",
             "status"]]
    for i, r in enumerate(search.results, start=1):
        rows.append([f"Net1_{i}", format_architecture(r.architecture),
                     len(r.architecture), len(r.architecture) - 2,
                     f"{r.train_mse:.5g}", f"{r.test_mse:.5g}",
                     f"{r.threshold:.3f}",
                     f"{100 * r.classification_rate:.2f}",
                     "best" if i - 1 == search.best_index else
                     ("ok" if r.ok else "failed: " + r.error)])
    return rows


def firm_rows(desired, outputs, threshold):
    """Per-firm layout: index, desired class, network output, assigned class."""
    rows = [["index", "desired", "output", "assigned", "correct"]]
    for i, (d, y) in enumerate(zip(desired, outputs), start=1):
        c = int(y >= threshold)
        rows.append([i, int(d), repr(float(y)), c, int(c == int(d))])
    return rows


def curve_rows(history):
    rows = [["epoch", "error", "best_so_far"]]
    for i, (e, b) in enumerate(zip(history.errors, history.best_so_far)):
        rows.append([i, repr(float(e)), repr(float(b))])
    return rows
