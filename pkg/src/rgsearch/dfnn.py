"""Deep feed-forward network for binary outcomes: init, forward/backward, optimizers, training."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericalError
from .learners.base import Model, register, require_two_classes

ACTIVATIONS = ("relu", "sigmoid", "softmax", "tanh")
INITIALIZERS = ("constant", "glorot_normal", "glorot_uniform", "he_normal", "he_uniform")
OPTIMIZERS = ("SGD", "Adam", "Adagrad", "Nadam", "Adamax")
BETA1, BETA2, EPSILON = 0.9, 0.999, 1e-7
ADAGRAD_INITIAL_ACCUMULATOR = 0.1


@dataclass(frozen=True)
class NetworkConfig:
    n_hidden_layers: int = 1
    n_hidden_nodes: int = 8
    input_activation: str = "relu"
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    initializer: str = "glorot_uniform"
    optimizer: str = "SGD"
    learning_rate: float = 0.01
    momentum: float = 0.0
    decay: float = 0.0
    dropout_rate: float = 0.0
    l1_weight: float = 0.0
    l2_weight: float = 0.0
    epochs: int = 10
    batch_size: int = 32
    loss: str = "binary_crossentropy"

    def __post_init__(self):
        if self.output_activation != "sigmoid":
            raise ValueError("output activation is fixed to sigmoid")
        if self.loss != "binary_crossentropy":
            raise ValueError("loss is fixed to binary cross-entropy")
        for a in (self.input_activation, self.hidden_activation):
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        if self.initializer not in INITIALIZERS:
            raise ValueError(f"unknown initializer {self.initializer!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")

    @classmethod
    def from_hypes(cls, values: dict) -> "NetworkConfig":
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in values.items() if k in names})

    def layer_sizes(self, n_inputs: int) -> list[int]:
        return [n_inputs] + [int(self.n_hidden_nodes)] * int(self.n_hidden_layers) + [1]

    def layer_activations(self) -> list[str]:
        return [self.input_activation] + [self.hidden_activation] * (int(self.n_hidden_layers) - 1)


@register
@dataclass
class Network:
    weights: list
    biases: list
    activations: list  # one per hidden layer; the output unit is always sigmoid

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "Network":
        return Network([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                       list(self.activations))


def init_weights(initializer: str, fan_in: int, fan_out: int, rng) -> np.ndarray:
    shape = (fan_in, fan_out)
    if initializer == "constant":
        return np.zeros(shape)
    if initializer == "glorot_uniform":
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, shape)
    if initializer == "glorot_normal":
        return rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), shape)
    if initializer == "he_uniform":
        lim = np.sqrt(6.0 / fan_in)
        return rng.uniform(-lim, lim, shape)
    if initializer == "he_normal":
        return rng.normal(0.0, np.sqrt(2.0 / fan_in), shape)
    raise ValueError(f"unknown initializer {initializer!r}")


def build_network(sizes, activations, initializer, seed) -> Network:
    if len(activations) != len(sizes) - 2:
        raise ValueError("need one activation per hidden layer")
    rng = np.random.default_rng(seed)
    weights = [init_weights(initializer, a, b, rng) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    return Network(weights, biases, list(activations))


def initialize(config: NetworkConfig, n_inputs: int, seed: int) -> Network:
    return build_network(config.layer_sizes(n_inputs), config.layer_activations(), config.initializer, seed)


def activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return np.exp(-np.logaddexp(0.0, -z))
    if name == "tanh":
        return np.tanh(z)
    if name == "softmax":
        e = np.exp(z - z.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)
    raise ValueError(f"unknown activation {name!r}")


def activation_backward(name, z, a, da):
    """dL/dz given dL/da for one layer."""
    if name == "relu":
        return da * (z > 0)
    if name == "sigmoid":
        return da * a * (1.0 - a)
    if name == "tanh":
        return da * (1.0 - a * a)
    if name == "softmax":
        return a * (da - (da * a).sum(axis=1, keepdims=True))
    raise ValueError(f"unknown activation {name!r}")


def forward(net: Network, X, dropout_rate=0.0, training=False, rng=None):
    """Return (P(y=1) per row, cache for ``backward``).

    Dropout (inverted, scaled by 1 / (1 - rate)) hits hidden activations in training only.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != net.weights[0].shape[0]:
        raise DataError("DIMENSION", f"network expects {net.weights[0].shape[0]} inputs, got {X.shape[1]}")
    use_dropout = training and dropout_rate > 0.0
    if use_dropout and rng is None:
        rng = np.random.default_rng(0)
    a = X
    cache = {"inputs": [], "z": [], "a": [], "masks": []}
    for i, (W, b, act) in enumerate(zip(net.weights[:-1], net.biases[:-1], net.activations)):
        cache["inputs"].append(a)
        z = a @ W + b
        h = activate(act, z)
        if not np.all(np.isfinite(h)):
            raise NumericalError("NON_FINITE", f"non-finite activation in hidden layer {i + 1}")
        cache["z"].append(z)
        cache["a"].append(h)
        if use_dropout:
            mask = (rng.random(h.shape) >= dropout_rate) / (1.0 - dropout_rate)
            h = h * mask
        else:
            mask = None
        cache["masks"].append(mask)
        a = h
    cache["inputs"].append(a)
    logit = (a @ net.weights[-1] + net.biases[-1])[:, 0]
    if not np.all(np.isfinite(logit)):
        raise NumericalError("NON_FINITE", f"non-finite output at layer {len(net.weights)}")
    cache["logit"] = logit
    return np.exp(-np.logaddexp(0.0, -logit)), cache


def network_loss(net: Network, X, y, l1_weight=0.0, l2_weight=0.0) -> float:
    """Mean binary cross-entropy plus L1/L2 penalties on the weight matrices."""
    _, cache = forward(net, X)
    z = cache["logit"]
    y = np.asarray(y, dtype=float)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    for W in net.weights:
        loss += l1_weight * np.abs(W).sum() + l2_weight * (W * W).sum()
    return loss


def backward(net: Network, cache, y, l1_weight=0.0, l2_weight=0.0):
    """Gradients (dW list, db list) of ``network_loss``; biases are not penalized."""
    y = np.asarray(y, dtype=float)
    p = np.exp(-np.logaddexp(0.0, -cache["logit"]))
    delta = ((p - y) / len(y))[:, None]
    dW = [None] * len(net.weights)
    db = [None] * len(net.weights)
    for i in range(len(net.weights) - 1, -1, -1):
        inp = cache["inputs"][i]
        dW[i] = inp.T @ delta + l1_weight * np.sign(net.weights[i]) + 2.0 * l2_weight * net.weights[i]
        db[i] = delta.sum(axis=0)
        if i == 0:
            break
        da = delta @ net.weights[i].T
        if cache["masks"][i - 1] is not None:
            da = da * cache["masks"][i - 1]
        delta = activation_backward(net.activations[i - 1], cache["z"][i - 1], cache["a"][i - 1], da)
    return dW, db


@dataclass
class OptimizerState:
    name: str
    slots: dict = field(default_factory=dict)  # accumulator name -> list of arrays mirroring params
    step: int = 0
    learning_rate: float = 0.0


def epoch_learning_rate(base_rate: float, decay: float, epoch: int) -> float:
    return base_rate / (1.0 + decay * epoch)


def make_optimizer(name: str, params) -> OptimizerState:
    zeros = [np.zeros_like(p) for p in params]
    if name == "SGD":
        slots = {"velocity": zeros}
    elif name in ("Adam", "Nadam"):
        slots = {"m": zeros, "v": [np.zeros_like(p) for p in params]}
    elif name == "Adamax":
        slots = {"m": zeros, "u": [np.zeros_like(p) for p in params]}
    elif name == "Adagrad":
        slots = {"acc": [np.full_like(p, ADAGRAD_INITIAL_ACCUMULATOR) for p in params]}
    else:
        raise ValueError(f"unknown optimizer {name!r}")
    return OptimizerState(name, slots)


def optimizer_step(state: OptimizerState, params, grads, learning_rate, momentum=0.0) -> None:
    """Update ``params`` in place. Momentum applies to SGD only."""
    state.step += 1
    state.learning_rate = learning_rate
    t = state.step
    lr = learning_rate
    name = state.name
    for i, (p, g) in enumerate(zip(params, grads)):
        if name == "SGD":
            v = state.slots["velocity"][i]
            v *= momentum
            v -= lr * g
            p += v
        elif name == "Adagrad":
            acc = state.slots["acc"][i]
            acc += g * g
            p -= lr * g / (np.sqrt(acc) + EPSILON)
        elif name == "Adamax":
            m, u = state.slots["m"][i], state.slots["u"][i]
            m *= BETA1
            m += (1 - BETA1) * g
            np.maximum(BETA2 * u, np.abs(g), out=u)
            p -= (lr / (1 - BETA1 ** t)) * m / (u + EPSILON)
        else:
            m, v = state.slots["m"][i], state.slots["v"][i]
            m *= BETA1
            m += (1 - BETA1) * g
            v *= BETA2
            v += (1 - BETA2) * g * g
            v_hat = v / (1 - BETA2 ** t)
            if name == "Adam":
                m_hat = m / (1 - BETA1 ** t)
            else:  # Nadam: Nesterov look-ahead on the first moment
                m_hat = BETA1 * m / (1 - BETA1 ** (t + 1)) + (1 - BETA1) * g / (1 - BETA1 ** t)
            p -= lr * m_hat / (np.sqrt(v_hat) + EPSILON)


@register
class DFNNModel(Model):
    method = "DFNN"

    def __init__(self, network: Network | None = None, config: NetworkConfig | None = None):
        super().__init__()
        self.network = network
        self.config = None if config is None else vars(config).copy()
        if network is not None:
            self.n_inputs = network.weights[0].shape[0]

    def _score(self, X):
        p, _ = forward(self.network, X)
        return p


def train(config: NetworkConfig, X, y, seed: int, network: Network | None = None) -> DFNNModel:
    """Mini-batch training; data reshuffled every epoch, final partial batch kept."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise DataError("EMPTY", "no training cases")
    require_two_classes(y)
    n = X.shape[0]
    init_seq, shuffle_seq, drop_seq = np.random.SeedSequence(seed).spawn(3)
    net = initialize(config, X.shape[1], init_seq) if network is None else network.copy()
    model = DFNNModel(net, config)
    batch = int(config.batch_size)
    if batch > n:
        model.warnings.append(f"batch_size {batch} exceeds {n} training cases; using {n}")
        batch = n
    batch = max(batch, 1)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    drop_rng = np.random.default_rng(drop_seq)
    params = net.weights + net.biases
    state = make_optimizer(config.optimizer, params)
    momentum = config.momentum if config.optimizer == "SGD" else 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(int(config.epochs)):
            lr = epoch_learning_rate(config.learning_rate, config.decay, epoch)
            order = shuffle_rng.permutation(n)
            for s in range(0, n, batch):
                rows = order[s:s + batch]
                _, cache = forward(net, X[rows], config.dropout_rate, True, drop_rng)
                dW, db = backward(net, cache, y[rows], config.l1_weight, config.l2_weight)
                optimizer_step(state, params, dW + db, lr, momentum)
    for p in params:
        if not np.all(np.isfinite(p)):
            raise NumericalError("NON_FINITE", "training diverged: non-finite weights")
    return model
