"""Dense feed-forward networks for 10-output count regression.

Everything is hand-rolled numpy: affine layers with ReLU activations, MSE
loss, explicit backpropagation, SGD and Adam optimizers, and an optional
shared 10x100 digit-embedding front end.  The final layer is affine with no
activation, so raw outputs are unbounded regression values.

Inputs are the per-digit columns.  Without embeddings they are standardized
per column using training-set statistics; with embeddings the raw digit
indices select rows of the embedding table, concatenated position-major.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import DigitDataset
from .errors import ConfigurationError, StaleCacheError, TrainingDiverged

__all__ = [
    "MlpConfig",
    "MlpModel",
    "AdamState",
    "LossHistory",
    "init_model",
    "embed",
    "forward",
    "mse_loss",
    "backward",
    "sgd_step",
    "adam_step",
    "train",
    "predict_nn",
]

N_OUTPUTS = 10
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


LR_SCHEDULES = ("constant", "one_cycle", "cosine")


@dataclass(frozen=True)
class MlpConfig:
    d: int
    hidden_layers: tuple = (96, 96, 96)
    learning_rate: float = 0.01
    epochs: int = 16
    batch_size: int = 64
    optimizer: str = "adam"
    use_embedding: bool = False
    embedding_shape: tuple = (10, 100)
    seed: int = 0
    normalize_inputs: bool = True
    lr_schedule: str = "constant"

    def __post_init__(self):
        if self.d < 1:
            raise ConfigurationError("d must be >= 1")
        if not self.hidden_layers or min(self.hidden_layers) < 1:
            raise ConfigurationError(f"hidden layer widths must be >= 1, got {self.hidden_layers}")
        if self.learning_rate <= 0 and self.learning_rate != 0.0:
            raise ConfigurationError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be >= 1")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigurationError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")
        if self.use_embedding and self.embedding_shape[0] != 10:
            raise ConfigurationError("the embedding table needs one row per digit category (10)")
        if self.lr_schedule not in LR_SCHEDULES:
            raise ConfigurationError(f"lr_schedule must be one of {LR_SCHEDULES}, got {self.lr_schedule!r}")

    @property
    def input_width(self) -> int:
        return self.d * self.embedding_shape[1] if self.use_embedding else self.d

    @property
    def layer_widths(self) -> tuple:
        return (self.input_width, *self.hidden_layers, N_OUTPUTS)


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0


@dataclass
class LossHistory:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_mse)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,train_mse,val_mse\n")
            for epoch, (tr, va) in enumerate(zip(self.train_mse, self.val_mse), start=1):
                fh.write(f"{epoch},{tr!r},{va!r}\n")


class MlpModel:
    """Parameters plus optimizer state and input-normalization statistics.

    ``version`` increments on every optimizer step; activation caches carry
    the version they were computed under, so a backward pass against updated
    parameters is rejected instead of producing silently wrong gradients.
    """

    def __init__(self, config: MlpConfig, weights, biases, embedding=None,
                 norm_mean=None, norm_std=None):
        self.config = config
        self.weights = weights
        self.biases = biases
        self.embedding = embedding
        self.norm_mean = norm_mean
        self.norm_std = norm_std
        self.adam = AdamState(
            m=[np.zeros_like(p) for p in self.parameters()],
            v=[np.zeros_like(p) for p in self.parameters()],
        )
        self.version = 0

    def parameters(self) -> list:
        params = [] if self.embedding is None else [self.embedding]
        for W, b in zip(self.weights, self.biases):
            params.append(W)
            params.append(b)
        return params

    @property
    def n_layers(self) -> int:
        return len(self.weights)


def init_model(config: MlpConfig) -> MlpModel:
    """He-scaled normal weights (std sqrt(2/fan_in)), zero biases,
    embedding entries N(0, 0.01)."""
    rng = np.random.default_rng(config.seed)
    embedding = None
    if config.use_embedding:
        embedding = rng.normal(0.0, 0.01, size=config.embedding_shape)
    widths = config.layer_widths
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(config, weights, biases, embedding)


def embed(digits, table: np.ndarray) -> np.ndarray:
    """Look up each digit's table row and concatenate position-major.

    A (d,) row maps to (d*dim,); an (n, d) batch maps to (n, d*dim).  Two
    positions holding the same digit share the same table row.
    """
    digits = np.asarray(digits)
    if digits.size and (digits.min() < 0 or digits.max() >= table.shape[0]):
        raise ConfigurationError(f"digit outside [0, {table.shape[0] - 1}] cannot be embedded")
    idx = digits.astype(np.intp)
    looked_up = table[idx]
    if digits.ndim == 1:
        return looked_up.reshape(-1)
    return looked_up.reshape(digits.shape[0], -1)


def _frontend(model: MlpModel, X) -> tuple:
    """Raw digit columns -> first-layer input (embedding or standardization)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ConfigurationError("X must be a 2-D (batch, d) array")
    if X.shape[1] != model.config.d:
        raise ConfigurationError(f"expected {model.config.d} digit columns, got {X.shape[1]}")
    if model.config.use_embedding:
        idx = X.astype(np.intp)
        return embed(idx, model.embedding), idx
    if model.config.normalize_inputs:
        if model.norm_mean is None:
            raise ConfigurationError("normalization statistics missing; train or set norm stats first")
        return (X - model.norm_mean) / model.norm_std, None
    return X, None


def forward(model: MlpModel, X) -> tuple:
    """Forward pass returning (predictions, cache-for-backward).

    Hidden layers are affine followed by ReLU; the output layer is affine
    only.  The cache stores each affine input and pre-activation.
    """
    h, emb_idx = _frontend(model, X)
    inputs = []
    preacts = []
    for layer, (W, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(h)
        a = h @ W + b
        preacts.append(a)
        h = np.maximum(a, 0.0) if layer < model.n_layers - 1 else a
    cache = {"inputs": inputs, "preacts": preacts, "emb_idx": emb_idx, "version": model.version}
    return h, cache


def mse_loss(pred, target) -> tuple:
    """Mean squared error over every (sample, output) entry and its gradient."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ConfigurationError(f"shape mismatch: predictions {pred.shape} vs targets {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff**2))
    return loss, 2.0 * diff / diff.size


def backward(model: MlpModel, cache: dict, dpred: np.ndarray) -> list:
    """Analytic gradients for every parameter, ordered like ``model.parameters()``."""
    if cache.get("version") != model.version:
        raise StaleCacheError("activation cache predates the latest parameter update")
    inputs, preacts = cache["inputs"], cache["preacts"]
    grad_w = [None] * model.n_layers
    grad_b = [None] * model.n_layers
    delta = np.asarray(dpred, dtype=np.float64)
    for layer in range(model.n_layers - 1, -1, -1):
        if layer < model.n_layers - 1:
            delta = delta * (preacts[layer] > 0)
        grad_w[layer] = inputs[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0 or model.embedding is not None:
            delta = delta @ model.weights[layer].T
    grads = []
    if model.embedding is not None:
        emb_idx = cache["emb_idx"]
        dim = model.embedding.shape[1]
        demb = np.zeros_like(model.embedding)
        np.add.at(demb, emb_idx.ravel(), delta.reshape(-1, dim))
        grads.append(demb)
    for gw, gb in zip(grad_w, grad_b):
        grads.append(gw)
        grads.append(gb)
    return grads


def sgd_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], lr: float) -> Sequence[np.ndarray]:
    """In-place p <- p - lr * g; returns the (mutated) parameter list."""
    if len(params) != len(grads):
        raise ConfigurationError("params and grads differ in length")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ConfigurationError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        p -= lr * g
    return params


def adam_step(params, grads, state: AdamState, lr: float) -> tuple:
    """Bias-corrected Adam update (in place); increments the step counter once."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ConfigurationError("params, grads, and state differ in length")
    state.t += 1
    b1t = 1.0 - ADAM_BETA1**state.t
    b2t = 1.0 - ADAM_BETA2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ConfigurationError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        p -= lr * (m / b1t) / (np.sqrt(v / b2t) + ADAM_EPS)
    return params, state


def _digit_matrix(data) -> tuple:
    if isinstance(data, DigitDataset):
        return data.digits.astype(np.float64), data.targets()
    X, Y = data
    return np.asarray(X, dtype=np.float64), np.asarray(Y, dtype=np.float64)


def schedule_lr(config: MlpConfig, step: int, total_steps: int) -> float:
    """Learning rate for a given 0-based optimizer step.

    ``one_cycle`` cosine-warms from lr/25 to lr over the first quarter of
    training, then cosine-anneals to lr/1e4, mirroring the one-cycle policy
    common in tabular deep-learning tooling.  ``cosine`` anneals from lr to
    zero.  The default is a constant rate.
    """
    lr = config.learning_rate
    if config.lr_schedule == "constant" or total_steps <= 1:
        return lr
    frac = step / max(total_steps - 1, 1)
    if config.lr_schedule == "cosine":
        return lr * 0.5 * (1.0 + np.cos(np.pi * frac))
    pct_start = 0.25
    if frac < pct_start:
        lo, hi, phase = lr / 25.0, lr, frac / pct_start
    else:
        lo, hi, phase = lr / 1e4, lr, (frac - pct_start) / (1.0 - pct_start)
        phase = 1.0 - phase
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * phase))


def train(config: MlpConfig, train_data, val_data) -> tuple:
    """Minibatch training with a seeded shuffle each epoch.

    ``train_data``/``val_data`` are DigitDataset splits (digit columns, the
    encoding the networks train on) or (X, Y) pairs of digit matrices and
    count targets.  Records running-mean train MSE and full validation MSE
    per epoch; a non-finite loss aborts with the offending epoch.
    """
    Xtr, Ytr = _digit_matrix(train_data)
    Xval, Yval = _digit_matrix(val_data)
    model = init_model(config)
    if config.normalize_inputs and not config.use_embedding:
        model.norm_mean = Xtr.mean(axis=0)
        model.norm_std = np.maximum(Xtr.std(axis=0), 1e-8)

    rng = np.random.default_rng(config.seed)
    n = Xtr.shape[0]
    batches_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_steps = config.epochs * batches_per_epoch
    step = 0
    history = LossHistory()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        seen = 0
        for start in range(0, n, config.batch_size):
            rows = order[start : start + config.batch_size]
            pred, cache = forward(model, Xtr[rows])
            loss, dpred = mse_loss(pred, Ytr[rows])
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, loss)
            grads = backward(model, cache, dpred)
            if config.learning_rate != 0.0:
                lr = schedule_lr(config, step, total_steps)
                if config.optimizer == "adam":
                    adam_step(model.parameters(), grads, model.adam, lr)
                else:
                    sgd_step(model.parameters(), grads, lr)
                model.version += 1
            step += 1
            epoch_loss += loss * rows.size
            seen += rows.size
        val_pred = predict_nn(model, Xval)
        val_loss, _ = mse_loss(val_pred, Yval)
        if not np.isfinite(val_loss):
            raise TrainingDiverged(epoch, val_loss)
        history.train_mse.append(epoch_loss / seen)
        history.val_mse.append(val_loss)
    return model, history


def predict_nn(model: MlpModel, X) -> np.ndarray:
    """Inference forward pass; pure function of (model, X)."""
    if isinstance(X, DigitDataset):
        X = X.digits.astype(np.float64)
    h, _ = forward(model, X)
    return h


def model_to_dict(model: MlpModel) -> dict:
    cfg = model.config
    return {
        "kind": "mlp",
        "config": {
            "d": cfg.d,
            "hidden_layers": list(cfg.hidden_layers),
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "optimizer": cfg.optimizer,
            "use_embedding": cfg.use_embedding,
            "embedding_shape": list(cfg.embedding_shape),
            "seed": cfg.seed,
            "normalize_inputs": cfg.normalize_inputs,
        },
        "norm_mean": model.norm_mean.tolist() if model.norm_mean is not None else None,
        "norm_std": model.norm_std.tolist() if model.norm_std is not None else None,
        "embedding": model.embedding.tolist() if model.embedding is not None else None,
        "weights": [W.tolist() for W in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }


def model_from_dict(payload: dict) -> MlpModel:
    if payload.get("kind") != "mlp":
        raise ConfigurationError(f"not a serialized MLP: kind={payload.get('kind')!r}")
    c = payload["config"]
    config = MlpConfig(
        d=c["d"],
        hidden_layers=tuple(c["hidden_layers"]),
        learning_rate=c["learning_rate"],
        epochs=c["epochs"],
        batch_size=c["batch_size"],
        optimizer=c["optimizer"],
        use_embedding=c["use_embedding"],
        embedding_shape=tuple(c["embedding_shape"]),
        seed=c["seed"],
        normalize_inputs=c["normalize_inputs"],
    )
    model = MlpModel(
        config,
        weights=[np.array(W, dtype=np.float64) for W in payload["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in payload["biases"]],
        embedding=np.array(payload["embedding"], dtype=np.float64) if payload["embedding"] else None,
    )
    if payload["norm_mean"] is not None:
        model.norm_mean = np.array(payload["norm_mean"], dtype=np.float64)
        model.norm_std = np.array(payload["norm_std"], dtype=np.float64)
    return model


def save_model(model: MlpModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> MlpModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
