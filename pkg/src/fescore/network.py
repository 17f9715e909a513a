"""Single-hidden-layer network with an element-wise square activation.

The prediction is squareElemWise(x @ pr) @ d_mat: a pure quadratic form in
the input, which is exactly the function family the encryption layer can
evaluate.  No biases — they would break that correspondence.  Training is
plain Adam on softmax cross-entropy over the two raw scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TrainingDivergence
from .preprocess import CleanDataset, QuantConfig, quantize_matrix


@dataclass
class NetworkParams:
    pr: np.ndarray      # (n, d) first-layer weights
    d_mat: np.ndarray   # (d, l) output weights

    def __post_init__(self):
        self.pr = np.asarray(self.pr, dtype=float)
        self.d_mat = np.asarray(self.d_mat, dtype=float)
        if self.pr.ndim != 2 or self.d_mat.ndim != 2 or self.pr.shape[1] != self.d_mat.shape[0]:
            raise DimensionMismatch(
                f"inconsistent weight shapes {self.pr.shape} / {self.d_mat.shape}")
        if not (np.isfinite(self.pr).all() and np.isfinite(self.d_mat).all()):
            raise TrainingDivergence("non-finite network weights")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.pr.shape[0], self.pr.shape[1], self.d_mat.shape[1])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 32
    epochs: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip: float | None = 5.0   # global-norm clip; None disables
    hidden_dim: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1 or self.hidden_dim < 1:
            raise DimensionMismatch("hyperparameters must be positive")


def forward(x, params: NetworkParams) -> np.ndarray:
    """Raw (un-normalized) scores for one record or a batch."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.pr.shape[0]:
        raise DimensionMismatch(
            f"record has {x.shape[-1]} features, network expects {params.pr.shape[0]}")
    hidden = x @ params.pr
    return (hidden * hidden) @ params.d_mat


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_gradients(batch_x, batch_y, params: NetworkParams):
    """Mean softmax cross-entropy over the batch and its analytic gradients.

    The square activation contributes dz^2/dz = 2z in the chain rule.
    """
    X = np.atleast_2d(np.asarray(batch_x, dtype=float))
    Y = np.atleast_2d(np.asarray(batch_y, dtype=float))
    if len(X) == 0:
        raise DimensionMismatch("empty batch")
    m = X.shape[0]
    Z = X @ params.pr
    H = Z * Z
    S = H @ params.d_mat
    probs = _softmax(S)
    eps = 1e-300
    loss = float(-(Y * np.log(probs + eps)).sum() / m)
    dS = (probs - Y) / m
    d_d = H.T @ dS
    dH = dS @ params.d_mat.T
    dZ = 2.0 * Z * dH
    d_pr = X.T @ dZ
    return loss, (d_pr, d_d)


@dataclass
class TrainResult:
    params: NetworkParams
    epoch_losses: list[float] = field(default_factory=list)


def init_params(n: int, d: int, l: int, rng: np.random.Generator) -> NetworkParams:
    # symmetric uniform, scaled by fan-in
    pr = rng.uniform(-1.0, 1.0, size=(n, d)) / np.sqrt(n)
    d_mat = rng.uniform(-1.0, 1.0, size=(d, l)) / np.sqrt(d)
    return NetworkParams(pr=pr, d_mat=d_mat)


def train(data: CleanDataset, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Mini-batch Adam; deterministic for a fixed seed."""
    rng = np.random.default_rng(cfg.seed)
    X, Y = data.features, data.labels
    n = X.shape[1]
    l = Y.shape[1]
    params = init_params(n, cfg.hidden_dim, l, rng)
    m_pr = np.zeros_like(params.pr)
    v_pr = np.zeros_like(params.pr)
    m_d = np.zeros_like(params.d_mat)
    v_d = np.zeros_like(params.d_mat)
    step = 0
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(X))
        batch_losses = []
        for start in range(0, len(X), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, (g_pr, g_d) = loss_and_gradients(X[idx], Y[idx], params)
            if not np.isfinite(loss):
                raise TrainingDivergence(f"non-finite loss at epoch {epoch}")
            batch_losses.append(loss)
            if cfg.grad_clip is not None:
                norm = float(np.sqrt((g_pr * g_pr).sum() + (g_d * g_d).sum()))
                if norm > cfg.grad_clip:
                    scale = cfg.grad_clip / norm
                    g_pr = g_pr * scale
                    g_d = g_d * scale
            step += 1
            bc1 = 1.0 - cfg.beta1 ** step
            bc2 = 1.0 - cfg.beta2 ** step
            m_pr = cfg.beta1 * m_pr + (1 - cfg.beta1) * g_pr
            v_pr = cfg.beta2 * v_pr + (1 - cfg.beta2) * g_pr * g_pr
            m_d = cfg.beta1 * m_d + (1 - cfg.beta1) * g_d
            v_d = cfg.beta2 * v_d + (1 - cfg.beta2) * g_d * g_d
            params = NetworkParams(
                pr=params.pr - cfg.learning_rate * (m_pr / bc1) / (np.sqrt(v_pr / bc2) + cfg.eps),
                d_mat=params.d_mat - cfg.learning_rate * (m_d / bc1) / (np.sqrt(v_d / bc2) + cfg.eps),
            )
        losses.append(float(np.mean(batch_losses)))
    return TrainResult(params=params, epoch_losses=losses)


def diagonalize(d_col) -> np.ndarray:
    """Diagonal matrix from one output column; turns the squared-sum score
    into the bilinear form K^T Diag K over the hidden vector K."""
    return np.diag(np.asarray(d_col))


def export_quantized(params: NetworkParams, cfg: QuantConfig) -> tuple[np.ndarray, np.ndarray]:
    pr_int = quantize_matrix(params.pr, cfg.scale_p, cfg.clip)
    d_int = quantize_matrix(params.d_mat, cfg.scale_d, cfg.clip)
    return pr_int, d_int


def int_forward(x_int, pr_int, d_int) -> list[int]:
    """Exact integer-arithmetic scores; plain Python ints, no overflow."""
    x = [int(v) for v in x_int]
    pr = [[int(v) for v in row] for row in np.asarray(pr_int)]
    dd = [[int(v) for v in row] for row in np.asarray(d_int)]
    n, d = len(pr), len(pr[0])
    if len(x) != n:
        raise DimensionMismatch(f"record has {len(x)} entries, weights expect {n}")
    k = [sum(x[i] * pr[i][j] for i in range(n)) for j in range(d)]
    ksq = [v * v for v in k]
    return [sum(ksq[j] * dd[j][i] for j in range(d)) for i in range(len(dd[0]))]


# -- Model file ---------------------------------------------------------------

MODEL_FORMAT = "fescore-model"
MODEL_VERSION = 1


def save_model(path, params: NetworkParams, qcfg: QuantConfig | None = None,
               feature_names: list[str] | None = None,
               label_classes: list[str] | None = None) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "dims": list(params.dims),
        "pr": params.pr.tolist(),
        "d_mat": params.d_mat.tolist(),
    }
    if feature_names is not None:
        doc["feature_names"] = feature_names
    if label_classes is not None:
        doc["label_classes"] = label_classes
    if qcfg is not None:
        pr_int, d_int = export_quantized(params, qcfg)
        doc["quantized"] = {
            "config": json.loads(qcfg.to_json()),
            "config_digest": qcfg.digest(),
            "pr_int": pr_int.tolist(),
            "d_int": d_int.tolist(),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise DimensionMismatch("not a recognizable model file")
    doc["params"] = NetworkParams(pr=np.array(doc["pr"]), d_mat=np.array(doc["d_mat"]))
    return doc
