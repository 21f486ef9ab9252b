"""Dense and sparse relative-amount prediction heads over feature vectors.

The dense head is a linear map activated by softmax and trained with
cross-entropy; the sparse head is a linear map activated by ReLU and
trained with L1 distance.  Gradients are analytic, optimization is Adam
with bias correction, and dense predictions are thresholded to the top k
entries and renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

HEAD_KINDS = ("dense", "sparse")


class DimensionMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class NonPositivePrediction(ValueError):
    """Cross-entropy needs a positive prediction wherever the target is."""


class EmptyDataset(ValueError):
    pass


class MixedDimensions(ValueError):
    pass


@dataclass(frozen=True)
class HeadParams:
    """Weights of one prediction head: v = activation(W x + b)."""

    W: np.ndarray  # I x d
    b: np.ndarray  # I
    head_kind: str

    def __post_init__(self) -> None:
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if self.head_kind not in HEAD_KINDS:
            raise ValueError(f"head_kind must be one of {HEAD_KINDS}")
        if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
            raise ShapeMismatch(f"W {W.shape} and b {b.shape} are inconsistent")
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def num_ingredients(self) -> int:
        return self.W.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.W.shape[1]

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "head_kind": self.head_kind,
            "num_ingredients": self.num_ingredients,
            "feature_dim": self.feature_dim,
            "weights": self.W.ravel().tolist(),
            "bias": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> HeadParams:
        n, d = data["num_ingredients"], data["feature_dim"]
        W = np.asarray(data["weights"], dtype=np.float64).reshape(n, d)
        return cls(W=W, b=np.asarray(data["bias"], dtype=np.float64), head_kind=data["head_kind"])


@dataclass(frozen=True)
class Gradients:
    dW: np.ndarray
    db: np.ndarray


@dataclass(frozen=True)
class OptimizerState:
    """Adam accumulators shaped like the parameters, plus the step count."""

    m_W: np.ndarray
    v_W: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initial(cls, params: HeadParams, lr: float = 1e-4, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> OptimizerState:
        return cls(
            m_W=np.zeros_like(params.W),
            v_W=np.zeros_like(params.W),
            m_b=np.zeros_like(params.b),
            v_b=np.zeros_like(params.b),
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


def _check_input(params: HeadParams, x: np.ndarray, kind: str) -> np.ndarray:
    if params.head_kind != kind:
        raise DimensionMismatch(f"expected a {kind} head, got {params.head_kind}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.feature_dim,):
        raise DimensionMismatch(f"feature shape {x.shape} vs d={params.feature_dim}")
    return x


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def forward_dense(params: HeadParams, x: np.ndarray) -> np.ndarray:
    """softmax(W x + b): strictly positive, sums to 1."""
    x = _check_input(params, x, "dense")
    return softmax(params.W @ x + params.b)


def forward_sparse(params: HeadParams, x: np.ndarray) -> np.ndarray:
    """max(0, W x + b): nonnegative, naturally sparse."""
    x = _check_input(params, x, "sparse")
    return np.maximum(0.0, params.W @ x + params.b)


def ce_loss(v_x: np.ndarray, v_y: np.ndarray) -> float:
    """Cross-entropy -sum(v_y * log v_x); zero targets contribute nothing."""
    v_x = np.asarray(v_x, dtype=np.float64)
    v_y = np.asarray(v_y, dtype=np.float64)
    if v_x.shape != v_y.shape:
        raise DimensionMismatch(f"{v_x.shape} vs {v_y.shape}")
    active = v_y > 0
    if np.any(v_x[active] <= 0):
        raise NonPositivePrediction("prediction is nonpositive where the target is nonzero")
    return float(-(v_y[active] * np.log(v_x[active])).sum())


def l1_loss(v_x: np.ndarray, v_y: np.ndarray) -> float:
    v_x = np.asarray(v_x, dtype=np.float64)
    v_y = np.asarray(v_y, dtype=np.float64)
    if v_x.shape != v_y.shape:
        raise DimensionMismatch(f"{v_x.shape} vs {v_y.shape}")
    return float(np.abs(v_y - v_x).sum())


def backward(params: HeadParams, x: np.ndarray, v_y: np.ndarray) -> Gradients:
    """Analytic gradient of the head's own loss at one sample.

    Dense/cross-entropy: dL/dz = sum(v_y)·softmax(z) − v_y.  Sparse/L1:
    dL/dz_i = sign(v_x_i − v_y_i) on active units, 0 elsewhere; both the
    L1 subgradient at zero and the ReLU derivative at zero are taken as 0.
    """
    x = _check_input(params, x, params.head_kind)
    v_y = np.asarray(v_y, dtype=np.float64)
    if v_y.shape != (params.num_ingredients,):
        raise DimensionMismatch(f"target shape {v_y.shape} vs I={params.num_ingredients}")
    z = params.W @ x + params.b
    if params.head_kind == "dense":
        dz = v_y.sum() * softmax(z) - v_y
    else:
        v_x = np.maximum(0.0, z)
        dz = np.where(z > 0, np.sign(v_x - v_y), 0.0)
    return Gradients(dW=np.outer(dz, x), db=dz)


def _batch_gradients(
    params: HeadParams, X: np.ndarray, Y: np.ndarray
) -> tuple[Gradients, float]:
    """Mean gradient and mean loss over a mini-batch (rows are samples)."""
    Z = X @ params.W.T + params.b
    if params.head_kind == "dense":
        V = softmax(Z)
        dZ = Y.sum(axis=1, keepdims=True) * V - Y
        active = Y > 0
        losses = -np.where(active, Y * np.log(np.where(active, V, 1.0)), 0.0).sum(axis=1)
    else:
        V = np.maximum(0.0, Z)
        dZ = np.where(Z > 0, np.sign(V - Y), 0.0)
        losses = np.abs(Y - V).sum(axis=1)
    n = X.shape[0]
    grads = Gradients(dW=dZ.T @ X / n, db=dZ.mean(axis=0))
    return grads, float(losses.mean())


def adam_step(
    params: HeadParams, grads: Gradients, state: OptimizerState
) -> tuple[HeadParams, OptimizerState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    if grads.dW.shape != params.W.shape or grads.db.shape != params.b.shape:
        raise ShapeMismatch("gradient shapes do not match parameters")
    t = state.t + 1
    m_W = state.beta1 * state.m_W + (1 - state.beta1) * grads.dW
    v_W = state.beta2 * state.v_W + (1 - state.beta2) * grads.dW**2
    m_b = state.beta1 * state.m_b + (1 - state.beta1) * grads.db
    v_b = state.beta2 * state.v_b + (1 - state.beta2) * grads.db**2
    correct1 = 1 - state.beta1**t
    correct2 = 1 - state.beta2**t
    new_W = params.W - state.lr * (m_W / correct1) / (np.sqrt(v_W / correct2) + state.eps)
    new_b = params.b - state.lr * (m_b / correct1) / (np.sqrt(v_b / correct2) + state.eps)
    new_params = HeadParams(W=new_W, b=new_b, head_kind=params.head_kind)
    new_state = replace(state, m_W=m_W, v_W=v_W, m_b=m_b, v_b=v_b, t=t)
    return new_params, new_state


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 64
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class TrainResult:
    params: HeadParams
    loss_history: tuple[float, ...]
    val_history: tuple[float, ...] = ()
    best_epoch: int | None = None


def init_params(
    num_ingredients: int, feature_dim: int, head_kind: str, rng: np.random.Generator
) -> HeadParams:
    """W uniform in [-1/sqrt(d), 1/sqrt(d)], b zero."""
    bound = 1.0 / np.sqrt(feature_dim)
    W = rng.uniform(-bound, bound, size=(num_ingredients, feature_dim))
    return HeadParams(W=W, b=np.zeros(num_ingredients), head_kind=head_kind)


def _dataset_arrays(dataset) -> tuple[np.ndarray, np.ndarray]:
    if not dataset:
        raise EmptyDataset("no training samples")
    feature_dims = {len(x) for x, _ in dataset}
    target_dims = {len(y) for _, y in dataset}
    if len(feature_dims) > 1 or len(target_dims) > 1:
        raise MixedDimensions(f"features {sorted(feature_dims)}, targets {sorted(target_dims)}")
    X = np.asarray([np.asarray(x, dtype=np.float64) for x, _ in dataset])
    Y = np.asarray([np.asarray(y, dtype=np.float64) for _, y in dataset])
    return X, Y


def mean_loss(params: HeadParams, X: np.ndarray, Y: np.ndarray) -> float:
    _, loss = _batch_gradients(params, X, Y)
    return loss


def train(
    dataset: list[tuple[np.ndarray, np.ndarray]],
    head_kind: str,
    config: TrainConfig,
    val_dataset: list[tuple[np.ndarray, np.ndarray]] | None = None,
) -> TrainResult:
    """Mini-batch training with deterministic shuffling from the seed.

    Targets must be normalized to C=1.  When a validation set is given,
    the returned parameters are those of the epoch with the lowest
    validation loss (earliest epoch wins ties); otherwise the final ones.
    """
    X, Y = _dataset_arrays(dataset)
    rng = np.random.default_rng(config.seed)
    params = init_params(Y.shape[1], X.shape[1], head_kind, rng)
    state = OptimizerState.initial(
        params, lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps
    )
    X_val = Y_val = None
    if val_dataset is not None:
        X_val, Y_val = _dataset_arrays(val_dataset)

    history: list[float] = []
    val_history: list[float] = []
    best_epoch: int | None = None
    best_val = np.inf
    best_params = params
    n = X.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads, batch_loss = _batch_gradients(params, X[batch], Y[batch])
            epoch_loss += batch_loss * len(batch)
            params, state = adam_step(params, grads, state)
        history.append(epoch_loss / n)
        if X_val is not None:
            val_loss = mean_loss(params, X_val, Y_val)
            val_history.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_epoch = epoch
                best_params = params
    if best_epoch is not None:
        params = best_params
    return TrainResult(
        params=params,
        loss_history=tuple(history),
        val_history=tuple(val_history),
        best_epoch=best_epoch,
    )


def predict_topk(v_x: np.ndarray, k: int = 10, C: float = 1.0) -> np.ndarray:
    """Keep the k largest entries (ties: lower index) and rescale to sum C.

    When every entry is <= 0 (possible for the sparse head) there is
    nothing to renormalize and the all-zero vector comes back; callers
    apply the metrics' zero-prediction rule.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    v_x = np.asarray(v_x, dtype=np.float64)
    out = np.zeros_like(v_x)
    if len(v_x) == 0:
        return out
    keep = np.argsort(-v_x, kind="stable")[:k]
    kept_sum = v_x[keep].sum()
    if v_x.max() <= 0 or kept_sum <= 0:
        return out
    out[keep] = v_x[keep] * (C / kept_sum)
    return out
