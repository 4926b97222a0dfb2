"""Dense feed-forward ReLU network written directly against numpy.

Layers are stored input-first: ``weights[k]`` has shape ``(fan_in, fan_out)``
and a batch ``A`` (rows are samples) maps to ``A @ weights[k] + biases[k]``.
Every hidden layer is followed by ReLU and optional inverted dropout; the last
layer is affine and has a single output unit.

``layer_sizes`` follows the same order: ``(p, h_1, ..., h_L, 1)`` where ``p`` is
the input dimension and ``h_1`` is the hidden layer closest to the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DivergedError, ValidationError


@dataclass
class NetworkParams:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2 or any(s <= 0 for s in self.layer_sizes):
            raise DimensionError(f"bad layer sizes {self.layer_sizes}")
        if self.layer_sizes[-1] != 1:
            raise DimensionError("output layer must have width 1")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise DimensionError("need one (W, b) pair per consecutive layer pair")
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[k], self.layer_sizes[k + 1])
            if W.shape != shape or b.shape != (shape[1],):
                raise DimensionError(f"layer {k}: W{W.shape} b{b.shape}, expected W{shape}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_hidden(self) -> int:
        return len(self.layer_sizes) - 2

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            self.layer_sizes,
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
        )

    def is_finite(self) -> bool:
        return all(np.isfinite(W).all() and np.isfinite(b).all() for W, b in zip(self.weights, self.biases))


def init_params(n_inputs: int, hidden: Sequence[int], rng: np.random.Generator) -> NetworkParams:
    """Uniform init with half-width sqrt(6 / (fan_in + fan_out)); biases start at zero."""
    sizes = (int(n_inputs), *(int(h) for h in hidden), 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(sizes, weights, biases)


def zeros_like_params(params: NetworkParams) -> NetworkParams:
    return NetworkParams(
        params.layer_sizes,
        [np.zeros_like(W) for W in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )


@dataclass
class ForwardTrace:
    """Intermediate values of one forward pass.

    ``activations[0]`` is the input batch and ``activations[k]`` for k >= 1 the
    (post-dropout) output of hidden layer k. ``pre`` holds the affine outputs of
    every layer, the last one being the network output of shape ``(n, 1)``.
    """

    activations: list[np.ndarray]
    pre: list[np.ndarray]
    masks: list[np.ndarray | None] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.pre[-1][:, 0]

    @property
    def top_hidden(self) -> np.ndarray:
        """Input to the final affine layer."""
        return self.activations[-1]


def _check_rates(params: NetworkParams, dropout_rates):
    if dropout_rates is None:
        return [0.0] * params.n_hidden
    rates = [float(r) for r in dropout_rates]
    if len(rates) != params.n_hidden:
        raise DimensionError(f"expected {params.n_hidden} dropout rates, got {len(rates)}")
    if any(not 0.0 <= r < 1.0 for r in rates):
        raise ValidationError(f"dropout rates must lie in [0, 1): {rates}")
    return rates


def forward(
    params: NetworkParams,
    X: np.ndarray,
    dropout_rates: Sequence[float] | None = None,
    rng: np.random.Generator | None = None,
    train_mode: bool = False,
) -> ForwardTrace:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.n_inputs:
        raise DimensionError(f"input of shape {X.shape} does not match {params.n_inputs} inputs")
    if not np.isfinite(X).all():
        raise ValidationError("non-finite input")
    rates = _check_rates(params, dropout_rates)
    if train_mode and any(rates) and rng is None:
        raise ValidationError("dropout in train mode needs a generator")

    acts, pres, masks = [X], [], []
    a = X
    last = len(params.weights) - 1
    for k, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        pres.append(z)
        if k == last:
            break
        a = np.maximum(z, 0.0)
        rate = rates[k]
        if train_mode and rate > 0.0:
            mask = (rng.random(a.shape) >= rate) / (1.0 - rate)
            a = a * mask
            masks.append(mask)
        else:
            masks.append(None)
        acts.append(a)
    return ForwardTrace(acts, pres, masks)


def predict(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    """Eval-mode network output, shape ``(n,)``."""
    return forward(params, X).output


def backward(
    params: NetworkParams,
    trace: ForwardTrace,
    residual_grad: np.ndarray,
    sample_weights: np.ndarray | None = None,
) -> NetworkParams:
    """Gradient of ``sum_i w_i * loss_i`` given ``residual_grad[i] = d loss_i / d output_i``.

    The ReLU derivative at exactly zero is taken to be zero.
    """
    g = np.asarray(residual_grad, dtype=float)
    n = trace.activations[0].shape[0]
    if g.shape != (n,):
        raise DimensionError(f"residual_grad has shape {g.shape}, batch size is {n}")
    if sample_weights is not None:
        w = np.asarray(sample_weights, dtype=float)
        if w.shape != (n,):
            raise DimensionError(f"sample_weights has shape {w.shape}, batch size is {n}")
        g = g * w

    grads_W = [None] * len(params.weights)
    grads_b = [None] * len(params.weights)
    delta = g[:, None]
    for k in range(len(params.weights) - 1, -1, -1):
        grads_W[k] = trace.activations[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k == 0:
            break
        delta = delta @ params.weights[k].T
        mask = trace.masks[k - 1]
        if mask is not None:
            delta = delta * mask
        delta = delta * (trace.pre[k - 1] > 0.0)
    return NetworkParams(params.layer_sizes, grads_W, grads_b)


def squared_loss(f: np.ndarray, t: np.ndarray):
    r = f - t
    return r * r, 2.0 * r


LossFn = Callable[[np.ndarray, np.ndarray], tuple]


def sgd_epoch(
    params: NetworkParams,
    X: np.ndarray,
    targets: np.ndarray,
    *,
    lr: float,
    batch_size: int,
    rng: np.random.Generator,
    sample_weights: np.ndarray | None = None,
    dropout_rates: Sequence[float] | None = None,
    loss: str | LossFn = "squared",
    epoch: int = 0,
) -> tuple[NetworkParams, float]:
    """One shuffled pass of mini-batch SGD over ``(X, targets)``.

    The mini-batch objective is ``mean_i w_i * loss_i`` (unit weights when
    ``sample_weights`` is None). Returns updated parameters (the input object is
    not modified) and the mean of the per-batch objectives.

    ``loss`` is ``"squared"`` or a callable ``(outputs, targets) -> (losses, dlosses)``.
    """
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = X.shape[0]
    if n == 0:
        raise ValidationError("empty training data")
    if targets.shape != (n,):
        raise DimensionError(f"targets shape {targets.shape} does not match {n} rows")
    if lr < 0:
        raise ValidationError("learning rate must be nonnegative")
    if batch_size <= 0:
        raise ValidationError("batch size must be positive")
    if sample_weights is not None:
        sample_weights = np.asarray(sample_weights, dtype=float)
        if sample_weights.shape != (n,):
            raise DimensionError("sample_weights length does not match data")
    if loss == "squared":
        loss_fn = squared_loss
    elif callable(loss):
        loss_fn = loss
    else:
        raise ValidationError(f"unknown loss {loss!r}")

    params = params.copy()
    order = rng.permutation(n)
    batch_losses = []
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        trace = forward(params, X[idx], dropout_rates, rng, train_mode=True)
        losses, dlosses = loss_fn(trace.output, targets[idx])
        w = None if sample_weights is None else sample_weights[idx]
        m = len(idx)
        batch_loss = float(np.mean(losses if w is None else w * losses))
        if not np.isfinite(batch_loss):
            raise DivergedError(epoch, "non-finite training loss")
        batch_losses.append(batch_loss)
        grads = backward(params, trace, dlosses / m, w)
        for k in range(len(params.weights)):
            params.weights[k] -= lr * grads.weights[k]
            params.biases[k] -= lr * grads.biases[k]
    if not params.is_finite():
        raise DivergedError(epoch, "non-finite network weights")
    return params, float(np.mean(batch_losses))


def stack(X: np.ndarray, y: np.ndarray, J: int) -> "StackedBatch":
    """Replicate ``(X, y)`` J times as whole blocks: rows ``[j*n, (j+1)*n)`` are copy j."""
    J = int(J)
    if J < 1:
        raise ValidationError("J must be at least 1")
    X = np.asarray(X)
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise DimensionError("X and y have different lengths")
    return StackedBatch(J, np.tile(X, (J, 1)), np.tile(y, J))


@dataclass
class StackedBatch:
    J: int
    X: np.ndarray
    y: np.ndarray
    Z0: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.y.shape[0] // self.J

    def block(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(j * self.n, (j + 1) * self.n)
        return self.X[sl], self.y[sl]
